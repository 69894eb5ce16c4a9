#include "multinex/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace multinex {
namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw std::runtime_error(path + ": " + why);
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Tensor decode_png(const std::string& path, FilePtr fp) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(path, "png decoder init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail(path, "png decoder init failed");
    }

    std::vector<png_byte> raw;
    std::vector<png_bytep> rows;
    int width = 0, height = 0, bit_depth = 0;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "corrupt PNG data");
    }

    png_init_io(png, fp.get());
    png_read_info(png, info);
    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));
    bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_strip_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    bit_depth = png_get_bit_depth(png, info);
    const size_t rowbytes = png_get_rowbytes(png, info);
    raw.resize(rowbytes * height);
    rows.resize(height);
    for (int y = 0; y < height; ++y) rows[y] = raw.data() + y * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Tensor out(height, width, 3);
    if (bit_depth == 8) {
        for (int y = 0; y < height; ++y) {
            const png_byte* r = raw.data() + y * rowbytes;
            for (int x = 0; x < width; ++x)
                for (int c = 0; c < 3; ++c)
                    out.at(y, x, c) = static_cast<float>(r[3 * x + c]) / 255.0f;
        }
    } else if (bit_depth == 16) {
        // PNG stores 16-bit samples big-endian.
        for (int y = 0; y < height; ++y) {
            const png_byte* r = raw.data() + y * rowbytes;
            for (int x = 0; x < width; ++x)
                for (int c = 0; c < 3; ++c) {
                    const unsigned hi = r[6 * x + 2 * c];
                    const unsigned lo = r[6 * x + 2 * c + 1];
                    out.at(y, x, c) = static_cast<float>((hi << 8) | lo) / 65535.0f;
                }
        }
    } else {
        fail(path, "unsupported PNG bit depth " + std::to_string(bit_depth));
    }
    return out;
}

int ppm_next_token(std::FILE* f, const std::string& path) {
    // Skips whitespace and '#' comments, then parses one decimal integer.
    int ch = std::fgetc(f);
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = std::fgetc(f);
        } else if (std::isspace(ch)) {
            ch = std::fgetc(f);
        } else {
            break;
        }
    }
    if (ch == EOF || !std::isdigit(ch)) fail(path, "corrupt PPM header");
    long v = 0;
    while (ch != EOF && std::isdigit(ch)) {
        v = v * 10 + (ch - '0');
        if (v > 1000000000L) fail(path, "corrupt PPM header");
        ch = std::fgetc(f);
    }
    if (ch != EOF && !std::isspace(ch) && ch != '#') fail(path, "corrupt PPM header");
    if (ch == '#') std::ungetc(ch, f);
    return static_cast<int>(v);
}

Tensor decode_ppm(const std::string& path, FilePtr fp) {
    std::FILE* f = fp.get();
    const int width = ppm_next_token(f, path);
    const int height = ppm_next_token(f, path);
    const int maxval = ppm_next_token(f, path);
    if (width <= 0 || height <= 0 || maxval < 1 || maxval > 65535)
        fail(path, "invalid PPM dimensions or maxval");

    const int bytes_per_sample = maxval > 255 ? 2 : 1;
    const size_t count = static_cast<size_t>(width) * height * 3 * bytes_per_sample;
    std::vector<unsigned char> raw(count);
    if (std::fread(raw.data(), 1, count, f) != count) fail(path, "truncated PPM data");

    Tensor out(height, width, 3);
    const float scale = 1.0f / static_cast<float>(maxval);
    if (bytes_per_sample == 1) {
        for (size_t i = 0; i < out.size(); ++i)
            out[i] = static_cast<float>(raw[i]) * scale;
    } else {
        for (size_t i = 0; i < out.size(); ++i) {
            const unsigned v = (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
            if (v > static_cast<unsigned>(maxval)) fail(path, "PPM sample exceeds maxval");
            out[i] = static_cast<float>(v) * scale;
        }
    }
    return out;
}

unsigned char quantize(float v) {
    const float c = std::clamp(v, 0.0f, 1.0f);
    return static_cast<unsigned char>(std::lround(c * 255.0f));
}

void encode_png(const std::string& path, const Tensor& img) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) fail(path, "cannot open for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(path, "png encoder init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail(path, "png encoder init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(path, "png encode failed");
    }

    const int ch = img.channels();
    const int color = ch == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.width(), img.height(), 8, color,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_byte> row(static_cast<size_t>(img.width()) * ch);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < ch; ++c) row[x * ch + c] = quantize(img.at(y, x, c));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void encode_ppm(const std::string& path, const Tensor& img) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(path, "cannot open for writing");
    f << "P6\n" << img.width() << " " << img.height() << "\n255\n";
    std::vector<unsigned char> row(static_cast<size_t>(img.width()) * 3);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < 3; ++c) {
                const int src = img.channels() == 1 ? 0 : c;
                row[x * 3 + c] = quantize(img.at(y, x, src));
            }
        f.write(reinterpret_cast<const char*>(row.data()), row.size());
    }
    if (!f) fail(path, "write failed");
}

} // namespace

Tensor load_image(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) fail(path, "cannot open file");

    unsigned char sig[8] = {};
    const size_t got = std::fread(sig, 1, sizeof(sig), fp.get());
    if (std::fseek(fp.get(), 0, SEEK_SET) != 0) fail(path, "seek failed");

    if (got >= 8 && png_sig_cmp(sig, 0, 8) == 0) return decode_png(path, std::move(fp));
    if (got >= 2 && sig[0] == 'P' && sig[1] == '6') {
        std::fseek(fp.get(), 2, SEEK_SET);
        return decode_ppm(path, std::move(fp));
    }
    fail(path, "unrecognized image header (expected PNG or binary PPM)");
}

void save_image(const std::string& path, const Tensor& img) {
    if (img.empty()) throw std::invalid_argument("save_image: empty image");
    if (img.channels() != 1 && img.channels() != 3)
        throw std::invalid_argument("save_image: expected 1 or 3 channels, got " +
                                    std::to_string(img.channels()));
    const auto dot = path.find_last_of('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    if (ext == ".png") {
        encode_png(path, img);
    } else if (ext == ".ppm") {
        encode_ppm(path, img);
    } else {
        throw std::invalid_argument("save_image: unsupported extension '" + ext +
                                    "' (use .png or .ppm)");
    }
}

} // namespace multinex
