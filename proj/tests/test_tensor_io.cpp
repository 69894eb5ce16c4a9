#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "multinex/image_io.hpp"
#include "multinex/tensor.hpp"
#include "test_support.hpp"

using namespace multinex;
using testsupport::Rng;
using testsupport::TempDir;

TEST_CASE("tensor indexing is row-major with interleaved channels") {
    Tensor t(2, 3, 2);
    t.at(1, 2, 1) = 7.0f;
    CHECK(t[(1 * 3 + 2) * 2 + 1] == 7.0f);
    CHECK(t.shape_str() == "(2,3,2)");
    CHECK(t.size() == 12);
}

TEST_CASE("from_data validates the element count") {
    CHECK_NOTHROW(Tensor::from_data(1, 2, 2, {1, 2, 3, 4}));
    CHECK_THROWS_AS(Tensor::from_data(1, 2, 2, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("broadcasting combines dims that are equal or 1") {
    const Tensor a = Tensor::from_data(2, 2, 1, {1, 2, 3, 4});
    const Tensor row = Tensor::from_data(1, 1, 1, {10});
    const Tensor s = add(a, row);
    CHECK(s.at(0, 0, 0) == 11.0f);
    CHECK(s.at(1, 1, 0) == 14.0f);

    // (H,W,1) * (H,W,3): the single channel multiplies every channel.
    const Tensor rgb = Tensor(2, 2, 3, 2.0f);
    const Tensor p = mul(a, rgb);
    CHECK(p.at(1, 0, 0) == 6.0f);
    CHECK(p.at(1, 0, 2) == 6.0f);

    const Tensor bad(3, 2, 1);
    CHECK_THROWS_AS(add(a, bad), std::invalid_argument);
}

TEST_CASE("flips and rotations move pixels where expected") {
    const Tensor t = Tensor::from_data(2, 3, 1, {1, 2, 3, 4, 5, 6});

    const Tensor h = flip_horizontal(t);
    CHECK(h.at(0, 0, 0) == 3.0f);
    CHECK(h.at(1, 2, 0) == 4.0f);

    const Tensor v = flip_vertical(t);
    CHECK(v.at(0, 0, 0) == 4.0f);

    // One counter-clockwise quarter turn sends (y, x) to (W-1-x, y).
    const Tensor r = rotate90(t, 1);
    CHECK(r.height() == 3);
    CHECK(r.width() == 2);
    CHECK(r.at(2, 0, 0) == t.at(0, 0, 0));
    CHECK(r.at(0, 0, 0) == t.at(0, 2, 0));

    // Four turns restore the original exactly.
    CHECK(testsupport::bit_identical(rotate90(t, 4), t));
    // k is taken modulo 4, also for negative k.
    CHECK(testsupport::bit_identical(rotate90(t, -1), rotate90(t, 3)));
}

TEST_CASE("crop extracts the anchored window and rejects out-of-bounds") {
    const Tensor t = Tensor::from_data(3, 3, 1, {1, 2, 3, 4, 5, 6, 7, 8, 9});
    const Tensor c = crop(t, 1, 1, 2, 2);
    CHECK(c.at(0, 0, 0) == 5.0f);
    CHECK(c.at(1, 1, 0) == 9.0f);
    CHECK_THROWS_AS(crop(t, 2, 2, 2, 2), std::invalid_argument);
}

TEST_CASE("concat and slice are channel inverses") {
    Rng rng(11);
    const Tensor a = testsupport::random_image(4, 5, 2, rng);
    const Tensor b = testsupport::random_image(4, 5, 1, rng);
    const Tensor cat = concat_channels(std::vector<Tensor>{a, b});
    CHECK(cat.channels() == 3);
    CHECK(testsupport::bit_identical(slice_channel(cat, 2), b));
    CHECK(slice_channel(cat, 0).at(3, 4, 0) == a.at(3, 4, 0));
    CHECK_THROWS_AS(slice_channel(cat, 3), std::invalid_argument);
}

TEST_CASE("png round-trip stays within quantization error") {
    Rng rng(22);
    const Tensor img = testsupport::random_image(13, 17, 3, rng);
    TempDir dir("png_roundtrip");
    save_image(dir.file("x.png"), img);
    const Tensor back = load_image(dir.file("x.png"));
    REQUIRE(back.same_shape(img));
    // 8-bit storage: round(v*255)/255 differs from v by at most 1/510.
    CHECK(testsupport::max_abs_diff(img, back) <= 1.0 / 510.0 + 1e-7);
}

TEST_CASE("quantized values survive a png round-trip exactly") {
    Tensor img(4, 4, 3);
    for (size_t i = 0; i < img.size(); ++i)
        img[i] = static_cast<float>((i * 13) % 256) / 255.0f;
    TempDir dir("png_exact");
    save_image(dir.file("x.png"), img);
    CHECK(testsupport::bit_identical(load_image(dir.file("x.png")), img));
}

TEST_CASE("ppm round-trip stays within quantization error") {
    Rng rng(33);
    const Tensor img = testsupport::random_image(9, 7, 3, rng);
    TempDir dir("ppm_roundtrip");
    save_image(dir.file("x.ppm"), img);
    const Tensor back = load_image(dir.file("x.ppm"));
    REQUIRE(back.same_shape(img));
    CHECK(testsupport::max_abs_diff(img, back) <= 1.0 / 510.0 + 1e-7);
}

TEST_CASE("grayscale png saves one channel and loads back as rgb") {
    Rng rng(44);
    const Tensor gray = testsupport::random_image(8, 8, 1, rng);
    TempDir dir("gray");
    save_image(dir.file("g.png"), gray);
    const Tensor back = load_image(dir.file("g.png"));
    CHECK(back.channels() == 3);
    CHECK(testsupport::max_abs_diff(slice_channel(back, 0), gray) <= 1.0 / 510.0 + 1e-7);
    CHECK(testsupport::bit_identical(slice_channel(back, 0), slice_channel(back, 1)));
}

TEST_CASE("16-bit ppm input uses the full sample range") {
    TempDir dir("ppm16");
    {
        std::ofstream f(dir.file("w.ppm"), std::ios::binary);
        f << "P6\n2 1\n65535\n";
        // Big-endian samples: white pixel then mid-gray.
        const unsigned char bytes[] = {0xff, 0xff, 0xff, 0xff, 0xff, 0xff,
                                       0x80, 0x00, 0x80, 0x00, 0x80, 0x00};
        f.write(reinterpret_cast<const char*>(bytes), sizeof(bytes));
    }
    const Tensor img = load_image(dir.file("w.ppm"));
    CHECK(img.at(0, 0, 0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(img.at(0, 1, 0) == doctest::Approx(0x8000 / 65535.0).epsilon(1e-6));
}

TEST_CASE("ppm comments and whitespace are tolerated in the header") {
    TempDir dir("ppm_comment");
    {
        std::ofstream f(dir.file("c.ppm"), std::ios::binary);
        f << "P6\n# a comment\n 2 # inline\n1\n255\n";
        const unsigned char bytes[] = {10, 20, 30, 40, 50, 60};
        f.write(reinterpret_cast<const char*>(bytes), sizeof(bytes));
    }
    const Tensor img = load_image(dir.file("c.ppm"));
    CHECK(img.width() == 2);
    CHECK(img.at(0, 1, 2) == doctest::Approx(60.0 / 255.0));
}

TEST_CASE("corrupt and missing files raise errors naming the path") {
    TempDir dir("io_errors");
    CHECK_THROWS_WITH_AS(load_image(dir.file("missing.png")),
                         doctest::Contains("missing.png"), std::runtime_error);

    {
        std::ofstream f(dir.file("bad.png"), std::ios::binary);
        f << "definitely not a png";
    }
    CHECK_THROWS_AS(load_image(dir.file("bad.png")), std::runtime_error);

    {
        std::ofstream f(dir.file("trunc.ppm"), std::ios::binary);
        f << "P6\n4 4\n255\n";
        f << "ab";  // far fewer than 48 payload bytes
    }
    CHECK_THROWS_AS(load_image(dir.file("trunc.ppm")), std::runtime_error);
}

TEST_CASE("saving rejects unsupported extensions and channel counts") {
    TempDir dir("save_errors");
    const Tensor rgb(4, 4, 3, 0.5f);
    CHECK_THROWS_AS(save_image(dir.file("x.jpg"), rgb), std::invalid_argument);
    const Tensor two(4, 4, 2, 0.5f);
    CHECK_THROWS_AS(save_image(dir.file("x.png"), two), std::invalid_argument);
}

TEST_CASE("format detection reads content, not the extension") {
    Rng rng(55);
    const Tensor img = testsupport::random_image(5, 5, 3, rng);
    TempDir dir("sniff");
    save_image(dir.file("real_png.ppm"), img);  // ppm payload...
    std::filesystem::rename(dir.file("real_png.ppm"), dir.file("renamed.png"));
    const Tensor back = load_image(dir.file("renamed.png"));  // ...despite .png name
    CHECK(back.same_shape(img));
}
