#include "multinex/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

namespace multinex::checkpoint {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[4] = {'M', 'N', 'X', '1'};

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw std::runtime_error(path + ": " + why);
}

} // namespace

void save(const std::string& path, const nn::ModelParams& params) {
    json manifest = json::array();
    std::vector<float> blob;
    nn::for_each_param(params, [&](const std::string& name, const Tensor& t) {
        manifest.push_back({{"name", name},
                            {"shape", {t.height(), t.width(), t.channels()}},
                            {"offset", blob.size() * sizeof(float)},
                            {"count", t.size()},
                            {"dtype", "f32le"}});
        blob.insert(blob.end(), t.vec().begin(), t.vec().end());
    });

    const std::string m = manifest.dump();
    if (m.size() > 0xffffffffull) fail(path, "manifest too large");
    const uint32_t mlen = static_cast<uint32_t>(m.size());

    std::ofstream f(path, std::ios::binary);
    if (!f) fail(path, "cannot open for writing");
    f.write(kMagic, 4);
    f.write(reinterpret_cast<const char*>(&mlen), 4);
    f.write(m.data(), m.size());
    f.write(reinterpret_cast<const char*>(blob.data()), blob.size() * sizeof(float));
    if (!f) fail(path, "write failed");
}

void load(const std::string& path, nn::ModelParams& params) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(path, "cannot open file");

    char magic[4];
    uint32_t mlen = 0;
    f.read(magic, 4);
    f.read(reinterpret_cast<char*>(&mlen), 4);
    if (!f || std::memcmp(magic, kMagic, 4) != 0)
        fail(path, "not a checkpoint file (bad magic)");

    std::string mtext(mlen, '\0');
    f.read(mtext.data(), mlen);
    if (!f) fail(path, "truncated manifest");

    json manifest;
    try {
        manifest = json::parse(mtext);
    } catch (const json::exception& e) {
        fail(path, std::string("corrupt manifest: ") + e.what());
    }
    if (!manifest.is_array()) fail(path, "corrupt manifest: expected an array");

    std::vector<char> blob((std::istreambuf_iterator<char>(f)),
                           std::istreambuf_iterator<char>());

    size_t idx = 0;
    nn::for_each_param(params, [&](const std::string& name, Tensor& t) {
        if (idx >= manifest.size())
            fail(path, "missing layer '" + name + "' (checkpoint has " +
                           std::to_string(manifest.size()) + " entries)");
        const json& e = manifest[idx];
        const std::string ename = e.value("name", "");
        if (ename != name)
            fail(path, "layer " + std::to_string(idx) + ": expected '" + name +
                           "', checkpoint has '" + ename + "'");
        const auto shape = e.value("shape", std::vector<int>{});
        if (shape.size() != 3 || shape[0] != t.height() || shape[1] != t.width() ||
            shape[2] != t.channels())
            fail(path, "layer '" + name + "': shape mismatch, expected " + t.shape_str());
        if (e.value("dtype", "") != "f32le")
            fail(path, "layer '" + name + "': unsupported dtype");
        const size_t offset = e.value("offset", size_t(0));
        const size_t count = e.value("count", size_t(0));
        if (count != t.size())
            fail(path, "layer '" + name + "': element count mismatch");
        if (offset + count * sizeof(float) > blob.size())
            fail(path, "layer '" + name + "': data out of range");
        std::memcpy(t.data(), blob.data() + offset, count * sizeof(float));
        ++idx;
    });
    if (idx != manifest.size())
        fail(path, "checkpoint has " + std::to_string(manifest.size() - idx) +
                       " extra entries starting at '" +
                       manifest[idx].value("name", "?") + "'");
}

} // namespace multinex::checkpoint
