#include "multinex/dataset.hpp"

#include <algorithm>
#include <filesystem>

#include "multinex/image_io.hpp"

namespace multinex::data {
namespace fs = std::filesystem;

namespace {

std::vector<std::string> list_images(const std::string& dir) {
    if (!fs::is_directory(dir))
        throw std::runtime_error(dir + ": not a directory");
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const std::string ext = e.path().extension().string();
        if (ext == ".png" || ext == ".ppm") names.push_back(e.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

} // namespace

PairedDataset PairedDataset::open(const std::string& root) {
    const std::string low_dir = root + "/low";
    const std::string high_dir = root + "/high";
    const auto low = list_images(low_dir);
    const auto high = list_images(high_dir);

    for (const auto& n : low)
        if (!std::binary_search(high.begin(), high.end(), n))
            throw std::runtime_error(root + ": '" + n + "' has no high-exposure pair");
    for (const auto& n : high)
        if (!std::binary_search(low.begin(), low.end(), n))
            throw std::runtime_error(root + ": '" + n + "' has no low-exposure pair");
    if (low.empty()) throw std::runtime_error(root + ": no image pairs found");

    PairedDataset ds;
    for (const auto& n : low) {
        ds.names.push_back(n);
        ds.low_paths.push_back(low_dir + "/" + n);
        ds.high_paths.push_back(high_dir + "/" + n);
    }
    return ds;
}

std::pair<Tensor, Tensor> PairedDataset::load(size_t i) const {
    if (i >= size()) throw std::out_of_range("pair index out of range");
    Tensor low = load_image(low_paths[i]);
    Tensor high = load_image(high_paths[i]);
    if (!low.same_shape(high))
        throw std::runtime_error("'" + names[i] + "': pair dimensions differ, " +
                                 low.shape_str() + " vs " + high.shape_str());
    return {std::move(low), std::move(high)};
}

SamplePatch sample_patch(const Tensor& low, const Tensor& high, int patch, Rng& rng,
                         const AugmentConfig& aug) {
    if (!low.same_shape(high))
        throw std::invalid_argument("patch sampling needs matching shapes, got " +
                                    low.shape_str() + " vs " + high.shape_str());
    if (patch < 1 || patch > low.width() || patch > low.height())
        throw std::invalid_argument("patch size " + std::to_string(patch) +
                                    " does not fit image " + low.shape_str());

    int x0 = 0, y0 = 0;
    if (aug.random_crop) {
        x0 = rng.uniform_int(0, low.width() - patch);
        y0 = rng.uniform_int(0, low.height() - patch);
    }
    bool hflip = false, vflip = false;
    if (aug.flips) {
        hflip = rng.bernoulli(0.5);
        vflip = rng.bernoulli(0.5);
    }
    int quarter_turns = 0;
    if (aug.rotations) quarter_turns = rng.uniform_int(0, 3);

    const auto transform = [&](const Tensor& img) {
        Tensor t = crop(img, y0, x0, patch, patch);
        if (hflip) t = flip_horizontal(t);
        if (vflip) t = flip_vertical(t);
        if (quarter_turns) t = rotate90(t, quarter_turns);
        return t;
    };
    return {transform(low), transform(high)};
}

} // namespace multinex::data
