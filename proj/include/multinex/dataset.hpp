#pragma once

#include <string>
#include <utility>
#include <vector>

#include "multinex/rng.hpp"
#include "multinex/tensor.hpp"

namespace multinex::data {

// Paired low/high-exposure images: <root>/low/* and <root>/high/* with
// matching filenames (.png or .ppm). Pairs are ordered by filename.
struct PairedDataset {
    std::vector<std::string> names;
    std::vector<std::string> low_paths;
    std::vector<std::string> high_paths;

    // Validates the pairing; the first filename present on only one side is
    // named in the error.
    static PairedDataset open(const std::string& root);

    size_t size() const { return names.size(); }

    // Loads one pair and checks that both sides share dimensions.
    std::pair<Tensor, Tensor> load(size_t i) const;
};

struct AugmentConfig {
    bool random_crop = true;
    bool flips = true;
    bool rotations = true;  // multiples of 90 degrees
};

struct SamplePatch {
    Tensor low, high;
};

// Draws one aligned square patch; both images receive the same transform.
// Draw order (fixed for reproducibility): x0, y0, horizontal flip, vertical
// flip, quarter-turn count; disabled stages consume no draws and fall back
// to the top-left crop / identity transform.
SamplePatch sample_patch(const Tensor& low, const Tensor& high, int patch, Rng& rng,
                         const AugmentConfig& aug);

} // namespace multinex::data
