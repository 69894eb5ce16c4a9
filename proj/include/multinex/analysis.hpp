#pragma once

#include <string>
#include <vector>

#include "multinex/tensor.hpp"

namespace multinex::analysis {

// ---- PCA over per-pixel descriptor vectors ----------------------------------

struct PcaModel {
    int dim = 0;                      // K
    std::vector<double> mean;         // K
    std::vector<double> components;   // K x K; [i*K + j] = entry i of component j
    std::vector<double> eigenvalues;  // descending
};

// Covariance uses the 1/N normalization. Sign convention: each component's
// largest-magnitude entry is made positive (lowest index wins ties), so the
// decomposition is reproducible.
PcaModel fit_pca(const Tensor64& stack);

// 3x3 Sobel gradient magnitude of a single-channel map, replicate padding.
Tensor64 sobel_magnitude(const Tensor64& channel);

// Per-pixel residual energy outside the dominant component: the root of the
// summed squared projections onto components 2..K of the centered vector.
Tensor64 orthogonal_energy(const Tensor64& stack, const PcaModel& pca);

// ---- Descriptor importance ---------------------------------------------------
// Leave-one-out attribution over a candidate pool. For each candidate the
// pooled gradient map and the orthogonal-energy map are recomputed without
// it; the clamped decreases max(0, full - reduced) are its unique
// contribution maps, and their spatial means are the scores. Rank 1 is the
// highest score. Internally candidates are processed in name order so the
// report is invariant to the pool's input permutation; rows come back in
// input order.

struct ImportanceRow {
    std::string name;
    double delta_g = 0.0;  // unique gradient contribution
    double delta_e = 0.0;  // unique energy contribution
    int rank_g = 0;
    int rank_e = 0;
    double avg_rank = 0.0;
};

struct ImportanceReport {
    std::vector<ImportanceRow> rows;       // input order
    std::vector<Tensor64> delta_g_maps;    // aligned with rows, non-negative
    std::vector<Tensor64> delta_e_maps;
};

// pool entries are descriptor names resolvable by the guidance registry;
// defaults to the luminance candidate pool when empty. Needs >= 2 entries.
ImportanceReport descriptor_importance(const Tensor& rgb,
                                       std::vector<std::string> pool = {});

// ---- Linear reconstruction ---------------------------------------------------
// How much of a target a descriptor stack explains linearly: project the
// centered stack onto its top-D principal directions, ridge-fit the centered
// target on those coordinates, and report the reconstruction error.

struct LraConfig {
    int dims = 3;
    double lambda = 1e-3;
};

struct LraResult {
    Tensor64 reconstruction;               // (H, W, target channels)
    std::vector<double> per_channel_mse;
    double mean_mse = 0.0;
    std::vector<double> weights;           // dims x target channels, row-major
    PcaModel pca;
};

LraResult linear_reconstruction(const Tensor64& source_stack, const Tensor64& target,
                                const LraConfig& cfg = {});

} // namespace multinex::analysis
