#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "multinex/dataset.hpp"
#include "multinex/loss.hpp"
#include "multinex/nn.hpp"
#include "multinex/tape.hpp"

namespace multinex::train {

// ---- Tape graph construction --------------------------------------------------

// Double copies of the float master weights, keyed by registry name.
using ParamSet64 = std::map<std::string, Tensor64>;
ParamSet64 to_double(const nn::ModelParams& params);

// Named parameter leaves on a tape; one binding is shared by every graph
// built on that tape, so a batch accumulates gradients into the same leaves.
struct ModelBinding {
    std::map<std::string, tape::Tape::Id> ids;
};
ModelBinding bind_params(tape::Tape& tp, const ParamSet64& params);

// Full enhancement forward pass for one input; returns the unclamped
// prediction node (input + residual product).
tape::Tape::Id enhance_graph(tape::Tape& tp, const ModelBinding& b,
                             const nn::VariantConfig& cfg, const Tensor& low_rgb);

// Training objective on a prediction node. The multi-scale term adapts its
// scale count to the patch size (0 scales disables it); the perceptual slot
// is a constant 0 during training.
struct LossIds {
    tape::Tape::Id total, mse, msssim;
};
LossIds loss_graph(tape::Tape& tp, tape::Tape::Id pred, const Tensor& target,
                   const loss::LossWeights& w);

// ---- Training loop -------------------------------------------------------------

struct TrainConfig {
    int iterations = 2000;
    int batch = 8;
    int patch = 64;
    uint64_t seed = 0;
    double lr_start = 2e-4;
    double lr_end = 1e-6;
    loss::LossWeights weights;
    data::AugmentConfig augment;
    int log_interval = 100;        // trace row every N iterations (plus the last)
    int checkpoint_interval = 500; // 0 disables periodic checkpoints
};

// Loss values are recorded before the update, so the first row is the loss
// of the freshly initialized (identity) model.
struct TraceRow {
    int iter = 0;
    double lr = 0.0;
    double total = 0.0, mse = 0.0, msssim = 0.0, perceptual = 0.0;
};

struct TrainResult {
    nn::ModelParams params;
    std::vector<TraceRow> trace;
};

// Runs the optimization. With a non-empty out_dir, periodic checkpoints
// ("checkpoint_<iter>.mnx"), a final checkpoint ("checkpoint_final.mnx") and
// the loss trace ("trace.csv") are written there. iterations == 0 writes the
// initialized model and returns immediately. Same seed, same data, same
// config: byte-identical outputs. A non-finite loss aborts with the
// iteration and component values in the error.
TrainResult fit(const data::PairedDataset& ds, const nn::VariantConfig& variant,
                const TrainConfig& cfg, const std::string& out_dir = "");

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows);

} // namespace multinex::train
