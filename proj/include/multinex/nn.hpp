#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "multinex/tensor.hpp"

namespace multinex::nn {

// ---- Parameter containers ---------------------------------------------------
// Weight layout conventions (shapes given as Tensor (h, w, c)):
//   pointwise conv:  weight (out, in, 1), bias (1, 1, out)
//   depthwise conv:  weight (k, k, C), never biased
//   layer norm:      scale/shift (1, 1, C)
//   bottleneck pair: w1 (hidden, C, 1), w2 (C, hidden, 1), no biases

struct Conv1x1 {
    Tensor weight;
    Tensor bias;       // empty when has_bias is false
    bool has_bias = true;
    int in_ch = 0, out_ch = 0;
};

struct DwConv {
    Tensor weight;
    int k = 0, ch = 0;
};

struct LayerNormP {
    Tensor scale, shift;
    int ch = 0;
};

// Channel-recalibration block: x + dw3x3(LN(x)) * (tanh(W2 relu(W1 GAP(LN(x)))) * LN(x)).
struct Msef {
    LayerNormP ln;
    DwConv dw;         // 3x3
    Tensor w1, w2;
    int ch = 0, hidden = 0;
};

struct DsConv {
    DwConv dw;         // 3x3
    Conv1x1 pw;
};

// Feature block: msef_pre -> dsconv -> relu -> msef_post.
// The simplified form drops msef_pre (dsconv -> relu -> msef_post).
struct FusionBlock {
    bool has_pre_msef = true;
    Msef msef_pre;
    DsConv ds;
    Msef msef_post;
};

// Channel-weighting attention over the raw guidance stack:
// sigmoid(pointwise_nobias(dw7x7(S))).
struct Cwa {
    DwConv dw;         // 7x7 over the K input channels
    Conv1x1 proj;      // K -> C, no bias
};

struct Branch {
    Conv1x1 proj_in;                // K -> C
    std::vector<FusionBlock> pre;   // empty in the simplified variant
    Cwa cwa;
    std::vector<FusionBlock> post;
    Conv1x1 proj_out;               // C -> out (1 or 3)
};

struct VariantConfig {
    std::string name = "custom";
    int channels = 39;      // C
    int blocks = 3;         // feature blocks per stage
    int hidden = 9;         // bottleneck width inside each recalibration block
    bool simplified = false; // drop pre-attention stage and each block's leading MSEF

    static VariantConfig lightweight();  // C=39, T=3, hidden=5
    static VariantConfig nano();         // C=4,  T=1, hidden=1, simplified
    static VariantConfig by_name(const std::string& name);

    // Default bottleneck width for a custom channel count.
    static int default_hidden(int channels) { return std::max(1, channels / 4); }
};

inline constexpr int kLumStackChannels = 4;
inline constexpr int kReflStackChannels = 5;

struct ModelParams {
    VariantConfig cfg;
    Branch lum;    // guidance K=4, output 1 channel
    Branch refl;   // guidance K=5, output 3 channels
};

// ---- Registry ---------------------------------------------------------------
// Single source of truth for parameter identity and order. Everything that
// enumerates parameters (checkpoints, init, counting, optimizer state, tape
// binding) walks this registry, so order and names always agree.
using ParamVisitor = std::function<void(const std::string&, Tensor&)>;
using ConstParamVisitor = std::function<void(const std::string&, const Tensor&)>;

void for_each_param(ModelParams& p, const ParamVisitor& fn);
void for_each_param(const ModelParams& p, const ConstParamVisitor& fn);

// ---- Construction -----------------------------------------------------------

// Allocates all tensors for the variant, zero-filled.
ModelParams make_params(const VariantConfig& cfg);

// Deterministic init: conv/linear weights and biases drawn U(-sqrt(1/fan_in),
// +sqrt(1/fan_in)) in registry order from a single generator; layer-norm
// scale=1 shift=0. The luminance branch's final projection is all-zero, which
// zeroes the residual product: the model is an exact identity mapping at
// init. The reflectance projection keeps a random draw so the product's
// gradient is non-zero and the first optimizer step can move off identity.
ModelParams init_params(const VariantConfig& cfg, uint64_t seed);

// ---- Inference (float path) -------------------------------------------------

struct EnhanceResult {
    Tensor enhanced;   // clamped to [0,1]
    Tensor delta_l;    // (H,W,1), unclamped
    Tensor delta_r;    // (H,W,3), unclamped
};

// Block-level forward passes, exposed so each unit is testable in isolation.
Tensor conv1x1_forward(const Conv1x1& c, const Tensor& x);
Tensor dwconv_forward(const DwConv& d, const Tensor& x);          // zero padding
Tensor layer_norm_forward(const LayerNormP& ln, const Tensor& x); // eps 1e-5
Tensor msef_forward(const Msef& m, const Tensor& x);
Tensor fusion_block_forward(const FusionBlock& fb, const Tensor& x);
Tensor cwa_forward(const Cwa& cwa, const Tensor& stack);

// Runs one branch on its guidance stack; returns the unclamped residual map.
Tensor branch_forward(const Branch& br, const Tensor& stack);

// Full pipeline: builds both guidance stacks from RGB in [0,1] and composes
// out = clamp01(rgb + delta_l * delta_r).
EnhanceResult enhance(const ModelParams& p, const Tensor& rgb);

// ---- Accounting -------------------------------------------------------------

struct LayerCount {
    std::string name;
    int64_t count;
};

// Per-parameter-tensor element counts in registry order; sums to the total.
std::vector<LayerCount> count_params(const VariantConfig& cfg);
int64_t total_params(const VariantConfig& cfg);

// Multiply-accumulate counts for the conv/linear layers at a given input
// resolution. Elementwise ops, norms, and activations are not counted.
// FLOPs = 2 * MACs.
std::vector<LayerCount> count_macs(const VariantConfig& cfg, int h, int w);
int64_t total_macs(const VariantConfig& cfg, int h, int w);
double gflops(const VariantConfig& cfg, int h, int w);

} // namespace multinex::nn
