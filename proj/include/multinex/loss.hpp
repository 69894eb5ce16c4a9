#pragma once

#include <functional>

#include "multinex/tensor.hpp"

namespace multinex::loss {

struct LossWeights {
    double mse = 1.0;
    double msssim = 0.2;
    double perceptual = 0.01;
};

struct LossBreakdown {
    double total = 0.0;
    double mse = 0.0;         // unweighted component values
    double msssim = 0.0;
    double perceptual = 0.0;
};

// Optional perceptual term for evaluation-time composition. Training keeps
// the term at exactly 0 (no hook), matching the default here.
using PerceptualHook = std::function<double(const Tensor64& pred, const Tensor64& target)>;

// Scale count the multi-scale term uses for a given input size: the largest
// M in [0,5] with 11 * 2^(M-1) <= min(h,w). M == 0 disables the term.
int auto_scales(int h, int w);

// total = w.mse * MSE + w.msssim * (1 - multi-scale similarity) + w.perceptual * hook.
// The prediction is taken unclamped; MSE runs over all elements. The
// similarity component calls the same code as the standalone metric, so the
// two agree bit for bit.
LossBreakdown hybrid_loss(const Tensor64& pred, const Tensor64& target,
                          const LossWeights& w = {}, const PerceptualHook& hook = {});
LossBreakdown hybrid_loss(const Tensor& pred, const Tensor& target,
                          const LossWeights& w = {}, const PerceptualHook& hook = {});

} // namespace multinex::loss
