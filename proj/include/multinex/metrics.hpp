#pragma once

#include "multinex/tensor.hpp"

namespace multinex::metrics {

// Mean squared error over all elements, accumulated in double.
double mse(const Tensor& a, const Tensor& b);
double mse64(const Tensor64& a, const Tensor64& b);

// Peak signal-to-noise ratio for a [0,1] data range: 10*log10(1/MSE),
// capped at 100 dB when MSE drops below 1e-10.
double psnr(const Tensor& pred, const Tensor& ref);

// Structural similarity on the Rec.709 luma projection: 11x11 Gaussian
// window (sigma 1.5), valid positions only, computed in double. Range
// [-1, 1]. Requires min(H,W) >= 11.
double ssim(const Tensor& pred, const Tensor& ref);
double ssim64(const Tensor64& pred_rgb, const Tensor64& ref_rgb);

// Multi-scale structural similarity: per-scale contrast terms and the
// coarsest-scale similarity combined by exponent weights; factor bases are
// clamped at zero, so the result lies in [0,1]. Requires
// min(H,W) >= 11 * 2^(scales-1).
double ms_ssim(const Tensor& pred, const Tensor& ref, int scales = 5);
double ms_ssim64(const Tensor64& pred_rgb, const Tensor64& ref_rgb, int scales);

// Mean of the Rec.709 luma projection.
double mean_gray(const Tensor& img);

// Brightness-aligned comparison: scales the prediction by
// q = mean_gray(gt) / mean_gray(pred), then clamps to [0,1].
struct GtMeanResult {
    Tensor rescaled;
    double q;
};
GtMeanResult gt_mean_rescale(const Tensor& pred, const Tensor& gt);

} // namespace multinex::metrics
