#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "multinex/tensor.hpp"

// Double-precision numeric kernels shared by the similarity metrics, the
// training loss, and the differentiation tape. Both the plain and the taped
// code paths call these exact functions in the same sequence, which is what
// makes their results bit-identical rather than merely close.
namespace multinex::kernels {

inline constexpr double kC1 = 0.01 * 0.01;  // stabilizer for the mean term
inline constexpr double kC2 = 0.03 * 0.03;  // stabilizer for the contrast term
inline constexpr int kWindow = 11;

// Grayscale projection used by the structural metrics.
inline constexpr double kLumaR = 0.2126, kLumaG = 0.7152, kLumaB = 0.0722;

inline Tensor64 luma_rec709(const Tensor64& rgb) {
    if (rgb.channels() != 3)
        throw std::invalid_argument("luma projection expects RGB, got " + rgb.shape_str());
    Tensor64 out(rgb.height(), rgb.width(), 1);
    for (int y = 0; y < rgb.height(); ++y)
        for (int x = 0; x < rgb.width(); ++x)
            out.at(y, x, 0) = kLumaR * rgb.at(y, x, 0) + kLumaG * rgb.at(y, x, 1) +
                              kLumaB * rgb.at(y, x, 2);
    return out;
}

// 11x11 Gaussian window, sigma 1.5, normalized to sum 1.
inline const std::array<double, kWindow * kWindow>& gaussian11() {
    static const auto w = [] {
        std::array<double, kWindow * kWindow> k{};
        const double sigma = 1.5;
        std::array<double, kWindow> g{};
        for (int i = 0; i < kWindow; ++i) {
            const double d = i - (kWindow - 1) / 2.0;
            g[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
        }
        double total = 0.0;
        for (int i = 0; i < kWindow; ++i)
            for (int j = 0; j < kWindow; ++j) {
                k[i * kWindow + j] = g[i] * g[j];
                total += k[i * kWindow + j];
            }
        for (auto& v : k) v /= total;
        return k;
    }();
    return w;
}

// Valid-position Gaussian filtering: output is (H-10, W-10, C).
inline Tensor64 gaussian11_valid(const Tensor64& x) {
    const int oh = x.height() - kWindow + 1, ow = x.width() - kWindow + 1;
    if (oh < 1 || ow < 1)
        throw std::invalid_argument("input " + x.shape_str() +
                                    " too small for an 11x11 window");
    const auto& w = gaussian11();
    Tensor64 out(oh, ow, x.channels());
    for (int y = 0; y < oh; ++y)
        for (int xx = 0; xx < ow; ++xx)
            for (int c = 0; c < x.channels(); ++c) {
                double acc = 0.0;
                for (int i = 0; i < kWindow; ++i)
                    for (int j = 0; j < kWindow; ++j)
                        acc += w[i * kWindow + j] * x.at(y + i, xx + j, c);
                out.at(y, xx, c) = acc;
            }
    return out;
}

// 2x2 mean pooling with stride 2; a trailing odd row/column is dropped.
inline Tensor64 avgpool2(const Tensor64& x) {
    const int oh = x.height() / 2, ow = x.width() / 2;
    if (oh < 1 || ow < 1)
        throw std::invalid_argument("input " + x.shape_str() + " too small to pool");
    Tensor64 out(oh, ow, x.channels());
    for (int y = 0; y < oh; ++y)
        for (int xx = 0; xx < ow; ++xx)
            for (int c = 0; c < x.channels(); ++c)
                out.at(y, xx, c) = ((x.at(2 * y, 2 * xx, c) + x.at(2 * y, 2 * xx + 1, c)) +
                                    (x.at(2 * y + 1, 2 * xx, c) + x.at(2 * y + 1, 2 * xx + 1, c))) *
                                   0.25;
    return out;
}

inline double reduce_mean(const Tensor64& x) {
    if (x.empty()) throw std::invalid_argument("mean of empty tensor");
    double acc = 0.0;
    for (size_t i = 0; i < x.size(); ++i) acc += x[i];
    return acc / static_cast<double>(x.size());
}

// Per-scale weights of the multi-scale structural score. When fewer than 5
// scales are used, the leading weights are renormalized to sum to 1.
inline std::vector<double> msssim_weights(int scales) {
    static const double base[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
    if (scales < 1 || scales > 5)
        throw std::invalid_argument("scales must be in [1,5], got " + std::to_string(scales));
    std::vector<double> w(base, base + scales);
    if (scales < 5) {
        double total = 0.0;
        for (double v : w) total += v;
        for (double& v : w) v /= total;
    }
    return w;
}

// Largest scale count in [0,5] whose coarsest level still fits an 11x11
// window: 11 * 2^(M-1) <= min_dim. Returns 0 when even one scale won't fit.
inline int msssim_max_scales(int min_dim) {
    int m = 0;
    while (m < 5 && kWindow * (1 << m) <= min_dim) ++m;  // checks scale m+1
    return m;
}

inline int msssim_min_dim(int scales) { return kWindow * (1 << (scales - 1)); }

// x^e with bases at or below zero mapped to 0 (their gradient is also 0).
// Pair with a relu when a clamped fractional power is needed.
inline double pow_guarded(double base, double e) {
    return base <= 0.0 ? 0.0 : std::pow(base, e);
}

} // namespace multinex::kernels
