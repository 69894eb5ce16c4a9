#pragma once

// Independent test-side oracles, shared by the unit suites and the acceptance
// runner. Each one recomputes a library result from its mathematical
// definition with a deliberately different structure, so agreement between
// the two routes is numerical evidence rather than a tautology.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "multinex/tensor.hpp"

// ---- Guidance descriptors ----------------------------------------------------
// Straight-line double-precision formulas, vs the library's table-driven
// float kernels.
namespace guidance_oracle {

constexpr double eps = 1e-6;

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

inline double y_rec709(double r, double g, double b) {
    return clamp01(0.2126 * r + 0.7152 * g + 0.0722 * b);
}
inline double y_vmax(double r, double g, double b) {
    return clamp01(std::max({r, g, b}));
}
inline double y_lightness(double r, double g, double b) {
    return clamp01((std::max({r, g, b}) + std::min({r, g, b})) / 2.0);
}
inline double y_l2(double r, double g, double b) {
    return clamp01(std::sqrt(r * r + g * g + b * b + eps) / std::sqrt(3.0));
}
inline double y_mean(double r, double g, double b) { return clamp01((r + g + b) / 3.0); }
inline double y_ycgco(double r, double g, double b) {
    return clamp01(r / 4.0 + g / 2.0 + b / 4.0);
}
inline double cb(double r, double g, double b) {
    return clamp01(-0.168736 * r - 0.331264 * g + 0.5 * b + 0.5);
}
inline double cr(double r, double g, double b) {
    return clamp01(0.5 * r - 0.418688 * g - 0.081312 * b + 0.5);
}
inline double r_norm(double r, double g, double b) { return clamp01(r / (r + g + b + eps)); }
inline double g_norm(double r, double g, double b) { return clamp01(g / (r + g + b + eps)); }
inline double saturation(double r, double g, double b) {
    const double mx = std::max({r, g, b});
    return clamp01((mx - std::min({r, g, b})) / (mx + eps));
}
inline double chroma_u(double r, double g, double b) {
    return clamp01(0.5 + 0.5 * (-0.14713 * r - 0.28886 * g + 0.436 * b) / 0.436);
}
inline double chroma_v(double r, double g, double b) {
    return clamp01(0.5 + 0.5 * (0.615 * r - 0.51499 * g - 0.10001 * b) / 0.615);
}
inline double o1(double r, double g, double b) {
    (void)b;
    return clamp01(0.5 + 0.5 * ((r - g) / std::sqrt(2.0)) * std::sqrt(2.0));
}
inline double o2(double r, double g, double b) {
    return clamp01(0.5 + 0.5 * ((r + g - 2.0 * b) / std::sqrt(6.0)) * (std::sqrt(6.0) / 2.0));
}

using Fn = double (*)(double, double, double);

struct Entry {
    const char* name;
    Fn fn;
};

// Expected stack contents, in the implementation's declared channel order.
inline const std::vector<Entry>& luminance() {
    static const std::vector<Entry> v = {{"y_rec709", y_rec709},
                                         {"y_vmax", y_vmax},
                                         {"y_lightness", y_lightness},
                                         {"y_l2", y_l2}};
    return v;
}
inline const std::vector<Entry>& reflectance() {
    static const std::vector<Entry> v = {{"cb", cb},
                                         {"cr", cr},
                                         {"r_norm", r_norm},
                                         {"g_norm", g_norm},
                                         {"saturation", saturation}};
    return v;
}
inline const std::vector<Entry>& extended() {
    static const std::vector<Entry> v = {{"u", chroma_u}, {"v", chroma_v},
                                         {"o1", o1},      {"o2", o2},
                                         {"y_mean", y_mean}, {"y_ycgco", y_ycgco}};
    return v;
}

// Worst absolute deviation of a computed stack from the oracle formulas.
inline double worst_abs_error(const multinex::Tensor& rgb, const multinex::Tensor& stack,
                              const std::vector<Entry>& expect) {
    double worst = 0.0;
    for (size_t k = 0; k < expect.size(); ++k)
        for (int y = 0; y < rgb.height(); ++y)
            for (int x = 0; x < rgb.width(); ++x) {
                const double want = expect[k].fn(rgb.at(y, x, 0), rgb.at(y, x, 1),
                                                 rgb.at(y, x, 2));
                const double got = stack.at(y, x, static_cast<int>(k));
                worst = std::max(worst, std::abs(got - want));
            }
    return worst;
}

} // namespace guidance_oracle

// ---- Windowed similarity metrics -----------------------------------------------
// Textbook definitions evaluated directly: the window is built non-separably
// and per-window weighted moments use explicit Sigma w*(x - mu)^2 sums (not
// the E[x^2] - mu^2 shortcut the library uses), so agreement is numerical,
// not structural.
namespace metrics_oracle {

constexpr int W = 11;
constexpr double C1 = 0.01 * 0.01;
constexpr double C2 = 0.03 * 0.03;

inline std::vector<double> window() {
    std::vector<double> w(W * W);
    const double sigma = 1.5;
    double total = 0.0;
    for (int i = 0; i < W; ++i)
        for (int j = 0; j < W; ++j) {
            const double dy = i - (W - 1) / 2.0, dx = j - (W - 1) / 2.0;
            w[i * W + j] = std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
            total += w[i * W + j];
        }
    for (auto& v : w) v /= total;
    return w;
}

inline std::vector<double> gray(const multinex::Tensor& rgb) {
    std::vector<double> g(static_cast<size_t>(rgb.height()) * rgb.width());
    for (int y = 0; y < rgb.height(); ++y)
        for (int x = 0; x < rgb.width(); ++x)
            g[y * rgb.width() + x] = 0.2126 * rgb.at(y, x, 0) +
                                     0.7152 * rgb.at(y, x, 1) +
                                     0.0722 * rgb.at(y, x, 2);
    return g;
}

struct WindowStats {
    double l, cs;
};

inline WindowStats stats_at(const std::vector<double>& x, const std::vector<double>& y,
                            int width, int y0, int x0, const std::vector<double>& w) {
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < W; ++i)
        for (int j = 0; j < W; ++j) {
            const double wv = w[i * W + j];
            mx += wv * x[(y0 + i) * width + (x0 + j)];
            my += wv * y[(y0 + i) * width + (x0 + j)];
        }
    double vx = 0.0, vy = 0.0, cov = 0.0;
    for (int i = 0; i < W; ++i)
        for (int j = 0; j < W; ++j) {
            const double wv = w[i * W + j];
            const double dx = x[(y0 + i) * width + (x0 + j)] - mx;
            const double dy = y[(y0 + i) * width + (x0 + j)] - my;
            vx += wv * dx * dx;
            vy += wv * dy * dy;
            cov += wv * dx * dy;
        }
    WindowStats s;
    s.l = (2.0 * mx * my + C1) / (mx * mx + my * my + C1);
    s.cs = (2.0 * cov + C2) / (vx + vy + C2);
    return s;
}

// Mean similarity over valid window positions of a grayscale pair.
inline double ssim_gray(const std::vector<double>& x, const std::vector<double>& y,
                        int height, int width) {
    const auto w = window();
    double acc = 0.0;
    int n = 0;
    for (int y0 = 0; y0 + W <= height; ++y0)
        for (int x0 = 0; x0 + W <= width; ++x0) {
            const WindowStats s = stats_at(x, y, width, y0, x0, w);
            acc += s.l * s.cs;
            ++n;
        }
    return acc / n;
}

inline double mean_cs(const std::vector<double>& x, const std::vector<double>& y,
                      int height, int width) {
    const auto w = window();
    double acc = 0.0;
    int n = 0;
    for (int y0 = 0; y0 + W <= height; ++y0)
        for (int x0 = 0; x0 + W <= width; ++x0) {
            acc += stats_at(x, y, width, y0, x0, w).cs;
            ++n;
        }
    return acc / n;
}

inline std::vector<double> downsample2(const std::vector<double>& img, int height, int width) {
    const int oh = height / 2, ow = width / 2;
    std::vector<double> out(static_cast<size_t>(oh) * ow);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x)
            out[y * ow + x] = (img[(2 * y) * width + 2 * x] +
                               img[(2 * y) * width + 2 * x + 1] +
                               img[(2 * y + 1) * width + 2 * x] +
                               img[(2 * y + 1) * width + 2 * x + 1]) /
                              4.0;
    return out;
}

inline double ms_ssim(const multinex::Tensor& pred, const multinex::Tensor& ref, int scales) {
    static const double base[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
    std::vector<double> wts(base, base + scales);
    double total = 0.0;
    for (double v : wts) total += v;
    if (scales < 5)
        for (double& v : wts) v /= total;

    auto x = gray(pred);
    auto y = gray(ref);
    int h = pred.height(), w = pred.width();
    double result = 1.0;
    for (int m = 0; m < scales; ++m) {
        if (m + 1 < scales) {
            const double cs = std::max(mean_cs(x, y, h, w), 0.0);
            result *= std::pow(cs, wts[m]);
            x = downsample2(x, h, w);
            y = downsample2(y, h, w);
            h /= 2;
            w /= 2;
        } else {
            const double sm = std::max(ssim_gray(x, y, h, w), 0.0);
            result *= std::pow(sm, wts[m]);
        }
    }
    return result;
}

} // namespace metrics_oracle

// ---- Dense linear algebra -------------------------------------------------------
// Gauss-Jordan elimination with partial pivoting, vs the library's Cholesky
// solver. a is n*n row-major, b is n*m row-major; returns the n*m solution.
namespace linalg_oracle {

inline std::vector<double> gauss_jordan_solve(std::vector<double> a, int n,
                                              std::vector<double> b, int m) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (std::abs(a[piv * n + col]) < 1e-14)
            throw std::runtime_error("oracle: singular system");
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
            for (int c = 0; c < m; ++c) std::swap(b[col * m + c], b[piv * m + c]);
        }
        const double d = a[col * n + col];
        for (int c = 0; c < n; ++c) a[col * n + c] /= d;
        for (int c = 0; c < m; ++c) b[col * m + c] /= d;
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r * n + col];
            if (f == 0.0) continue;
            for (int c = 0; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            for (int c = 0; c < m; ++c) b[r * m + c] -= f * b[col * m + c];
        }
    }
    return b;
}

} // namespace linalg_oracle
