#pragma once

// Shared fixtures for the test suites: deterministic random images, synthetic
// paired low/high-exposure data, and self-cleaning temp directories.

#include <cmath>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "multinex/image_io.hpp"
#include "multinex/rng.hpp"
#include "multinex/tensor.hpp"

namespace testsupport {

using multinex::Rng;
using multinex::Tensor;
using multinex::Tensor64;

// Uniform random image with values in [0, 1).
inline Tensor random_image(int h, int w, int c, Rng& rng) {
    Tensor t(h, w, c);
    for (size_t i = 0; i < t.size(); ++i)
        t[i] = static_cast<float>(rng.uniform());
    return t;
}

inline Tensor64 random_image64(int h, int w, int c, Rng& rng) {
    Tensor64 t(h, w, c);
    for (size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform();
    return t;
}

// Smooth positive field in [lo, hi]: a sum of random low-frequency sinusoids
// rescaled to the requested range. Deterministic given the generator state.
inline Tensor smooth_field(int h, int w, float lo, float hi, Rng& rng, int waves = 3) {
    struct Wave {
        double phase, fx, fy;
    };
    std::vector<Wave> ws;
    for (int i = 0; i < waves; ++i)
        ws.push_back({rng.uniform(0.0, 2.0 * M_PI), rng.uniform(0.02, 0.12),
                      rng.uniform(0.02, 0.12)});
    Tensor t(h, w, 1);
    double mn = 1e30, mx = -1e30;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (const auto& wv : ws) s += std::sin(wv.phase + wv.fx * x + wv.fy * y);
            s /= waves;
            t.at(y, x, 0) = static_cast<float>(s);
            mn = std::min(mn, s);
            mx = std::max(mx, s);
        }
    const double span = mx - mn + 1e-12;
    for (size_t i = 0; i < t.size(); ++i)
        t[i] = lo + (hi - lo) * static_cast<float>((t[i] - mn) / span);
    return t;
}

// One synthetic exposure pair: a smooth colorful scene and the same scene
// dimmed by a smooth illumination field in [alpha_lo, alpha_hi].
struct ExposurePair {
    Tensor low, high;
};

inline ExposurePair exposure_pair(int h, int w, Rng& rng, float alpha_lo = 0.15f,
                                  float alpha_hi = 0.35f) {
    const Tensor r = smooth_field(h, w, 0.1f, 0.9f, rng);
    const Tensor g = smooth_field(h, w, 0.1f, 0.9f, rng);
    const Tensor b = smooth_field(h, w, 0.1f, 0.9f, rng);
    const Tensor alpha = smooth_field(h, w, alpha_lo, alpha_hi, rng, 2);
    ExposurePair p{Tensor(h, w, 3), Tensor(h, w, 3)};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const float a = alpha.at(y, x, 0);
            const float px[3] = {r.at(y, x, 0), g.at(y, x, 0), b.at(y, x, 0)};
            for (int c = 0; c < 3; ++c) {
                p.high.at(y, x, c) = px[c];
                p.low.at(y, x, c) = px[c] * a;
            }
        }
    return p;
}

// Same-scene pair dimmed by one constant factor everywhere.
inline ExposurePair constant_ratio_pair(int h, int w, Rng& rng, float alpha) {
    ExposurePair p = exposure_pair(h, w, rng, alpha, alpha);
    for (size_t i = 0; i < p.low.size(); ++i)
        p.low[i] = p.high[i] * alpha;
    return p;
}

// Unique temp directory, removed (recursively) on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        namespace fs = std::filesystem;
        const auto base = fs::temp_directory_path();
        for (int i = 0;; ++i) {
            fs::path p = base / (tag + "_" + std::to_string(i));
            std::error_code ec;
            if (fs::create_directory(p, ec)) {
                path_ = p.string();
                break;
            }
            if (i > 10000) throw std::runtime_error("cannot create temp dir for " + tag);
        }
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::string& path() const { return path_; }
    std::string file(const std::string& name) const { return path_ + "/" + name; }

private:
    std::string path_;
};

// Writes n generated pairs as <root>/low/*.png and <root>/high/*.png.
inline void write_pair_tree(const std::string& root, int n, int h, int w, Rng& rng,
                            float alpha_lo = 0.15f, float alpha_hi = 0.35f) {
    namespace fs = std::filesystem;
    fs::create_directories(root + "/low");
    fs::create_directories(root + "/high");
    for (int i = 0; i < n; ++i) {
        const ExposurePair p = exposure_pair(h, w, rng, alpha_lo, alpha_hi);
        char name[32];
        std::snprintf(name, sizeof(name), "img%03d.png", i);
        multinex::save_image(root + "/low/" + name, p.low);
        multinex::save_image(root + "/high/" + name, p.high);
    }
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
    return m;
}

inline double max_abs_diff64(const Tensor64& a, const Tensor64& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline bool bit_identical(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

} // namespace testsupport
