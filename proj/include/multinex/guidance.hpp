#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "multinex/tensor.hpp"

namespace multinex::guidance {

// Shared denominator guard; also the epsilon inside the L2 norm.
inline constexpr float kEps = 1e-6f;

// ---- Per-pixel channel definitions ----------------------------------------
// Every channel maps RGB in [0,1] to a value in [0,1]; signed quantities are
// rescaled by their maximum attainable magnitude and recentered at 0.5. A
// final clamp absorbs float rounding at the interval ends.

inline float clamp_unit(float v) { return v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v); }

inline float y_rec709(float r, float g, float b) {
    return clamp_unit(0.2126f * r + 0.7152f * g + 0.0722f * b);
}

inline float y_vmax(float r, float g, float b) {
    return clamp_unit(std::max(r, std::max(g, b)));
}

inline float y_lightness(float r, float g, float b) {
    const float mx = std::max(r, std::max(g, b));
    const float mn = std::min(r, std::min(g, b));
    return clamp_unit(0.5f * (mx + mn));
}

inline float y_l2(float r, float g, float b) {
    return clamp_unit(std::sqrt(r * r + g * g + b * b + kEps) / std::sqrt(3.0f));
}

inline float y_mean(float r, float g, float b) {
    return clamp_unit((r + g + b) / 3.0f);
}

inline float y_ycgco(float r, float g, float b) {
    return clamp_unit(0.25f * r + 0.5f * g + 0.25f * b);
}

inline float chroma_cb(float r, float g, float b) {
    return clamp_unit(-0.168736f * r - 0.331264f * g + 0.5f * b + 0.5f);
}

inline float chroma_cr(float r, float g, float b) {
    return clamp_unit(0.5f * r - 0.418688f * g - 0.081312f * b + 0.5f);
}

inline float r_norm(float r, float g, float b) {
    return clamp_unit(r / (r + g + b + kEps));
}

inline float g_norm(float r, float g, float b) {
    return clamp_unit(g / (r + g + b + kEps));
}

inline float saturation(float r, float g, float b) {
    const float mx = std::max(r, std::max(g, b));
    const float mn = std::min(r, std::min(g, b));
    return clamp_unit((mx - mn) / (mx + kEps));
}

inline float chroma_u(float r, float g, float b) {
    const float raw = -0.14713f * r - 0.28886f * g + 0.43600f * b;
    return clamp_unit(0.5f + 0.5f * raw / 0.436f);
}

inline float chroma_v(float r, float g, float b) {
    const float raw = 0.61500f * r - 0.51499f * g - 0.10001f * b;
    return clamp_unit(0.5f + 0.5f * raw / 0.615f);
}

inline float opponent_o1(float r, float g, float b) {
    (void)b;
    const float raw = (r - g) / std::sqrt(2.0f);
    return clamp_unit(0.5f + 0.5f * raw * std::sqrt(2.0f));
}

inline float opponent_o2(float r, float g, float b) {
    const float raw = (r + g - 2.0f * b) / std::sqrt(6.0f);
    return clamp_unit(0.5f + 0.5f * raw * (std::sqrt(6.0f) / 2.0f));
}

// ---- Stacks ----------------------------------------------------------------

// Luminance guidance, 4 channels: [y_rec709, y_vmax, y_lightness, y_l2].
Tensor luminance_stack(const Tensor& rgb);

// Reflectance guidance, 5 channels: [cb, cr, r_norm, g_norm, saturation].
Tensor reflectance_stack(const Tensor& rgb);

// Extended candidates, 6 channels: [u, v, o1, o2, y_mean, y_ycgco].
Tensor extended_stack(const Tensor& rgb);

std::vector<std::string> luminance_names();
std::vector<std::string> reflectance_names();
std::vector<std::string> extended_names();

// Single named channel; accepts any name from the three lists above.
// Throws std::invalid_argument for unknown names.
Tensor named_descriptor(const Tensor& rgb, const std::string& name);

// Luminance candidate pool for descriptor-importance analysis, in fixed
// order: [y_rec709, y_mean, y_ycgco, y_vmax, y_lightness, y_l2].
std::vector<std::string> luminance_candidates();

// Writes each channel of a stack as an 8-bit grayscale PNG named
// "<dir>/<name>.png". names.size() must equal stack.channels().
void dump_stack(const Tensor& stack, const std::vector<std::string>& names,
                const std::string& dir);

} // namespace multinex::guidance
