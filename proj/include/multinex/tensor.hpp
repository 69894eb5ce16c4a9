#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace multinex {

// Dense row-major image tensor with shape (height, width, channels).
// Index layout: data[(y * width + x) * channels + c].
template <typename T>
class TensorT {
public:
    TensorT() = default;

    TensorT(int h, int w, int c, T fill = T(0)) : h_(h), w_(w), c_(c) {
        if (h < 0 || w < 0 || c < 0)
            throw std::invalid_argument("tensor dims must be non-negative");
        data_.assign(static_cast<size_t>(h) * w * c, fill);
    }

    static TensorT from_data(int h, int w, int c, std::vector<T> v) {
        TensorT t;
        if (v.size() != static_cast<size_t>(h) * w * c)
            throw std::invalid_argument("tensor data size does not match shape");
        t.h_ = h;
        t.w_ = w;
        t.c_ = c;
        t.data_ = std::move(v);
        return t;
    }

    int height() const { return h_; }
    int width() const { return w_; }
    int channels() const { return c_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& vec() { return data_; }
    const std::vector<T>& vec() const { return data_; }

    T& at(int y, int x, int c) { return data_[idx(y, x, c)]; }
    const T& at(int y, int x, int c) const { return data_[idx(y, x, c)]; }
    T& operator[](size_t i) { return data_[i]; }
    const T& operator[](size_t i) const { return data_[i]; }

    bool same_shape(const TensorT& o) const {
        return h_ == o.h_ && w_ == o.w_ && c_ == o.c_;
    }

    std::string shape_str() const {
        return "(" + std::to_string(h_) + "," + std::to_string(w_) + "," +
               std::to_string(c_) + ")";
    }

    template <typename U>
    TensorT<U> cast() const {
        TensorT<U> out(h_, w_, c_);
        for (size_t i = 0; i < data_.size(); ++i)
            out[i] = static_cast<U>(data_[i]);
        return out;
    }

private:
    size_t idx(int y, int x, int c) const {
        return (static_cast<size_t>(y) * w_ + x) * c_ + c;
    }

    int h_ = 0, w_ = 0, c_ = 0;
    std::vector<T> data_;
};

using Tensor = TensorT<float>;
using Tensor64 = TensorT<double>;

namespace detail {

inline int broadcast_dim(int a, int b, const char* what) {
    if (a == b) return a;
    if (a == 1) return b;
    if (b == 1) return a;
    throw std::invalid_argument(std::string("cannot broadcast ") + what + " dims " +
                                std::to_string(a) + " vs " + std::to_string(b));
}

} // namespace detail

// Elementwise binary op with numpy-style broadcasting restricted to dims that
// are equal or 1. Output shape is the per-dim maximum.
template <typename T, typename F>
TensorT<T> broadcast_zip(const TensorT<T>& a, const TensorT<T>& b, F op) {
    const int h = detail::broadcast_dim(a.height(), b.height(), "height");
    const int w = detail::broadcast_dim(a.width(), b.width(), "width");
    const int c = detail::broadcast_dim(a.channels(), b.channels(), "channel");
    TensorT<T> out(h, w, c);
    const int ah = a.height() == 1 ? 0 : 1, aw = a.width() == 1 ? 0 : 1,
              ac = a.channels() == 1 ? 0 : 1;
    const int bh = b.height() == 1 ? 0 : 1, bw = b.width() == 1 ? 0 : 1,
              bc = b.channels() == 1 ? 0 : 1;
    size_t i = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int k = 0; k < c; ++k, ++i)
                out[i] = op(a.at(y * ah, x * aw, k * ac), b.at(y * bh, x * bw, k * bc));
    return out;
}

template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
    return broadcast_zip(a, b, [](T x, T y) { return x + y; });
}
template <typename T>
TensorT<T> sub(const TensorT<T>& a, const TensorT<T>& b) {
    return broadcast_zip(a, b, [](T x, T y) { return x - y; });
}
template <typename T>
TensorT<T> mul(const TensorT<T>& a, const TensorT<T>& b) {
    return broadcast_zip(a, b, [](T x, T y) { return x * y; });
}
template <typename T>
TensorT<T> div(const TensorT<T>& a, const TensorT<T>& b) {
    return broadcast_zip(a, b, [](T x, T y) { return x / y; });
}

template <typename T, typename F>
TensorT<T> map(const TensorT<T>& a, F op) {
    TensorT<T> out(a.height(), a.width(), a.channels());
    for (size_t i = 0; i < a.size(); ++i) out[i] = op(a[i]);
    return out;
}

template <typename T>
TensorT<T> scale(const TensorT<T>& a, T s) {
    return map(a, [s](T x) { return x * s; });
}

template <typename T>
TensorT<T> clamp01(const TensorT<T>& a) {
    return map(a, [](T x) { return std::clamp(x, T(0), T(1)); });
}

template <typename T>
T sum(const TensorT<T>& a) {
    T s = T(0);
    for (size_t i = 0; i < a.size(); ++i) s += a[i];
    return s;
}

template <typename T>
T mean(const TensorT<T>& a) {
    if (a.empty()) throw std::invalid_argument("mean of empty tensor");
    return sum(a) / static_cast<T>(a.size());
}

template <typename T>
T min_value(const TensorT<T>& a) {
    return *std::min_element(a.vec().begin(), a.vec().end());
}

template <typename T>
T max_value(const TensorT<T>& a) {
    return *std::max_element(a.vec().begin(), a.vec().end());
}

// Stacks single tensors along the channel axis; all inputs must share (h, w).
template <typename T>
TensorT<T> concat_channels(const std::vector<TensorT<T>>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_channels: no inputs");
    const int h = parts[0].height(), w = parts[0].width();
    int c = 0;
    for (const auto& p : parts) {
        if (p.height() != h || p.width() != w)
            throw std::invalid_argument("concat_channels: spatial shape mismatch " +
                                        parts[0].shape_str() + " vs " + p.shape_str());
        c += p.channels();
    }
    TensorT<T> out(h, w, c);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int k = 0;
            for (const auto& p : parts)
                for (int pc = 0; pc < p.channels(); ++pc)
                    out.at(y, x, k++) = p.at(y, x, pc);
        }
    return out;
}

template <typename T>
TensorT<T> slice_channel(const TensorT<T>& t, int c) {
    if (c < 0 || c >= t.channels())
        throw std::invalid_argument("slice_channel: index " + std::to_string(c) +
                                    " out of range for " + t.shape_str());
    TensorT<T> out(t.height(), t.width(), 1);
    for (int y = 0; y < t.height(); ++y)
        for (int x = 0; x < t.width(); ++x) out.at(y, x, 0) = t.at(y, x, c);
    return out;
}

// Crops a (y0, x0)-anchored window; the window must lie fully inside.
template <typename T>
TensorT<T> crop(const TensorT<T>& t, int y0, int x0, int ch, int cw) {
    if (y0 < 0 || x0 < 0 || y0 + ch > t.height() || x0 + cw > t.width())
        throw std::invalid_argument("crop window out of bounds for " + t.shape_str());
    TensorT<T> out(ch, cw, t.channels());
    for (int y = 0; y < ch; ++y)
        for (int x = 0; x < cw; ++x)
            for (int c = 0; c < t.channels(); ++c)
                out.at(y, x, c) = t.at(y0 + y, x0 + x, c);
    return out;
}

template <typename T>
TensorT<T> flip_horizontal(const TensorT<T>& t) {
    TensorT<T> out(t.height(), t.width(), t.channels());
    for (int y = 0; y < t.height(); ++y)
        for (int x = 0; x < t.width(); ++x)
            for (int c = 0; c < t.channels(); ++c)
                out.at(y, t.width() - 1 - x, c) = t.at(y, x, c);
    return out;
}

template <typename T>
TensorT<T> flip_vertical(const TensorT<T>& t) {
    TensorT<T> out(t.height(), t.width(), t.channels());
    for (int y = 0; y < t.height(); ++y)
        for (int x = 0; x < t.width(); ++x)
            for (int c = 0; c < t.channels(); ++c)
                out.at(t.height() - 1 - y, x, c) = t.at(y, x, c);
    return out;
}

template <typename T>
TensorT<T> rotate90_once(const TensorT<T>& t) {
    TensorT<T> out(t.width(), t.height(), t.channels());
    for (int y = 0; y < t.height(); ++y)
        for (int x = 0; x < t.width(); ++x)
            for (int c = 0; c < t.channels(); ++c)
                out.at(t.width() - 1 - x, y, c) = t.at(y, x, c);
    return out;
}

// Rotates by k * 90 degrees counter-clockwise.
template <typename T>
TensorT<T> rotate90(const TensorT<T>& t, int k) {
    k = ((k % 4) + 4) % 4;
    if (k == 0) return t;
    TensorT<T> out = rotate90_once(t);
    for (int i = 1; i < k; ++i) out = rotate90_once(out);
    return out;
}

} // namespace multinex
