#include "multinex/nn.hpp"

#include <cmath>

#include "multinex/guidance.hpp"
#include "multinex/rng.hpp"

namespace multinex::nn {
namespace {

// ---- Registry walk ----------------------------------------------------------

enum class Kind { ConvWeight, ConvBias, DwWeight, LnScale, LnShift, Bottleneck };

struct Slot {
    std::string name;
    Tensor* tensor;
    Kind kind;
    int fan_in;
    bool zero_init;
};

using SlotFn = std::function<void(const Slot&)>;

void walk_conv(const std::string& name, Conv1x1& c, const SlotFn& fn, bool zero = false) {
    fn({name + ".weight", &c.weight, Kind::ConvWeight, c.in_ch, zero});
    if (c.has_bias) fn({name + ".bias", &c.bias, Kind::ConvBias, c.in_ch, zero});
}

void walk_msef(const std::string& name, Msef& m, const SlotFn& fn) {
    fn({name + ".ln.scale", &m.ln.scale, Kind::LnScale, 0, false});
    fn({name + ".ln.shift", &m.ln.shift, Kind::LnShift, 0, false});
    fn({name + ".dw.weight", &m.dw.weight, Kind::DwWeight, m.dw.k * m.dw.k, false});
    fn({name + ".w1", &m.w1, Kind::Bottleneck, m.ch, false});
    fn({name + ".w2", &m.w2, Kind::Bottleneck, m.hidden, false});
}

void walk_fb(const std::string& name, FusionBlock& fb, const SlotFn& fn) {
    if (fb.has_pre_msef) walk_msef(name + ".msef_pre", fb.msef_pre, fn);
    fn({name + ".dsconv.dw.weight", &fb.ds.dw.weight, Kind::DwWeight,
        fb.ds.dw.k * fb.ds.dw.k, false});
    walk_conv(name + ".dsconv.pw", fb.ds.pw, fn);
    walk_msef(name + ".msef_post", fb.msef_post, fn);
}

// zero_out marks the branch's final projection for zero initialization.
// Exactly one branch (luminance) is zeroed: that already makes the residual
// product vanish, so the model starts as an identity map, while the other
// factor stays non-zero and keeps the product's gradient alive. Zeroing both
// would park the optimizer on a saddle point it can never leave (each
// factor's gradient is scaled by the other factor, which would be zero).
void walk_branch(const std::string& b, Branch& br, const SlotFn& fn, bool zero_out) {
    walk_conv(b + ".proj_in", br.proj_in, fn);
    for (size_t t = 0; t < br.pre.size(); ++t)
        walk_fb(b + ".pre_fb" + std::to_string(t), br.pre[t], fn);
    fn({b + ".cwa.dw.weight", &br.cwa.dw.weight, Kind::DwWeight,
        br.cwa.dw.k * br.cwa.dw.k, false});
    walk_conv(b + ".cwa.proj", br.cwa.proj, fn);
    for (size_t t = 0; t < br.post.size(); ++t)
        walk_fb(b + ".post_fb" + std::to_string(t), br.post[t], fn);
    walk_conv(b + ".proj_out", br.proj_out, fn, zero_out);
}

void walk(ModelParams& p, const SlotFn& fn) {
    walk_branch("lum", p.lum, fn, /*zero_out=*/true);
    walk_branch("refl", p.refl, fn, /*zero_out=*/false);
}

// ---- Allocation -------------------------------------------------------------

Conv1x1 alloc_conv(int in_ch, int out_ch, bool has_bias) {
    Conv1x1 c;
    c.in_ch = in_ch;
    c.out_ch = out_ch;
    c.has_bias = has_bias;
    c.weight = Tensor(out_ch, in_ch, 1);
    if (has_bias) c.bias = Tensor(1, 1, out_ch);
    return c;
}

DwConv alloc_dw(int k, int ch) {
    DwConv d;
    d.k = k;
    d.ch = ch;
    d.weight = Tensor(k, k, ch);
    return d;
}

Msef alloc_msef(int ch, int hidden) {
    Msef m;
    m.ch = ch;
    m.hidden = hidden;
    m.ln.ch = ch;
    m.ln.scale = Tensor(1, 1, ch);
    m.ln.shift = Tensor(1, 1, ch);
    m.dw = alloc_dw(3, ch);
    m.w1 = Tensor(hidden, ch, 1);
    m.w2 = Tensor(ch, hidden, 1);
    return m;
}

FusionBlock alloc_fb(int ch, int hidden, bool simplified) {
    FusionBlock fb;
    fb.has_pre_msef = !simplified;
    if (fb.has_pre_msef) fb.msef_pre = alloc_msef(ch, hidden);
    fb.ds.dw = alloc_dw(3, ch);
    fb.ds.pw = alloc_conv(ch, ch, true);
    fb.msef_post = alloc_msef(ch, hidden);
    return fb;
}

Branch alloc_branch(const VariantConfig& cfg, int stack_ch, int out_ch) {
    Branch br;
    br.proj_in = alloc_conv(stack_ch, cfg.channels, true);
    if (!cfg.simplified)
        for (int t = 0; t < cfg.blocks; ++t)
            br.pre.push_back(alloc_fb(cfg.channels, cfg.hidden, cfg.simplified));
    br.cwa.dw = alloc_dw(7, stack_ch);
    br.cwa.proj = alloc_conv(stack_ch, cfg.channels, false);
    for (int t = 0; t < cfg.blocks; ++t)
        br.post.push_back(alloc_fb(cfg.channels, cfg.hidden, cfg.simplified));
    br.proj_out = alloc_conv(cfg.channels, out_ch, true);
    return br;
}

} // namespace

// ---- Float-path math ----------------------------------------------------------

Tensor conv1x1_forward(const Conv1x1& c, const Tensor& x) {
    Tensor out(x.height(), x.width(), c.out_ch);
    const float* w = c.weight.data();
    for (int y = 0; y < x.height(); ++y)
        for (int xx = 0; xx < x.width(); ++xx) {
            const float* px = &x.at(y, xx, 0);
            float* po = &out.at(y, xx, 0);
            for (int o = 0; o < c.out_ch; ++o) {
                float acc = c.has_bias ? c.bias[o] : 0.0f;
                const float* wr = w + static_cast<size_t>(o) * c.in_ch;
                for (int i = 0; i < c.in_ch; ++i) acc += wr[i] * px[i];
                po[o] = acc;
            }
        }
    return out;
}

Tensor dwconv_forward(const DwConv& d, const Tensor& x) {
    const int p = d.k / 2;
    Tensor out(x.height(), x.width(), x.channels());
    for (int y = 0; y < x.height(); ++y)
        for (int xx = 0; xx < x.width(); ++xx)
            for (int c = 0; c < x.channels(); ++c) {
                float acc = 0.0f;
                for (int dy = 0; dy < d.k; ++dy) {
                    const int sy = y + dy - p;
                    if (sy < 0 || sy >= x.height()) continue;
                    for (int dx = 0; dx < d.k; ++dx) {
                        const int sx = xx + dx - p;
                        if (sx < 0 || sx >= x.width()) continue;
                        acc += d.weight.at(dy, dx, c) * x.at(sy, sx, c);
                    }
                }
                out.at(y, xx, c) = acc;
            }
    return out;
}

Tensor layer_norm_forward(const LayerNormP& ln, const Tensor& x) {
    constexpr float eps = 1e-5f;
    const int C = x.channels();
    Tensor out(x.height(), x.width(), C);
    for (int y = 0; y < x.height(); ++y)
        for (int xx = 0; xx < x.width(); ++xx) {
            const float* px = &x.at(y, xx, 0);
            float mu = 0.0f;
            for (int c = 0; c < C; ++c) mu += px[c];
            mu /= static_cast<float>(C);
            float var = 0.0f;
            for (int c = 0; c < C; ++c) var += (px[c] - mu) * (px[c] - mu);
            var /= static_cast<float>(C);
            const float inv = 1.0f / std::sqrt(var + eps);
            float* po = &out.at(y, xx, 0);
            for (int c = 0; c < C; ++c)
                po[c] = ln.scale[c] * ((px[c] - mu) * inv) + ln.shift[c];
        }
    return out;
}

Tensor msef_forward(const Msef& m, const Tensor& x) {
    const Tensor ln = layer_norm_forward(m.ln, x);
    // Channel gate from globally pooled, normalized features.
    const int C = m.ch;
    std::vector<float> g(C, 0.0f);
    for (int y = 0; y < ln.height(); ++y)
        for (int xx = 0; xx < ln.width(); ++xx)
            for (int c = 0; c < C; ++c) g[c] += ln.at(y, xx, c);
    const float npix = static_cast<float>(ln.height()) * ln.width();
    for (int c = 0; c < C; ++c) g[c] /= npix;

    std::vector<float> h(m.hidden, 0.0f);
    for (int o = 0; o < m.hidden; ++o) {
        float acc = 0.0f;
        for (int i = 0; i < C; ++i) acc += m.w1.at(o, i, 0) * g[i];
        h[o] = std::max(acc, 0.0f);
    }
    std::vector<float> w(C, 0.0f);
    for (int o = 0; o < C; ++o) {
        float acc = 0.0f;
        for (int i = 0; i < m.hidden; ++i) acc += m.w2.at(o, i, 0) * h[i];
        w[o] = std::tanh(acc);
    }

    const Tensor d3 = dwconv_forward(m.dw, ln);
    Tensor out(x.height(), x.width(), C);
    for (int y = 0; y < x.height(); ++y)
        for (int xx = 0; xx < x.width(); ++xx)
            for (int c = 0; c < C; ++c)
                out.at(y, xx, c) =
                    x.at(y, xx, c) + d3.at(y, xx, c) * (w[c] * ln.at(y, xx, c));
    return out;
}

Tensor fusion_block_forward(const FusionBlock& fb, const Tensor& x) {
    Tensor h = fb.has_pre_msef ? msef_forward(fb.msef_pre, x) : x;
    h = conv1x1_forward(fb.ds.pw, dwconv_forward(fb.ds.dw, h));
    h = map(h, [](float v) { return std::max(v, 0.0f); });
    return msef_forward(fb.msef_post, h);
}

Tensor cwa_forward(const Cwa& cwa, const Tensor& stack) {
    Tensor a = conv1x1_forward(cwa.proj, dwconv_forward(cwa.dw, stack));
    return map(a, [](float v) { return 1.0f / (1.0f + std::exp(-v)); });
}

namespace {

// ---- MAC accounting -----------------------------------------------------------

void macs_msef(const std::string& name, const VariantConfig& cfg, int64_t hw,
               std::vector<LayerCount>& out) {
    out.push_back({name + ".dw", 9LL * cfg.channels * hw});
    out.push_back({name + ".w1", static_cast<int64_t>(cfg.hidden) * cfg.channels});
    out.push_back({name + ".w2", static_cast<int64_t>(cfg.channels) * cfg.hidden});
}

void macs_fb(const std::string& name, const VariantConfig& cfg, int64_t hw,
             std::vector<LayerCount>& out) {
    if (!cfg.simplified) macs_msef(name + ".msef_pre", cfg, hw, out);
    out.push_back({name + ".dsconv.dw", 9LL * cfg.channels * hw});
    out.push_back({name + ".dsconv.pw",
                   static_cast<int64_t>(cfg.channels) * cfg.channels * hw});
    macs_msef(name + ".msef_post", cfg, hw, out);
}

void macs_branch(const std::string& b, const VariantConfig& cfg, int stack_ch,
                 int out_ch, int64_t hw, std::vector<LayerCount>& out) {
    out.push_back({b + ".proj_in", static_cast<int64_t>(stack_ch) * cfg.channels * hw});
    if (!cfg.simplified)
        for (int t = 0; t < cfg.blocks; ++t)
            macs_fb(b + ".pre_fb" + std::to_string(t), cfg, hw, out);
    out.push_back({b + ".cwa.dw", 49LL * stack_ch * hw});
    out.push_back({b + ".cwa.proj", static_cast<int64_t>(stack_ch) * cfg.channels * hw});
    for (int t = 0; t < cfg.blocks; ++t)
        macs_fb(b + ".post_fb" + std::to_string(t), cfg, hw, out);
    out.push_back({b + ".proj_out", static_cast<int64_t>(cfg.channels) * out_ch * hw});
}

} // namespace

VariantConfig VariantConfig::lightweight() {
    VariantConfig cfg;
    cfg.name = "lightweight";
    cfg.channels = 39;
    cfg.blocks = 3;
    cfg.hidden = 5;
    cfg.simplified = false;
    return cfg;
}

VariantConfig VariantConfig::nano() {
    VariantConfig cfg;
    cfg.name = "nano";
    cfg.channels = 4;
    cfg.blocks = 1;
    cfg.hidden = 1;
    cfg.simplified = true;
    return cfg;
}

VariantConfig VariantConfig::by_name(const std::string& name) {
    if (name == "lightweight") return lightweight();
    if (name == "nano") return nano();
    throw std::invalid_argument("unknown variant '" + name +
                                "' (expected lightweight or nano)");
}

void for_each_param(ModelParams& p, const ParamVisitor& fn) {
    walk(p, [&](const Slot& s) { fn(s.name, *s.tensor); });
}

void for_each_param(const ModelParams& p, const ConstParamVisitor& fn) {
    walk(const_cast<ModelParams&>(p), [&](const Slot& s) { fn(s.name, *s.tensor); });
}

ModelParams make_params(const VariantConfig& cfg) {
    if (cfg.channels < 1 || cfg.blocks < 1 || cfg.hidden < 1)
        throw std::invalid_argument("variant config must have positive sizes");
    ModelParams p;
    p.cfg = cfg;
    p.lum = alloc_branch(cfg, kLumStackChannels, 1);
    p.refl = alloc_branch(cfg, kReflStackChannels, 3);
    return p;
}

ModelParams init_params(const VariantConfig& cfg, uint64_t seed) {
    ModelParams p = make_params(cfg);
    Rng rng(seed);
    walk(p, [&](const Slot& s) {
        Tensor& t = *s.tensor;
        if (s.zero_init) return;  // final projections stay zero: identity at init
        switch (s.kind) {
            case Kind::LnScale:
                for (size_t i = 0; i < t.size(); ++i) t[i] = 1.0f;
                break;
            case Kind::LnShift:
                break;  // zero
            default: {
                const double bound = std::sqrt(1.0 / static_cast<double>(s.fan_in));
                for (size_t i = 0; i < t.size(); ++i)
                    t[i] = static_cast<float>(rng.uniform(-bound, bound));
            }
        }
    });
    return p;
}

Tensor branch_forward(const Branch& br, const Tensor& stack) {
    Tensor x = conv1x1_forward(br.proj_in, stack);
    for (const auto& fb : br.pre) x = fusion_block_forward(fb, x);
    const Tensor a = cwa_forward(br.cwa, stack);
    Tensor h = mul(a, x);
    for (const auto& fb : br.post) h = fusion_block_forward(fb, h);
    return conv1x1_forward(br.proj_out, h);
}

EnhanceResult enhance(const ModelParams& p, const Tensor& rgb) {
    if (rgb.channels() != 3)
        throw std::invalid_argument("enhance expects RGB input, got " + rgb.shape_str());
    EnhanceResult r;
    r.delta_l = branch_forward(p.lum, guidance::luminance_stack(rgb));
    r.delta_r = branch_forward(p.refl, guidance::reflectance_stack(rgb));
    r.enhanced = clamp01(add(rgb, mul(r.delta_l, r.delta_r)));
    return r;
}

std::vector<LayerCount> count_params(const VariantConfig& cfg) {
    ModelParams p = make_params(cfg);
    std::vector<LayerCount> out;
    walk(p, [&](const Slot& s) {
        out.push_back({s.name, static_cast<int64_t>(s.tensor->size())});
    });
    return out;
}

int64_t total_params(const VariantConfig& cfg) {
    int64_t total = 0;
    for (const auto& l : count_params(cfg)) total += l.count;
    return total;
}

std::vector<LayerCount> count_macs(const VariantConfig& cfg, int h, int w) {
    if (h < 1 || w < 1) throw std::invalid_argument("resolution must be positive");
    const int64_t hw = static_cast<int64_t>(h) * w;
    std::vector<LayerCount> out;
    macs_branch("lum", cfg, kLumStackChannels, 1, hw, out);
    macs_branch("refl", cfg, kReflStackChannels, 3, hw, out);
    return out;
}

int64_t total_macs(const VariantConfig& cfg, int h, int w) {
    int64_t total = 0;
    for (const auto& l : count_macs(cfg, h, w)) total += l.count;
    return total;
}

double gflops(const VariantConfig& cfg, int h, int w) {
    return 2.0 * static_cast<double>(total_macs(cfg, h, w)) / 1e9;
}

} // namespace multinex::nn
