#include "multinex/train.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#include "multinex/checkpoint.hpp"
#include "multinex/guidance.hpp"
#include "multinex/kernels.hpp"
#include "multinex/optim.hpp"

namespace multinex::train {
namespace {

using tape::Tape;

Tape::Id pid(const ModelBinding& b, const std::string& name) {
    const auto it = b.ids.find(name);
    if (it == b.ids.end())
        throw std::logic_error("unbound parameter '" + name + "'");
    return it->second;
}

Tape::Id msef_graph(Tape& tp, const ModelBinding& b, const std::string& prefix,
                    Tape::Id x) {
    const Tape::Id ln =
        tp.layer_norm(x, pid(b, prefix + ".ln.scale"), pid(b, prefix + ".ln.shift"));
    const Tape::Id g = tp.gap(ln);
    const Tape::Id h = tp.relu(tp.conv1x1(g, pid(b, prefix + ".w1")));
    const Tape::Id wch = tp.tanh(tp.conv1x1(h, pid(b, prefix + ".w2")));
    const Tape::Id z = tp.mul(wch, ln);
    const Tape::Id d3 = tp.dwconv(ln, pid(b, prefix + ".dw.weight"));
    return tp.add(x, tp.mul(d3, z));
}

Tape::Id fb_graph(Tape& tp, const ModelBinding& b, const std::string& prefix,
                  Tape::Id x, bool has_pre) {
    Tape::Id h = has_pre ? msef_graph(tp, b, prefix + ".msef_pre", x) : x;
    h = tp.conv1x1(tp.dwconv(h, pid(b, prefix + ".dsconv.dw.weight")),
                   pid(b, prefix + ".dsconv.pw.weight"),
                   pid(b, prefix + ".dsconv.pw.bias"));
    h = tp.relu(h);
    return msef_graph(tp, b, prefix + ".msef_post", h);
}

Tape::Id branch_graph(Tape& tp, const ModelBinding& b, const nn::VariantConfig& cfg,
                      const std::string& bname, const Tensor& stack) {
    const Tape::Id s = tp.input(stack.cast<double>());
    Tape::Id x = tp.conv1x1(s, pid(b, bname + ".proj_in.weight"),
                            pid(b, bname + ".proj_in.bias"));
    if (!cfg.simplified)
        for (int t = 0; t < cfg.blocks; ++t)
            x = fb_graph(tp, b, bname + ".pre_fb" + std::to_string(t), x, true);
    const Tape::Id a = tp.sigmoid(tp.conv1x1(
        tp.dwconv(s, pid(b, bname + ".cwa.dw.weight")), pid(b, bname + ".cwa.proj.weight")));
    Tape::Id h = tp.mul(a, x);
    for (int t = 0; t < cfg.blocks; ++t)
        h = fb_graph(tp, b, bname + ".post_fb" + std::to_string(t), h, !cfg.simplified);
    return tp.conv1x1(h, pid(b, bname + ".proj_out.weight"),
                      pid(b, bname + ".proj_out.bias"));
}

} // namespace

ParamSet64 to_double(const nn::ModelParams& params) {
    ParamSet64 out;
    nn::for_each_param(params, [&](const std::string& name, const Tensor& t) {
        out[name] = t.cast<double>();
    });
    return out;
}

ModelBinding bind_params(Tape& tp, const ParamSet64& params) {
    ModelBinding b;
    for (const auto& [name, value] : params) b.ids[name] = tp.param(name, value);
    return b;
}

Tape::Id enhance_graph(Tape& tp, const ModelBinding& b, const nn::VariantConfig& cfg,
                       const Tensor& low_rgb) {
    const Tape::Id low = tp.input(low_rgb.cast<double>());
    const Tape::Id dl = branch_graph(tp, b, cfg, "lum", guidance::luminance_stack(low_rgb));
    const Tape::Id dr =
        branch_graph(tp, b, cfg, "refl", guidance::reflectance_stack(low_rgb));
    return tp.add(low, tp.mul(dl, dr));
}

LossIds loss_graph(Tape& tp, Tape::Id pred, const Tensor& target,
                   const loss::LossWeights& w) {
    const Tape::Id tgt = tp.input(target.cast<double>());

    const Tape::Id d = tp.sub(pred, tgt);
    const Tape::Id mse = tp.reduce_mean(tp.mul(d, d));

    const Tensor64& pv = tp.value(pred);
    const int scales = loss::auto_scales(pv.height(), pv.width());

    Tape::Id ms_loss;
    if (scales == 0) {
        ms_loss = tp.input(Tensor64(1, 1, 1));
    } else {
        const std::vector<double> wts = kernels::msssim_weights(scales);
        Tape::Id x = tp.luma_rec709(pred);
        Tape::Id y = tp.luma_rec709(tgt);
        Tape::Id acc = Tape::kNone;
        for (int m = 0; m < scales; ++m) {
            const Tape::Id mu_x = tp.gaussian11_valid(x);
            const Tape::Id mu_y = tp.gaussian11_valid(y);
            const Tape::Id gxx = tp.gaussian11_valid(tp.mul(x, x));
            const Tape::Id gyy = tp.gaussian11_valid(tp.mul(y, y));
            const Tape::Id gxy = tp.gaussian11_valid(tp.mul(x, y));
            const Tape::Id mxx = tp.mul(mu_x, mu_x);
            const Tape::Id myy = tp.mul(mu_y, mu_y);
            const Tape::Id mxy = tp.mul(mu_x, mu_y);
            const Tape::Id sxx = tp.sub(gxx, mxx);
            const Tape::Id syy = tp.sub(gyy, myy);
            const Tape::Id sxy = tp.sub(gxy, mxy);
            const Tape::Id cs_map = tp.div(tp.offset(tp.scale(sxy, 2.0), kernels::kC2),
                                           tp.offset(tp.add(sxx, syy), kernels::kC2));
            Tape::Id factor;
            if (m + 1 < scales) {
                factor = tp.pow(tp.relu(tp.reduce_mean(cs_map)), wts[m]);
                x = tp.avgpool2(x);
                y = tp.avgpool2(y);
            } else {
                const Tape::Id l_map =
                    tp.div(tp.offset(tp.scale(mxy, 2.0), kernels::kC1),
                           tp.offset(tp.add(mxx, myy), kernels::kC1));
                factor = tp.pow(tp.relu(tp.reduce_mean(tp.mul(l_map, cs_map))), wts[m]);
            }
            acc = (m == 0) ? factor : tp.mul(acc, factor);
        }
        ms_loss = tp.offset(tp.scale(acc, -1.0), 1.0);  // 1 - similarity
    }

    LossIds ids;
    ids.mse = mse;
    ids.msssim = ms_loss;
    ids.total = tp.add(tp.scale(mse, w.mse), tp.scale(ms_loss, w.msssim));
    return ids;
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(path + ": cannot open for writing");
    f << "iter,lr,total,mse,msssim,perceptual\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.iter,
                      r.lr, r.total, r.mse, r.msssim, r.perceptual);
        f << buf;
    }
    if (!f) throw std::runtime_error(path + ": write failed");
}

TrainResult fit(const data::PairedDataset& ds, const nn::VariantConfig& variant,
                const TrainConfig& cfg, const std::string& out_dir) {
    if (ds.size() == 0) throw std::invalid_argument("training needs a non-empty dataset");
    if (cfg.iterations < 0 || cfg.batch < 1 || cfg.patch < 1)
        throw std::invalid_argument("invalid training config");

    TrainResult res;
    res.params = nn::init_params(variant, cfg.seed);
    // Patch sampling uses its own stream so init draws stay independent.
    Rng rng(cfg.seed + 1);
    optim::AdamState adam;

    std::unordered_map<size_t, std::pair<Tensor, Tensor>> cache;
    const auto pair_at = [&](size_t i) -> const std::pair<Tensor, Tensor>& {
        auto it = cache.find(i);
        if (it == cache.end()) it = cache.emplace(i, ds.load(i)).first;
        return it->second;
    };

    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

    for (int t = 0; t < cfg.iterations; ++t) {
        const double lr = optim::cosine_lr(t, cfg.iterations, cfg.lr_start, cfg.lr_end);

        Tape tp;
        const ModelBinding binding = bind_params(tp, to_double(res.params));

        Tape::Id total_acc = Tape::kNone, mse_acc = Tape::kNone, ms_acc = Tape::kNone;
        for (int i = 0; i < cfg.batch; ++i) {
            const size_t idx = static_cast<size_t>(
                rng.uniform_int(0, static_cast<int>(ds.size()) - 1));
            const auto& [low, high] = pair_at(idx);
            const data::SamplePatch s =
                data::sample_patch(low, high, cfg.patch, rng, cfg.augment);
            const Tape::Id pred = enhance_graph(tp, binding, variant, s.low);
            const LossIds li = loss_graph(tp, pred, s.high, cfg.weights);
            total_acc = i == 0 ? li.total : tp.add(total_acc, li.total);
            mse_acc = i == 0 ? li.mse : tp.add(mse_acc, li.mse);
            ms_acc = i == 0 ? li.msssim : tp.add(ms_acc, li.msssim);
        }
        const double inv_b = 1.0 / static_cast<double>(cfg.batch);
        const Tape::Id batch_total = tp.scale(total_acc, inv_b);
        const double total = tp.scalar(batch_total);
        const double mse = tp.scalar(tp.scale(mse_acc, inv_b));
        const double msssim = tp.scalar(tp.scale(ms_acc, inv_b));

        if (!std::isfinite(total) || !std::isfinite(mse) || !std::isfinite(msssim)) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "training diverged at iteration %d: total=%g mse=%g msssim=%g",
                          t, total, mse, msssim);
            throw std::runtime_error(buf);
        }

        if ((cfg.log_interval > 0 && t % cfg.log_interval == 0) ||
            t == cfg.iterations - 1)
            res.trace.push_back({t, lr, total, mse, msssim, 0.0});

        tp.backward(batch_total);
        optim::adam_step(res.params, tp.param_grads(), adam, lr);

        if (!out_dir.empty() && cfg.checkpoint_interval > 0 &&
            (t + 1) % cfg.checkpoint_interval == 0 && (t + 1) < cfg.iterations) {
            char name[64];
            std::snprintf(name, sizeof(name), "checkpoint_%06d.mnx", t + 1);
            checkpoint::save(out_dir + "/" + name, res.params);
        }
    }

    if (!out_dir.empty()) {
        checkpoint::save(out_dir + "/checkpoint_final.mnx", res.params);
        write_trace_csv(out_dir + "/trace.csv", res.trace);
    }
    return res;
}

} // namespace multinex::train
