#include "multinex/optim.hpp"

#include <cmath>
#include <set>

namespace multinex::optim {

void adam_step(nn::ModelParams& params, const std::map<std::string, Tensor64>& grads,
               AdamState& state, double lr, const AdamConfig& cfg) {
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));

    std::set<std::string> seen;
    nn::for_each_param(params, [&](const std::string& name, Tensor& p) {
        const auto it = grads.find(name);
        if (it == grads.end())
            throw std::invalid_argument("adam_step: missing gradient for '" + name + "'");
        const Tensor64& g = it->second;
        if (g.size() != p.size())
            throw std::invalid_argument("adam_step: gradient size mismatch for '" + name +
                                        "'");
        seen.insert(name);

        Tensor64& m = state.m[name];
        Tensor64& v = state.v[name];
        if (m.empty()) m = Tensor64(g.height(), g.width(), g.channels());
        if (v.empty()) v = Tensor64(g.height(), g.width(), g.channels());

        for (size_t i = 0; i < p.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            const double next = static_cast<double>(p[i]) -
                                lr * mhat / (std::sqrt(vhat) + cfg.eps);
            p[i] = static_cast<float>(next);
        }
    });

    for (const auto& [name, g] : grads)
        if (!seen.count(name))
            throw std::invalid_argument("adam_step: unexpected gradient '" + name + "'");
}

double cosine_lr(int iter, int total_iters, double lr_start, double lr_end) {
    if (total_iters <= 0) return lr_start;
    const int t = std::clamp(iter, 0, total_iters);
    const double pos = static_cast<double>(t) / static_cast<double>(total_iters);
    return lr_end + 0.5 * (lr_start - lr_end) * (1.0 + std::cos(pos * M_PI));
}

} // namespace multinex::optim
