#include "multinex/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "multinex/guidance.hpp"
#include "multinex/kernels.hpp"
#include "multinex/smallmat.hpp"

namespace multinex::analysis {
namespace {

Tensor64 elementwise_max(const Tensor64& a, const Tensor64& b) {
    return broadcast_zip(a, b, [](double x, double y) { return std::max(x, y); });
}

Tensor64 clamped_decrease(const Tensor64& full, const Tensor64& reduced) {
    return broadcast_zip(full, reduced,
                         [](double f, double r) { return std::max(0.0, f - r); });
}

Tensor64 stack_without(const Tensor64& stack, int drop) {
    std::vector<Tensor64> parts;
    for (int c = 0; c < stack.channels(); ++c)
        if (c != drop) parts.push_back(slice_channel(stack, c));
    return concat_channels(parts);
}

// Ranks scores descending; ties keep the lower index first.
std::vector<int> rank_descending(const std::vector<double>& scores) {
    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores[a] > scores[b]; });
    std::vector<int> rank(scores.size());
    for (size_t r = 0; r < order.size(); ++r) rank[order[r]] = static_cast<int>(r) + 1;
    return rank;
}

} // namespace

PcaModel fit_pca(const Tensor64& stack) {
    const int K = stack.channels();
    const size_t N = static_cast<size_t>(stack.height()) * stack.width();
    if (K < 1 || N == 0) throw std::invalid_argument("fit_pca: empty stack");
    if (N < static_cast<size_t>(K))
        throw std::invalid_argument("fit_pca: " + std::to_string(N) +
                                    " samples cannot span " + std::to_string(K) +
                                    " channels");
    for (size_t i = 0; i < stack.size(); ++i)
        if (!std::isfinite(stack[i]))
            throw std::invalid_argument("fit_pca: non-finite input");

    PcaModel m;
    m.dim = K;
    m.mean.assign(K, 0.0);
    for (int y = 0; y < stack.height(); ++y)
        for (int x = 0; x < stack.width(); ++x)
            for (int c = 0; c < K; ++c) m.mean[c] += stack.at(y, x, c);
    for (int c = 0; c < K; ++c) m.mean[c] /= static_cast<double>(N);

    std::vector<double> cov(static_cast<size_t>(K) * K, 0.0);
    for (int y = 0; y < stack.height(); ++y)
        for (int x = 0; x < stack.width(); ++x)
            for (int i = 0; i < K; ++i) {
                const double di = stack.at(y, x, i) - m.mean[i];
                for (int j = i; j < K; ++j)
                    cov[i * K + j] += di * (stack.at(y, x, j) - m.mean[j]);
            }
    for (int i = 0; i < K; ++i)
        for (int j = i; j < K; ++j) {
            cov[i * K + j] /= static_cast<double>(N);
            cov[j * K + i] = cov[i * K + j];
        }

    const smallmat::SymEigen eig = smallmat::eigen_symmetric(cov, K);
    m.eigenvalues = eig.values;
    m.components = eig.vectors;

    // Deterministic sign: largest-magnitude entry of each component positive.
    for (int j = 0; j < K; ++j) {
        int arg = 0;
        double best = -1.0;
        for (int i = 0; i < K; ++i) {
            const double mag = std::abs(m.components[i * K + j]);
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        if (m.components[arg * K + j] < 0.0)
            for (int i = 0; i < K; ++i) m.components[i * K + j] = -m.components[i * K + j];
    }
    return m;
}

Tensor64 sobel_magnitude(const Tensor64& channel) {
    if (channel.channels() != 1)
        throw std::invalid_argument("sobel_magnitude expects a single channel, got " +
                                    channel.shape_str());
    const int H = channel.height(), W = channel.width();
    const auto sample = [&](int y, int x) {
        return channel.at(std::clamp(y, 0, H - 1), std::clamp(x, 0, W - 1), 0);
    };
    Tensor64 out(H, W, 1);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const double gx = -sample(y - 1, x - 1) + sample(y - 1, x + 1) -
                              2.0 * sample(y, x - 1) + 2.0 * sample(y, x + 1) -
                              sample(y + 1, x - 1) + sample(y + 1, x + 1);
            const double gy = -sample(y - 1, x - 1) - 2.0 * sample(y - 1, x) -
                              sample(y - 1, x + 1) + sample(y + 1, x - 1) +
                              2.0 * sample(y + 1, x) + sample(y + 1, x + 1);
            out.at(y, x, 0) = std::sqrt(gx * gx + gy * gy);
        }
    return out;
}

Tensor64 orthogonal_energy(const Tensor64& stack, const PcaModel& pca) {
    const int K = stack.channels();
    if (K != pca.dim)
        throw std::invalid_argument("orthogonal_energy: stack has " + std::to_string(K) +
                                    " channels, model expects " + std::to_string(pca.dim));
    Tensor64 out(stack.height(), stack.width(), 1);
    std::vector<double> v(K);
    for (int y = 0; y < stack.height(); ++y)
        for (int x = 0; x < stack.width(); ++x) {
            for (int c = 0; c < K; ++c) v[c] = stack.at(y, x, c) - pca.mean[c];
            double acc = 0.0;
            for (int j = 1; j < K; ++j) {
                double proj = 0.0;
                for (int i = 0; i < K; ++i) proj += v[i] * pca.components[i * K + j];
                acc += proj * proj;
            }
            out.at(y, x, 0) = std::sqrt(acc);
        }
    return out;
}

ImportanceReport descriptor_importance(const Tensor& rgb, std::vector<std::string> pool) {
    if (pool.empty()) pool = guidance::luminance_candidates();
    const int K = static_cast<int>(pool.size());
    if (K < 2)
        throw std::invalid_argument("descriptor importance needs at least 2 candidates");

    // Canonical processing order (by name) keeps every numeric result
    // independent of how the caller ordered the pool.
    std::vector<int> canon(K);
    std::iota(canon.begin(), canon.end(), 0);
    std::stable_sort(canon.begin(), canon.end(),
                     [&](int a, int b) { return pool[a] < pool[b]; });

    std::vector<Tensor64> channels(K);
    std::vector<Tensor64> grad_maps(K);
    for (int k = 0; k < K; ++k) {
        channels[k] = guidance::named_descriptor(rgb, pool[canon[k]]).cast<double>();
        grad_maps[k] = sobel_magnitude(channels[k]);
    }
    const Tensor64 full_stack = concat_channels(channels);

    Tensor64 g_full = grad_maps[0];
    for (int k = 1; k < K; ++k) g_full = elementwise_max(g_full, grad_maps[k]);
    const Tensor64 e_full = orthogonal_energy(full_stack, fit_pca(full_stack));

    std::vector<double> score_g(K), score_e(K);
    std::vector<Tensor64> dg(K), de(K);
    for (int k = 0; k < K; ++k) {
        Tensor64 g_red;
        bool first = true;
        for (int j = 0; j < K; ++j) {
            if (j == k) continue;
            g_red = first ? grad_maps[j] : elementwise_max(g_red, grad_maps[j]);
            first = false;
        }
        dg[k] = clamped_decrease(g_full, g_red);

        const Tensor64 reduced = stack_without(full_stack, k);
        const Tensor64 e_red = orthogonal_energy(reduced, fit_pca(reduced));
        de[k] = clamped_decrease(e_full, e_red);

        score_g[k] = kernels::reduce_mean(dg[k]);
        score_e[k] = kernels::reduce_mean(de[k]);
    }

    const std::vector<int> rank_g = rank_descending(score_g);
    const std::vector<int> rank_e = rank_descending(score_e);

    ImportanceReport rep;
    rep.rows.resize(K);
    rep.delta_g_maps.resize(K);
    rep.delta_e_maps.resize(K);
    for (int k = 0; k < K; ++k) {
        const int input_idx = canon[k];
        ImportanceRow& row = rep.rows[input_idx];
        row.name = pool[input_idx];
        row.delta_g = score_g[k];
        row.delta_e = score_e[k];
        row.rank_g = rank_g[k];
        row.rank_e = rank_e[k];
        row.avg_rank = (rank_g[k] + rank_e[k]) / 2.0;
        rep.delta_g_maps[input_idx] = dg[k];
        rep.delta_e_maps[input_idx] = de[k];
    }
    return rep;
}

LraResult linear_reconstruction(const Tensor64& source_stack, const Tensor64& target,
                                const LraConfig& cfg) {
    const int K = source_stack.channels();
    const int Ct = target.channels();
    const int H = source_stack.height(), W = source_stack.width();
    if (target.height() != H || target.width() != W)
        throw std::invalid_argument("source " + source_stack.shape_str() + " and target " +
                                    target.shape_str() + " differ spatially");
    if (cfg.dims < 1 || cfg.dims > K)
        throw std::invalid_argument("dims must be in [1," + std::to_string(K) + "], got " +
                                    std::to_string(cfg.dims));
    if (cfg.lambda < 0.0) throw std::invalid_argument("lambda must be non-negative");

    const int D = cfg.dims;
    const size_t N = static_cast<size_t>(H) * W;

    LraResult res;
    res.pca = fit_pca(source_stack);

    std::vector<double> tmean(Ct, 0.0);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            for (int c = 0; c < Ct; ++c) tmean[c] += target.at(y, x, c);
    for (int c = 0; c < Ct; ++c) tmean[c] /= static_cast<double>(N);

    // Z = centered source projected on the top-D components (N x D).
    std::vector<double> z(N * D, 0.0);
    {
        size_t n = 0;
        std::vector<double> v(K);
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x, ++n) {
                for (int c = 0; c < K; ++c) v[c] = source_stack.at(y, x, c) - res.pca.mean[c];
                for (int j = 0; j < D; ++j) {
                    double proj = 0.0;
                    for (int i = 0; i < K; ++i) proj += v[i] * res.pca.components[i * K + j];
                    z[n * D + j] = proj;
                }
            }
    }

    // Ridge system: (Z^T Z + lambda I) W = Z^T Tc.
    std::vector<double> ztz(static_cast<size_t>(D) * D, 0.0);
    std::vector<double> ztt(static_cast<size_t>(D) * Ct, 0.0);
    {
        size_t n = 0;
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x, ++n) {
                for (int i = 0; i < D; ++i) {
                    const double zi = z[n * D + i];
                    for (int j = i; j < D; ++j) ztz[i * D + j] += zi * z[n * D + j];
                    for (int c = 0; c < Ct; ++c)
                        ztt[i * Ct + c] += zi * (target.at(y, x, c) - tmean[c]);
                }
            }
        for (int i = 0; i < D; ++i) {
            for (int j = i + 1; j < D; ++j) ztz[j * D + i] = ztz[i * D + j];
            ztz[i * D + i] += cfg.lambda;
        }
    }
    res.weights = smallmat::solve_spd(ztz, D, ztt, Ct);

    res.reconstruction = Tensor64(H, W, Ct);
    res.per_channel_mse.assign(Ct, 0.0);
    {
        size_t n = 0;
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x, ++n)
                for (int c = 0; c < Ct; ++c) {
                    double v = tmean[c];
                    for (int j = 0; j < D; ++j) v += z[n * D + j] * res.weights[j * Ct + c];
                    res.reconstruction.at(y, x, c) = v;
                    const double err = v - target.at(y, x, c);
                    res.per_channel_mse[c] += err * err;
                }
    }
    res.mean_mse = 0.0;
    for (int c = 0; c < Ct; ++c) {
        res.per_channel_mse[c] /= static_cast<double>(N);
        res.mean_mse += res.per_channel_mse[c];
    }
    res.mean_mse /= static_cast<double>(Ct);
    return res;
}

} // namespace multinex::analysis
