#include "multinex/loss.hpp"

#include "multinex/kernels.hpp"
#include "multinex/metrics.hpp"

namespace multinex::loss {

int auto_scales(int h, int w) {
    return kernels::msssim_max_scales(std::min(h, w));
}

LossBreakdown hybrid_loss(const Tensor64& pred, const Tensor64& target,
                          const LossWeights& w, const PerceptualHook& hook) {
    if (!pred.same_shape(target))
        throw std::invalid_argument("loss inputs must share a shape, got " +
                                    pred.shape_str() + " vs " + target.shape_str());
    LossBreakdown b;
    b.mse = metrics::mse64(pred, target);
    const int scales = auto_scales(pred.height(), pred.width());
    b.msssim = scales > 0 ? 1.0 - metrics::ms_ssim64(pred, target, scales) : 0.0;
    b.perceptual = hook ? hook(pred, target) : 0.0;
    b.total = w.mse * b.mse + w.msssim * b.msssim + w.perceptual * b.perceptual;
    return b;
}

LossBreakdown hybrid_loss(const Tensor& pred, const Tensor& target,
                          const LossWeights& w, const PerceptualHook& hook) {
    return hybrid_loss(pred.cast<double>(), target.cast<double>(), w, hook);
}

} // namespace multinex::loss
