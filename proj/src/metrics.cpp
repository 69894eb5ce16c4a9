#include "multinex/metrics.hpp"

#include <cmath>

#include "multinex/kernels.hpp"

namespace multinex::metrics {
namespace {

using kernels::kC1;
using kernels::kC2;

struct ScaleStats {
    Tensor64 cs_map;   // contrast-structure term per valid window
    Tensor64 l_map;    // mean term per valid window
};

// One resolution level of windowed statistics. Both maps cover the valid
// window positions of the current level.
ScaleStats scale_stats(const Tensor64& x, const Tensor64& y) {
    ScaleStats s;
    const Tensor64 mu_x = kernels::gaussian11_valid(x);
    const Tensor64 mu_y = kernels::gaussian11_valid(y);
    const Tensor64 gxx = kernels::gaussian11_valid(mul(x, x));
    const Tensor64 gyy = kernels::gaussian11_valid(mul(y, y));
    const Tensor64 gxy = kernels::gaussian11_valid(mul(x, y));
    const Tensor64 mxx = mul(mu_x, mu_x);
    const Tensor64 myy = mul(mu_y, mu_y);
    const Tensor64 mxy = mul(mu_x, mu_y);
    const Tensor64 sxx = sub(gxx, mxx);
    const Tensor64 syy = sub(gyy, myy);
    const Tensor64 sxy = sub(gxy, mxy);

    const auto offset = [](const Tensor64& t, double c) {
        return map(t, [c](double v) { return v + c; });
    };
    s.cs_map = div(offset(scale(sxy, 2.0), kC2), offset(add(sxx, syy), kC2));
    s.l_map = div(offset(scale(mxy, 2.0), kC1), offset(add(mxx, myy), kC1));
    return s;
}

void check_pair(const Tensor64& a, const Tensor64& b) {
    if (!a.same_shape(b))
        throw std::invalid_argument("metric inputs must share a shape, got " +
                                    a.shape_str() + " vs " + b.shape_str());
}

} // namespace

double mse64(const Tensor64& a, const Tensor64& b) {
    check_pair(a, b);
    return kernels::reduce_mean(mul(sub(a, b), sub(a, b)));
}

double mse(const Tensor& a, const Tensor& b) {
    return mse64(a.cast<double>(), b.cast<double>());
}

double psnr(const Tensor& pred, const Tensor& ref) {
    const double e = mse(pred, ref);
    if (e < 1e-10) return 100.0;
    return -10.0 * std::log10(e);
}

double ssim64(const Tensor64& pred_rgb, const Tensor64& ref_rgb) {
    check_pair(pred_rgb, ref_rgb);
    const int min_dim = std::min(pred_rgb.height(), pred_rgb.width());
    if (min_dim < kernels::kWindow)
        throw std::invalid_argument("image " + pred_rgb.shape_str() +
                                    " too small for 11x11 windows");
    const Tensor64 x = kernels::luma_rec709(pred_rgb);
    const Tensor64 y = kernels::luma_rec709(ref_rgb);
    const ScaleStats s = scale_stats(x, y);
    return kernels::reduce_mean(mul(s.l_map, s.cs_map));
}

double ssim(const Tensor& pred, const Tensor& ref) {
    return ssim64(pred.cast<double>(), ref.cast<double>());
}

double ms_ssim64(const Tensor64& pred_rgb, const Tensor64& ref_rgb, int scales) {
    check_pair(pred_rgb, ref_rgb);
    const std::vector<double> w = kernels::msssim_weights(scales);
    const int min_dim = std::min(pred_rgb.height(), pred_rgb.width());
    if (min_dim < kernels::msssim_min_dim(scales))
        throw std::invalid_argument(
            "image " + pred_rgb.shape_str() + " too small for " +
            std::to_string(scales) + " scales (needs min dimension " +
            std::to_string(kernels::msssim_min_dim(scales)) + ")");

    Tensor64 x = kernels::luma_rec709(pred_rgb);
    Tensor64 y = kernels::luma_rec709(ref_rgb);
    double result = 1.0;
    for (int m = 0; m < scales; ++m) {
        const ScaleStats s = scale_stats(x, y);
        if (m + 1 < scales) {
            const double cs = kernels::reduce_mean(s.cs_map);
            result = result * kernels::pow_guarded(std::max(cs, 0.0), w[m]);
            x = kernels::avgpool2(x);
            y = kernels::avgpool2(y);
        } else {
            const double sm = kernels::reduce_mean(mul(s.l_map, s.cs_map));
            result = result * kernels::pow_guarded(std::max(sm, 0.0), w[m]);
        }
    }
    return result;
}

double ms_ssim(const Tensor& pred, const Tensor& ref, int scales) {
    return ms_ssim64(pred.cast<double>(), ref.cast<double>(), scales);
}

double mean_gray(const Tensor& img) {
    return kernels::reduce_mean(kernels::luma_rec709(img.cast<double>()));
}

GtMeanResult gt_mean_rescale(const Tensor& pred, const Tensor& gt) {
    if (!pred.same_shape(gt))
        throw std::invalid_argument("inputs must share a shape, got " +
                                    pred.shape_str() + " vs " + gt.shape_str());
    const double mp = mean_gray(pred);
    if (mp < 1e-12)
        throw std::domain_error("prediction has zero mean gray; cannot rescale");
    GtMeanResult r;
    r.q = mean_gray(gt) / mp;
    r.rescaled = clamp01(scale(pred, static_cast<float>(r.q)));
    return r;
}

} // namespace multinex::metrics
