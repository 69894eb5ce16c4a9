#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "multinex/metrics.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace multinex;
using testsupport::Rng;

namespace oracle = metrics_oracle;

TEST_CASE("mse averages squared error over every element") {
    const Tensor a = Tensor::from_data(1, 2, 2, {0, 0, 0, 0});
    const Tensor b = Tensor::from_data(1, 2, 2, {1, 0, 0, 1});
    CHECK(metrics::mse(a, b) == doctest::Approx(0.5));
    CHECK_THROWS_AS(metrics::mse(a, Tensor(1, 1, 2, 0.0f)), std::invalid_argument);
}

TEST_CASE("psnr closed forms: uniform offsets give exact decibel values") {
    const Tensor zero(16, 16, 3, 0.25f);
    // Offset 0.1 -> MSE 0.01 -> 20 dB; offset 0.01 -> MSE 1e-4 -> 40 dB.
    Tensor off1 = map(zero, [](float v) { return v + 0.1f; });
    Tensor off2 = map(zero, [](float v) { return v + 0.01f; });
    CHECK(metrics::psnr(off1, zero) == doctest::Approx(20.0).epsilon(1e-5));
    CHECK(metrics::psnr(off2, zero) == doctest::Approx(40.0).epsilon(1e-3));
    // Identical inputs cap at 100 dB instead of infinity.
    CHECK(metrics::psnr(zero, zero) == 100.0);
}

TEST_CASE("ssim is 1 for identical images and falls for noisy ones") {
    Rng rng(201);
    const Tensor img = testsupport::random_image(24, 24, 3, rng);
    CHECK(metrics::ssim(img, img) == doctest::Approx(1.0).epsilon(1e-9));
    Tensor noisy = img;
    Rng rng2(202);
    for (size_t i = 0; i < noisy.size(); ++i)
        noisy[i] = std::clamp(noisy[i] + static_cast<float>(rng2.uniform(-0.2, 0.2)),
                              0.0f, 1.0f);
    CHECK(metrics::ssim(noisy, img) < 0.999);
    CHECK(metrics::ssim(noisy, img) >= -1.0);
}

TEST_CASE("ssim matches the direct sliding-window oracle") {
    Rng rng(203);
    const Tensor a = testsupport::random_image(32, 32, 3, rng);
    // Correlated pair: blend toward the first image, then perturb.
    Tensor b = a;
    for (size_t i = 0; i < b.size(); ++i)
        b[i] = std::clamp(0.8f * b[i] + static_cast<float>(rng.uniform(0.0, 0.2)),
                          0.0f, 1.0f);
    const auto gx = oracle::gray(a);
    const auto gy = oracle::gray(b);
    const double want = oracle::ssim_gray(gx, gy, 32, 32);
    CHECK(metrics::ssim(a, b) == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("multi-scale similarity matches the direct oracle at 1 and 2 scales") {
    Rng rng(204);
    const Tensor a = testsupport::random_image(32, 32, 3, rng);
    Tensor b = a;
    for (size_t i = 0; i < b.size(); ++i)
        b[i] = std::clamp(b[i] + static_cast<float>(rng.uniform(-0.1, 0.1)), 0.0f, 1.0f);

    CHECK(metrics::ms_ssim(a, b, 1) == doctest::Approx(oracle::ms_ssim(a, b, 1)).epsilon(1e-6));
    CHECK(metrics::ms_ssim(a, b, 2) == doctest::Approx(oracle::ms_ssim(a, b, 2)).epsilon(1e-6));
}

TEST_CASE("multi-scale similarity at 5 scales matches the oracle on a large field") {
    Rng rng(205);
    // 5 scales need min dim >= 176.
    const Tensor a = testsupport::random_image(180, 180, 3, rng);
    Tensor b = a;
    for (size_t i = 0; i < b.size(); ++i)
        b[i] = std::clamp(b[i] + static_cast<float>(rng.uniform(-0.05, 0.05)), 0.0f, 1.0f);
    CHECK(metrics::ms_ssim(a, b, 5) == doctest::Approx(oracle::ms_ssim(a, b, 5)).epsilon(1e-6));
    CHECK(metrics::ms_ssim(a, a, 5) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("multi-scale similarity stays in [0,1] even for anti-correlated inputs") {
    const int n = 32;
    Tensor a(n, n, 3), b(n, n, 3);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            for (int c = 0; c < 3; ++c) {
                const float v = ((x + y) % 2) ? 1.0f : 0.0f;
                a.at(y, x, c) = v;
                b.at(y, x, c) = 1.0f - v;  // inverted checkerboard
            }
    const double v = metrics::ms_ssim(a, b, 2);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
}

TEST_CASE("window-size preconditions are enforced") {
    const Tensor small(8, 8, 3, 0.5f);
    CHECK_THROWS_AS(metrics::ssim(small, small), std::invalid_argument);
    const Tensor mid(16, 16, 3, 0.5f);
    CHECK_NOTHROW(metrics::ms_ssim(mid, mid, 1));
    CHECK_THROWS_AS(metrics::ms_ssim(mid, mid, 2), std::invalid_argument);
    CHECK_THROWS_AS(metrics::ms_ssim(mid, mid, 0), std::invalid_argument);
    CHECK_THROWS_AS(metrics::ms_ssim(mid, mid, 6), std::invalid_argument);
}

TEST_CASE("brightness alignment restores the reference gray mean") {
    Rng rng(206);
    Tensor gt = testsupport::random_image(16, 16, 3, rng);
    // Keep the ground truth away from 1.0 so the rescaled prediction does not clamp.
    for (size_t i = 0; i < gt.size(); ++i) gt[i] *= 0.6f;
    const Tensor pred = scale(gt, 0.31f);

    const metrics::GtMeanResult r = metrics::gt_mean_rescale(pred, gt);
    CHECK(r.q == doctest::Approx(1.0 / 0.31).epsilon(1e-4));
    CHECK(std::abs(metrics::mean_gray(r.rescaled) - metrics::mean_gray(gt)) <= 1e-5);

    const Tensor black(16, 16, 3, 0.0f);
    CHECK_THROWS_AS(metrics::gt_mean_rescale(black, gt), std::domain_error);
}

TEST_CASE("gray mean uses the standard luma weights") {
    const Tensor white(4, 4, 3, 1.0f);
    CHECK(metrics::mean_gray(white) == doctest::Approx(1.0).epsilon(1e-9));
    Tensor redonly(4, 4, 3, 0.0f);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) redonly.at(y, x, 0) = 1.0f;
    CHECK(metrics::mean_gray(redonly) == doctest::Approx(0.2126).epsilon(1e-6));
}
