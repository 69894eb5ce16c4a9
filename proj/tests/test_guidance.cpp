#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "multinex/guidance.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace multinex;
using testsupport::Rng;
namespace oracle = guidance_oracle;

namespace {

void check_stack_against_oracle(const Tensor& rgb, const Tensor& stack,
                                const std::vector<std::string>& names,
                                const std::vector<oracle::Entry>& expect) {
    REQUIRE(stack.channels() == static_cast<int>(expect.size()));
    REQUIRE(names.size() == expect.size());
    for (size_t k = 0; k < expect.size(); ++k) CHECK(names[k] == expect[k].name);
    CHECK(oracle::worst_abs_error(rgb, stack, expect) <= 1e-6);
}

} // namespace

TEST_CASE("luminance stack matches the double-precision oracle on random pixels") {
    Rng rng(101);
    const Tensor rgb = testsupport::random_image(25, 40, 3, rng);  // 1000 pixels
    check_stack_against_oracle(rgb, guidance::luminance_stack(rgb),
                               guidance::luminance_names(), oracle::luminance());
}

TEST_CASE("reflectance stack matches the double-precision oracle on random pixels") {
    Rng rng(102);
    const Tensor rgb = testsupport::random_image(25, 40, 3, rng);
    check_stack_against_oracle(rgb, guidance::reflectance_stack(rgb),
                               guidance::reflectance_names(), oracle::reflectance());
}

TEST_CASE("extended stack matches the double-precision oracle on random pixels") {
    Rng rng(103);
    const Tensor rgb = testsupport::random_image(25, 40, 3, rng);
    check_stack_against_oracle(rgb, guidance::extended_stack(rgb),
                               guidance::extended_names(), oracle::extended());
}

TEST_CASE("hand-computed channel values at a fixed pixel") {
    const Tensor rgb = Tensor::from_data(1, 1, 3, {0.2f, 0.4f, 0.6f});

    const Tensor lum = guidance::luminance_stack(rgb);
    CHECK(lum.at(0, 0, 0) == doctest::Approx(0.37192).epsilon(1e-5));   // weighted sum
    CHECK(lum.at(0, 0, 1) == doctest::Approx(0.6).epsilon(1e-6));       // max channel
    CHECK(lum.at(0, 0, 2) == doctest::Approx(0.4).epsilon(1e-6));       // (max+min)/2
    CHECK(lum.at(0, 0, 3) ==
          doctest::Approx(std::sqrt(0.56 + 1e-6) / std::sqrt(3.0)).epsilon(1e-5));

    const Tensor refl = guidance::reflectance_stack(rgb);
    CHECK(refl.at(0, 0, 0) ==
          doctest::Approx(-0.168736 * 0.2 - 0.331264 * 0.4 + 0.5 * 0.6 + 0.5)
              .epsilon(1e-5));
    CHECK(refl.at(0, 0, 1) ==
          doctest::Approx(0.5 * 0.2 - 0.418688 * 0.4 - 0.081312 * 0.6 + 0.5)
              .epsilon(1e-5));
    CHECK(refl.at(0, 0, 2) == doctest::Approx(0.2 / 1.200001).epsilon(1e-5));
    CHECK(refl.at(0, 0, 3) == doctest::Approx(0.4 / 1.200001).epsilon(1e-5));
    CHECK(refl.at(0, 0, 4) == doctest::Approx(0.4 / 0.600001).epsilon(1e-5));
}

TEST_CASE("every channel stays in [0,1], including at interval endpoints") {
    Rng rng(104);
    // Random pixels plus the corner cases where clamping must engage.
    std::vector<Tensor> imgs;
    imgs.push_back(testsupport::random_image(16, 16, 3, rng));
    imgs.push_back(Tensor(4, 4, 3, 0.0f));
    imgs.push_back(Tensor(4, 4, 3, 1.0f));  // the norm of (1,1,1) exceeds sqrt(3) pre-clamp
    Tensor mixed(2, 2, 3);
    mixed.at(0, 0, 0) = 1.0f;        // pure red
    mixed.at(0, 1, 1) = 1.0f;        // pure green
    mixed.at(1, 0, 2) = 1.0f;        // pure blue
    imgs.push_back(mixed);

    for (const auto& img : imgs) {
        for (const Tensor& stack : {guidance::luminance_stack(img),
                                    guidance::reflectance_stack(img),
                                    guidance::extended_stack(img)}) {
            CHECK(min_value(stack) >= 0.0f);
            CHECK(max_value(stack) <= 1.0f);
        }
    }
}

TEST_CASE("named descriptors agree with their stack columns") {
    Rng rng(105);
    const Tensor rgb = testsupport::random_image(6, 6, 3, rng);
    const Tensor lum = guidance::luminance_stack(rgb);
    const auto names = guidance::luminance_names();
    for (size_t k = 0; k < names.size(); ++k)
        CHECK(testsupport::bit_identical(guidance::named_descriptor(rgb, names[k]),
                                         slice_channel(lum, static_cast<int>(k))));
    CHECK_THROWS_AS(guidance::named_descriptor(rgb, "nonexistent"),
                    std::invalid_argument);
}

TEST_CASE("analysis candidate pool lists six brightness descriptors in fixed order") {
    const auto pool = guidance::luminance_candidates();
    REQUIRE(pool.size() == 6);
    CHECK(pool[0] == "y_rec709");
    CHECK(pool[1] == "y_mean");
    CHECK(pool[2] == "y_ycgco");
    CHECK(pool[3] == "y_vmax");
    CHECK(pool[4] == "y_lightness");
    CHECK(pool[5] == "y_l2");
    Rng rng(106);
    const Tensor rgb = testsupport::random_image(4, 4, 3, rng);
    for (const auto& name : pool) CHECK_NOTHROW(guidance::named_descriptor(rgb, name));
}

TEST_CASE("stacks require rgb input") {
    const Tensor gray(4, 4, 1, 0.5f);
    CHECK_THROWS_AS(guidance::luminance_stack(gray), std::invalid_argument);
    CHECK_THROWS_AS(guidance::reflectance_stack(gray), std::invalid_argument);
    CHECK_THROWS_AS(guidance::extended_stack(gray), std::invalid_argument);
}
