#pragma once

#include <cstdint>
#include <random>

namespace multinex {

// Deterministic RNG used everywhere randomness is needed. The raw generator
// is std::mt19937_64 (portable by the standard); the mappings to doubles and
// ranges are implemented here because the std distributions are not
// reproducible across standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 random mantissa bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [lo, hi], both inclusive (Lemire reduction).
    int uniform_int(int lo, int hi) {
        const uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
        const auto wide = static_cast<unsigned __int128>(next_u64()) * range;
        return lo + static_cast<int>(wide >> 64);
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 gen_;
};

} // namespace multinex
