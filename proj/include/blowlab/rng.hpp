#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace blowlab {

// SplitMix64: tiny counter-based generator. Each Monte Carlo trial, search
// restart or initial-condition draw gets its own stream derived from
// (seed, stream index), so serial and parallel executions of the same
// experiment consume identical random numbers.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
    {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Stream derivation: hash the pair (seed, index) into a fresh state.
    static SplitMix64 stream(std::uint64_t seed, std::uint64_t index)
    {
        SplitMix64 mix(seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
        mix();  // decorrelate nearby indices
        return SplitMix64(mix());
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double log_uniform(double lo, double hi)
    {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

private:
    std::uint64_t state_;
};

// Poisson sampling: multiplication method for small means, Hoermann's PTRS
// transformed rejection for large means. Deterministic given the stream.
inline long poisson(SplitMix64& rng, double mean)
{
    if (!(mean >= 0.0)) return 0;
    if (mean < 10.0) {
        const double limit = std::exp(-mean);
        long k = 0;
        double prod = rng.uniform();
        while (prod > limit) {
            ++k;
            prod *= rng.uniform();
        }
        return k;
    }
    // PTRS, valid for mean >= 10
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
        double u = rng.uniform() - 0.5;
        double v = rng.uniform();
        double us = 0.5 - std::fabs(u);
        double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<long>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            kf * log_mean - mean - std::lgamma(kf + 1.0))
            return static_cast<long>(kf);
    }
}

}  // namespace blowlab
