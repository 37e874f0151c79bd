#pragma once

#include <cstdint>
#include <random>

namespace sdde {

using Rng = std::mt19937_64;

/// Stream identifiers for deriving independent generators from one master
/// seed. Every source of randomness in the library draws from a generator
/// created by make_rng(seed, stream, trial), so runs are reproducible
/// regardless of scheduling.
enum class Stream : std::uint64_t {
    SmallJumps = 1,
    LargeJumps = 2,
    Segments = 3,
    Conditions = 4,
    Probe = 5,
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Deterministic generator derivation: (seed, stream, trial) -> mt19937_64.
inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t trial = 0) {
    std::uint64_t s = seed;
    std::uint64_t a = detail::splitmix64(s);
    s ^= static_cast<std::uint64_t>(stream) * 0xff51afd7ed558ccdULL;
    std::uint64_t b = detail::splitmix64(s);
    s ^= (trial + 1) * 0xc4ceb9fe1a85ec53ULL;
    std::uint64_t c = detail::splitmix64(s);
    return Rng(a ^ (b << 1) ^ c);
}

/// Uniform draw in the open interval (0, 1); never returns 0 or 1 exactly.
inline double uniform01(Rng& rng) {
    // 53-bit mantissa; offset by half an ulp to stay inside the open interval.
    return (static_cast<double>(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

/// Exponential inter-arrival draw with the given rate.
inline double exponential_sample(Rng& rng, double rate) {
    return -std::log(uniform01(rng)) / rate;
}

/// Standard normal via Box-Muller (stateless; two uniforms per draw).
inline double normal_sample(Rng& rng) {
    const double u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

/// Poisson draw by Knuth's product-of-uniforms method. Means above the
/// chunk threshold are split into independent Poisson summands, which is
/// exact and keeps the per-draw uniform count bounded.
inline long poisson_sample(Rng& rng, double mean) {
    if (!(mean > 0.0)) return 0;
    constexpr double kChunk = 32.0;
    long total = 0;
    while (mean > kChunk) {
        double p = std::exp(-kChunk);
        long k = 0;
        double prod = uniform01(rng);
        while (prod > p) {
            ++k;
            prod *= uniform01(rng);
        }
        total += k;
        mean -= kChunk;
    }
    const double p = std::exp(-mean);
    long k = 0;
    double prod = uniform01(rng);
    while (prod > p) {
        ++k;
        prod *= uniform01(rng);
    }
    return total + k;
}

}  // namespace sdde
