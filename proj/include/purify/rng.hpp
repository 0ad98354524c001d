#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace purify {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used both for seeding and for stream derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Child stream rule used everywhere results must not depend on worker
// scheduling: child seed = hash(parent seed, index).
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
    return splitmix64(parent ^ splitmix64(index + 1));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

// Uniform in [0, 1): top 53 bits of one engine draw.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal via the trigonometric Box-Muller transform. Exactly two
// engine draws per variate, no cached spare, so consumption is predictable.
inline double standard_normal(Rng& rng) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(two_pi * u2);
}

inline void fill_standard_normal(Rng& rng, std::span<double> out) {
    for (double& v : out) v = standard_normal(rng);
}

}  // namespace purify
