#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "hawkes/common.hpp"

namespace hawkes {

// splitmix64 step; used to decorrelate seeds derived from a master seed so
// that stream k and stream k+1 are unrelated even for adjacent indices.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(mix64(master) ^ mix64(index + 1));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(master, a), b);
}

using RandomEngine = std::mt19937_64;

inline RandomEngine make_engine(std::uint64_t seed) { return RandomEngine(mix64(seed)); }

// Uniform on (0, 1): 53-bit mantissa draw, zero excluded so log() stays finite.
inline double uniform01(RandomEngine& rng) {
    std::uint64_t bits;
    do {
        bits = rng() >> 11;
    } while (bits == 0);
    return static_cast<double>(bits) * 0x1.0p-53;
}

inline double uniform(RandomEngine& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Box-Muller, one value per call. Stateless by design: no cached spare draw,
// so the consumption pattern from the engine is a fixed function of the call
// sequence (bit-reproducibility across code paths).
inline double standard_normal(RandomEngine& rng) {
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

inline double exponential(RandomEngine& rng, double rate) {
    return -std::log(uniform01(rng)) / rate;
}

// Poisson draw as the arrival count of a unit-rate process run to time `mean`:
// O(mean) uniforms, no e^{-mean} underflow for large means.
inline std::int64_t poisson(RandomEngine& rng, double mean) {
    require(mean >= 0.0, "poisson: mean must be non-negative");
    if (mean == 0.0) return 0;
    std::int64_t count = -1;
    double acc = 0.0;
    while (acc <= mean) {
        acc += -std::log(uniform01(rng));
        ++count;
    }
    return count;
}

}  // namespace hawkes
