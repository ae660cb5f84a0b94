#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace canhmm {

// All randomness flows through these helpers on top of std::mt19937_64, so
// a seed reproduces bit-for-bit on any platform. std::uniform_*_distribution
// is implementation-defined and must not be used anywhere in the toolkit.

// Uniform double in [0, 1), from the top 53 bits of one engine draw.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer in [lo, hi], inclusive.
inline std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<double>(hi - lo + 1);
    auto k = static_cast<std::int64_t>(uniform01(rng) * span);
    if (k > hi - lo) k = hi - lo;
    return lo + k;
}

// Samples an index from a probability vector: the smallest k whose running
// sum exceeds the uniform draw. Falls back to the last index if rounding
// leaves the total fractionally below the draw.
inline std::size_t sample_categorical(std::span<const double> probs, std::mt19937_64& rng) {
    const double u = uniform01(rng);
    double cum = 0.0;
    for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
        cum += probs[k];
        if (u < cum) return k;
    }
    return probs.size() - 1;
}

}  // namespace canhmm
