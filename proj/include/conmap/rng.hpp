#pragma once

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

// Seedable, portable randomness. All draws go through std::mt19937_64 plus
// the rejection/scaling helpers below; std::uniform_int_distribution and
// friends are never used because their output is not pinned by the standard
// and differs across library implementations.

namespace conmap::rng {

using Engine = std::mt19937_64;

/// Unbiased integer in [0, bound) via rejection sampling.
inline std::uint64_t uniform_below(Engine& eng, std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
    std::uint64_t draw;
    do {
        draw = eng();
    } while (draw >= limit);
    return draw % bound;
}

/// Double in [0, 1) with 53 random bits.
inline double uniform01(Engine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (no cached second value).
inline double normal(Engine& eng) {
    const double u1 = 1.0 - uniform01(eng);  // (0, 1], keeps log finite
    const double u2 = uniform01(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793238462643 * u2);
}

/// In-place Fisher-Yates shuffle.
template <typename T>
void shuffle(std::vector<T>& values, Engine& eng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_below(eng, i));
        std::swap(values[i - 1], values[j]);
    }
}

/// k distinct indices from [0, n), ascending. Partial Fisher-Yates.
inline std::vector<std::int32_t> sample_indices(std::int32_t n, std::int32_t k, Engine& eng) {
    if (k < 0 || k > n) throw std::invalid_argument("sample_indices: k out of range");
    std::vector<std::int32_t> pool(static_cast<std::size_t>(n));
    for (std::int32_t i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (std::int32_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::int32_t>(uniform_below(eng, static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(k));
    std::sort(pool.begin(), pool.end());
    return pool;
}

/// Decorrelated child seed for sub-experiments (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace conmap::rng
