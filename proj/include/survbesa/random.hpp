#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "survbesa/core.hpp"

namespace survbesa {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; derives independent sub-stream seeds from a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// `m` distinct indices from [0, n), drawn uniformly without replacement and returned ascending.
inline std::vector<Index> sample_without_replacement(Index n, Index m, Rng& rng) {
    std::vector<Index> pool(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (Index i = 0; i < m; ++i) {
        std::uniform_int_distribution<Index> pick(i, n - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    pool.resize(static_cast<std::size_t>(m));
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace survbesa
