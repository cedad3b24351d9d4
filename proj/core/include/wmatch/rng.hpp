#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace wmatch {

// Portable draws: std distributions are implementation-defined, so everything
// seeded goes through these helpers to stay byte-identical across toolchains.

using Rng = std::mt19937_64;

/// Uniform in [0, 1) with 53 random bits.
double uniform01(Rng& rng);
double uniform(Rng& rng, double lo, double hi);
/// Uniform integer in [lo, hi] (inclusive), rejection-sampled.
std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi);
/// Fisher-Yates shuffle driven by uniform_int.
void shuffle(std::vector<std::uint32_t>& v, Rng& rng);
/// Derived seed for an independent stream (splitmix64 of seed ^ stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace wmatch
