#pragma once

// Portable random streams. All generation is built on std::mt19937_64,
// whose output sequence is fixed by the C++ standard; the conversions below
// avoid the implementation-defined standard distributions so that results
// match across toolchains.

#include <cstdint>
#include <random>

namespace jsct {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer, used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for stream `index` under a master seed (e.g. one stream per ray).
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index);

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

/// Unbiased uniform integer in [0, n), n >= 1.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Poisson(mean) draw: sequential inversion for mean < 30, Hormann's PTRS
/// transformed rejection otherwise. mean <= 0 returns 0.
std::uint64_t poisson_sample(Rng& rng, double mean);

}  // namespace jsct
