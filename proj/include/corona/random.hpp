#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>

namespace corona {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream for (seed, generation, slot). Streams are fixed before any
/// parallel work starts, so results do not depend on the worker count.
inline Rng derive_stream(std::uint64_t seed, std::uint64_t generation, std::uint64_t slot) {
  return Rng(mix64(mix64(mix64(seed) ^ generation) ^ (slot * 0x2545f4914f6cdd1dULL)));
}

// The helpers below avoid std::*_distribution, whose output is
// implementation-defined, so reports are reproducible across toolchains.

inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n); n must be positive.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  const std::uint64_t bound = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return static_cast<std::size_t>(x % bound);
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// Index drawn proportionally to non-negative weights (at least one > 0).
inline std::size_t pick_weighted(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = uniform01(rng) * total;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = i;
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return last_positive;
}

}  // namespace corona
