// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace multiring {

// Counter-based generator "ctr-splitmix64-v1".
//
// value(seed, counter) is a pure function, so tensor fills are reproducible
// from (seed, stream, index) in any language:
//   x = seed + (counter + 1) * 0x9E3779B97F4A7C15   (wrapping u64)
//   x ^= x >> 30;  x *= 0xBF58476D1CE4E5B9
//   x ^= x >> 27;  x *= 0x94D049BB133111EB
//   x ^= x >> 31
// uniform01 takes the top 24 bits / 2^24; uniform_sym maps onto [-1, 1).
inline constexpr const char* kRngAlgorithm = "ctr-splitmix64-v1";

inline std::uint64_t rng_u64(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t x = seed + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

inline float rng_uniform01(std::uint64_t seed, std::uint64_t counter) {
  return static_cast<float>(rng_u64(seed, counter) >> 40) * (1.0f / 16777216.0f);
}

// Uniform in [-1, 1). Streams keep q/k/v (and batch elements) independent:
// counter = (stream << 56) | index.
inline float rng_uniform_sym(std::uint64_t seed, std::uint64_t stream,
                             std::uint64_t index) {
  const std::uint64_t counter = (stream << 56) | index;
  return 2.0f * rng_uniform01(seed, counter) - 1.0f;
}

}  // namespace multiring
