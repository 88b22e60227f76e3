#pragma once

#include <cstdint>
#include <random>

namespace shrinkcov {

/// SplitMix64 mixing step.  Used only to derive well-separated seeds; the
/// actual variate stream is std::mt19937_64.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Deterministic substream seed for (seed, a, b), e.g. a = problem dimension
/// and b = repetition index.  Distinct tuples give unrelated streams.
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a = 0,
                                      std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return h;
}

inline std::mt19937_64 make_engine(std::uint64_t stream_seed) {
  return std::mt19937_64(stream_seed);
}

}  // namespace shrinkcov
