#pragma once

#include <cstdint>
#include <random>

namespace htbo {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of stream `index` derived from `parent`. Streams with different
/// indices are statistically independent for practical purposes.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
  return mix64(parent ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Uniform draw in (0, 1]; never returns 0 so it is safe under log and
/// negative powers.
inline double uniform_open0(Rng& rng) {
  // 53 random mantissa bits, shifted into (0, 1].
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace htbo
