#pragma once

#include <cstdint>
#include <random>

namespace crashdyn {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; decorrelates consecutive stream indices.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for the independent substream `index` of a run seeded with `seed`.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

inline Rng make_substream(std::uint64_t seed, std::uint64_t index) {
  return Rng{substream_seed(seed, index)};
}

}  // namespace crashdyn
