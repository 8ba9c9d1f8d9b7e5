#pragma once

#include <cstdint>
#include <random>

namespace mobflow {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; derives independent sub-seeds such as
// (seed, restart_index) or (seed, day).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) { return Rng{mix_seed(seed, stream)}; }

}  // namespace mobflow
