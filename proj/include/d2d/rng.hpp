#pragma once

#include <cstdint>
#include <random>

namespace d2d {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used only to decorrelate substream keys.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Independent stream for (master seed, realization index, attempt).
/// Depends only on its arguments, so serial and parallel runs draw identical numbers.
inline Rng substream(std::uint64_t seed, std::uint64_t index, std::uint64_t attempt = 0) {
  const std::uint64_t key = mix64(mix64(mix64(seed) ^ index) ^ (attempt * 0xd1b54a32d192ed03ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(attempt)};
  return Rng(seq);
}

}  // namespace d2d
