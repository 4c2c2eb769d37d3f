#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace feddaf {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a list of tags
/// (round, client id, purpose...). Order of tags matters.
constexpr std::uint64_t derive_seed(std::uint64_t base,
                                    std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = mix64(base);
  for (auto t : tags) h = mix64(h ^ mix64(t + 0x632be59bd9b4e019ULL));
  return h;
}

/// Purpose tags so that streams for different jobs never collide.
enum class Stream : std::uint64_t {
  kPool = 1,
  kPoolSplit,
  kPartition,
  kNoise,
  kTargetSplit,
  kScarcity,
  kInit,
  kSourceTrain,
  kTargetTrain,
  kGradientField,
};

constexpr std::uint64_t tag(Stream s) noexcept { return static_cast<std::uint64_t>(s); }

}  // namespace feddaf
