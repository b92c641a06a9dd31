// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <concepts>
#include <cstdint>
#include <random>
#include <string_view>

namespace ssou {

/// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of the sub-stream `index` of `base`. Streams keyed this way do not
/// depend on the order in which they are consumed.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return mix64(base ^ mix64(index));
}

template <class... Rest>
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index,
                                    Rest... rest) noexcept {
  return derive_seed(derive_seed(base, index), static_cast<std::uint64_t>(rest)...);
}

/// 64-bit FNV-1a, stable across platforms.
constexpr std::uint64_t fnv1a(std::string_view text,
                              std::uint64_t h = 0xCBF29CE484222325ULL) noexcept {
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

template <class R>
concept UniformSource = requires(R& r) {
  { r.uniform_open() } -> std::convertible_to<double>;
};

/// Per-trajectory random stream.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  /// Uniform draw on (0, 1].
  double uniform_open() {
    return 1.0 - static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal() { return normal_(engine_); }

  std::uint64_t seed() const noexcept { return seed_; }
  std::mt19937_64& engine() noexcept { return engine_; }

private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uint64_t seed_;
};

}  // namespace ssou
