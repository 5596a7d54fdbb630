#pragma once

#include <cstdint>
#include <cstring>
#include <random>
#include <span>

namespace hebbcl {

/// 64-bit FNV-1a over raw bytes.
class Fnv1a {
 public:
  void update(const void* data, std::size_t size) noexcept {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
  }

  template <typename T>
  void update(std::span<const T> values) noexcept {
    update(values.data(), values.size_bytes());
  }

  std::uint64_t digest() const noexcept { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

/// Deterministic generator. std::mt19937_64 has a fixed output sequence, and the
/// float/integer conversions here are written out so results do not depend on
/// the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform float in [0, 1) with 24 bits of mantissa.
  float uniform_float() { return static_cast<float>(engine_() >> 40) * 0x1.0p-24f; }

  /// Uniform double in [0, 1).
  double uniform_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound). Uses rejection to avoid modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % bound;
  }

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const auto j = below(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent stream seed from a root seed and a fixed offset (SplitMix64 finalizer).
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t offset) noexcept {
  std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (offset + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace hebbcl
