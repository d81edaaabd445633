#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace fsre {

/// Seeded generator with portable draws.
///
/// The standard distributions are implementation-defined, so the integer and
/// real draws here are written out explicitly on top of mt19937_64. Every
/// seeded operation in the toolkit (sampling, shuffling, noise, augmentation)
/// goes through this type, which keeps results identical across standard
/// libraries.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  // Uniform real in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// 64-bit FNV-1a; stable across platforms, used to derive per-key seeds.
constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream for (base seed, key). Used wherever a draw must not
// depend on iteration or completion order.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view key) {
  return splitmix64(base ^ splitmix64(fnv1a64(key)));
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

}  // namespace fsre
