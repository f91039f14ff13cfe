#pragma once

#include <bit>
#include <cstdint>
#include <random>
#include <utility>

namespace obell {

/// SplitMix64 finalizer. Bijective on 64-bit words; used to decorrelate
/// derived seeds.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Split rule for independent streams: child = mix64(parent ^ mix64(key)).
/// Applying it repeatedly (master -> cell -> setting pair) gives every stream
/// a seed that depends only on its own keys, never on scheduling order.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t key) {
  return mix64(parent ^ mix64(key));
}

/// Key for a real-valued coordinate (e.g. a sweep cell's gamma or eta).
[[nodiscard]] inline std::uint64_t coordinate_key(double x) {
  return std::bit_cast<std::uint64_t>(x == 0.0 ? 0.0 : x);
}

/// Seeded 64-bit Mersenne Twister with a portable uniform draw. One stream
/// per task; streams are not shared across threads.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits. Bit-identical across platforms,
  /// unlike std::uniform_real_distribution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n) by rejection, n > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  /// Fisher-Yates shuffle with this stream (portable, unlike std::shuffle).
  template <typename Container>
  void shuffle(Container& c) {
    for (std::size_t i = c.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(c[i - 1], c[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace obell
