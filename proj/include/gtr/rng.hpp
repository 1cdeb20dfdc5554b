#pragma once

// Seed splitting and a portable random stream.
//
// A run has one root seed. Every consumer (environment deals, policy init,
// token sampling, blackjack dealer, ...) draws from its own child stream whose
// seed is derive_seed(root, name[, index]). The derivation is a fixed integer
// mix so any language can reproduce it:
//
//   fnv1a64(s)        = standard 64-bit FNV-1a over the bytes of s
//   mix64(z)          = splitmix64 finalizer
//                       z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//                       z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//                       z ^ (z >> 31)
//   derive(root, n)   = mix64(root ^ mix64(fnv1a64(n)))
//   derive(root, n, i)= mix64(derive(root, n) + (i + 1) * 0x9E3779B97F4A7C15)
//
// Test vectors live in tests/test_rng.cpp. Streams are std::mt19937_64 (its
// output sequence is fixed by the standard); bounded integers and unit reals
// are derived by hand because std distributions are implementation-defined.

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace gtr {

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view name) {
  return mix64(root ^ mix64(fnv1a64(name)));
}

constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view name,
                                    std::uint64_t index) {
  return mix64(derive_seed(root, name) + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi], by rejection so every value is equally likely.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return lo + static_cast<std::int64_t>(engine_());
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
  }

  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(n) - 1));
  }

  // Normal variate via Box-Muller (one value per call; the pair partner is dropped
  // so the stream position does not depend on call history).
  double normal(double mean = 0.0, double stddev = 1.0);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gtr
