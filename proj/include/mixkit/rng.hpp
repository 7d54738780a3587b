#pragma once

#include <cstdint>

namespace mixkit {

// xoshiro256++ (Blackman/Vigna, public domain), seeded through splitmix64.
// Integer-only state transitions keep streams bit-identical across platforms,
// which the dataset determinism guarantee relies on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  /// Uniform integer in [0, n); n must be > 0.
  std::uint64_t bounded(std::uint64_t n) { return next() % n; }

  /// Zero-mean, unit-variance deviate via a 12-fold uniform sum. Avoids libm,
  /// which is all the symmetry-breaking init noise needs.
  double gaussian() {
    double acc = 0.0;
    for (int i = 0; i < 12; ++i) acc += uniform();
    return acc - 6.0;
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Stable sub-seed derivation, used to key per-example generators.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t index) {
    std::uint64_t x = seed;
    std::uint64_t a = splitmix64(x);
    x ^= stream * 0x9e3779b97f4a7c15ULL;
    std::uint64_t b = splitmix64(x);
    x ^= index + 0x632be59bd9b4e019ULL;
    std::uint64_t c = splitmix64(x);
    return a ^ rotl(b, 17) ^ rotl(c, 41);
  }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace mixkit
