// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sclm {

// splitmix64, used to derive independent stream seeds from (seed, index)
// pairs without correlated low bits.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Seeded random source with pinned output distributions. std::mt19937_64 is
// specified by the standard, but the std distributions are not, so uniform
// and gaussian draws are derived here by hand to keep runs reproducible.
class RandomSource {
 public:
  explicit RandomSource(uint64_t seed) : engine_(seed) {}

  static RandomSource derived(uint64_t seed, uint64_t a, uint64_t b = 0) {
    return RandomSource(mix64(seed ^ mix64(a ^ mix64(b))));
  }

  uint64_t bits() { return engine_(); }

  // Uniform in [0, 1) with 53 significant bits.
  double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi] inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int64_t>(static_cast<uint64_t>(uniform() * static_cast<double>(span)) % span);
  }

  // Standard normal via Box-Muller; one cached draw.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sclm
