// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"
#include "sclm/random.hpp"

#include <cmath>

using sclm::RandomSource;

TEST_CASE("same seed yields identical streams") {
  RandomSource a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.bits() == b.bits());
}

TEST_CASE("derived streams are decorrelated by index") {
  auto a = RandomSource::derived(7, 0);
  auto b = RandomSource::derived(7, 1);
  bool any_diff = false;
  for (int i = 0; i < 16; ++i) any_diff |= (a.bits() != b.bits());
  CHECK(any_diff);
}

TEST_CASE("uniform stays in [0,1) and is roughly centered") {
  RandomSource r(3);
  double acc = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    acc += u;
  }
  CHECK(std::abs(acc / n - 0.5) < 0.02);
}

TEST_CASE("uniform_int covers the inclusive range") {
  RandomSource r(9);
  bool seen_lo = false, seen_hi = false;
  for (int i = 0; i < 2000; ++i) {
    const int64_t x = r.uniform_int(2, 5);
    REQUIRE(x >= 2);
    REQUIRE(x <= 5);
    seen_lo |= (x == 2);
    seen_hi |= (x == 5);
  }
  CHECK(seen_lo);
  CHECK(seen_hi);
}

TEST_CASE("gaussian has sane first two moments") {
  RandomSource r(11);
  double s1 = 0.0, s2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = r.gaussian();
    s1 += x;
    s2 += x * x;
  }
  CHECK(std::abs(s1 / n) < 0.05);
  CHECK(std::abs(s2 / n - 1.0) < 0.05);
}

TEST_CASE("bernoulli respects probability") {
  RandomSource r(13);
  int hits = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) hits += r.bernoulli(0.25) ? 1 : 0;
  CHECK(std::abs(hits / double(n) - 0.25) < 0.02);
}
