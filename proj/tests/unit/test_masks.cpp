// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"
#include "sclm/masks.hpp"
#include "sclm/errors.hpp"

using namespace sclm;

TEST_CASE("causal mask is lower-triangular inclusive") {
  auto m1 = causal_mask(1);
  CHECK(m1.at(0, 0));
  auto m = causal_mask(3);
  CHECK(render_mask(m) == "█··\n██·\n███\n");
  for (int32_t n : {2, 17, 64}) {
    auto c = causal_mask(n);
    for (int32_t q = 0; q < n; ++q)
      for (int32_t k = 0; k < n; ++k) CHECK(c.at(q, k) == (k <= q));
  }
  CHECK_THROWS_AS(causal_mask(0), DimensionError);
}

TEST_CASE("noncausal mask is total and symmetric") {
  for (int32_t n : {1, 3, 64}) {
    auto m = noncausal_mask(n);
    for (int32_t q = 0; q < n; ++q)
      for (int32_t k = 0; k < n; ++k) {
        CHECK(m.at(q, k));
        CHECK(m.at(q, k) == m.at(k, q));
      }
  }
}

TEST_CASE("prefix mask interpolates between causal and noncausal") {
  CHECK(prefix_mask(5, 0) == causal_mask(5));
  CHECK(prefix_mask(5, 5) == noncausal_mask(5));
  auto m = prefix_mask(4, 2);
  // 1-based reading: row 1 sees {1,2}; row 3 sees {1,2,3}
  CHECK(m.at(0, 0));
  CHECK(m.at(0, 1));
  CHECK_FALSE(m.at(0, 2));
  CHECK_FALSE(m.at(0, 3));
  CHECK(m.at(2, 0));
  CHECK(m.at(2, 1));
  CHECK(m.at(2, 2));
  CHECK_FALSE(m.at(2, 3));
  CHECK_THROWS_AS(prefix_mask(4, 5), DimensionError);
  CHECK_THROWS_AS(prefix_mask(4, -1), DimensionError);
}

TEST_CASE("semi-causal flow of an empty layout is exactly causal") {
  CHECK(semicausal_flow(SpanLayout{9, {}}) == causal_mask(9));
}

TEST_CASE("span members become mutually visible") {
  auto m = semicausal_flow(SpanLayout{6, {{3, 5}}});
  // 1-based positions: 3 sees {1,2,3,4}; 4 sees {1..4}; 5 sees {1..5}
  for (int32_t k = 0; k < 6; ++k) CHECK(m.at(2, k) == (k <= 3));
  for (int32_t k = 0; k < 6; ++k) CHECK(m.at(3, k) == (k <= 3));
  for (int32_t k = 0; k < 6; ++k) CHECK(m.at(4, k) == (k <= 4));
}

TEST_CASE("causal positions never see future spans") {
  for (uint64_t trial = 0; trial < 100; ++trial) {
    RandomSource rng = RandomSource::derived(31337, trial);
    const int32_t n = static_cast<int32_t>(rng.uniform_int(4, 64));
    SpanLayout L{n, {}};
    int32_t cursor = 2;
    while (cursor + 3 <= n + 1) {
      if (rng.uniform() < 0.5) {
        const int32_t len = static_cast<int32_t>(
            rng.uniform_int(2, std::min<int64_t>(6, n + 1 - cursor)));
        L.spans.push_back({cursor, cursor + len});
        cursor += len + 1;
      } else {
        ++cursor;
      }
    }
    auto m = semicausal_flow(L);
    std::vector<bool> in_span(static_cast<size_t>(n), false);
    for (const Span& sp : L.spans)
      for (int32_t q = sp.s - 1; q < sp.e - 1; ++q) in_span[static_cast<size_t>(q)] = true;
    for (int32_t q = 0; q < n; ++q) {
      bool row_any = false;
      for (int32_t k = 0; k < n; ++k) {
        row_any |= m.at(q, k);
        if (!in_span[static_cast<size_t>(q)] && m.at(q, k)) CHECK(k <= q);
        if (k <= q) CHECK(m.at(q, k));  // reflexive and causal-inclusive
      }
      CHECK(row_any);
    }
  }
}
