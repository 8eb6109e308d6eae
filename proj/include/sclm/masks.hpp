// SPDX-License-Identifier: Apache-2.0
//
// Attention-visibility relations for the four language-modeling variants and
// the composite semi-causal information-flow oracle. Masks are dense n x n
// booleans indexed [query][key], 0-based.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sclm/spans.hpp"

namespace sclm {

struct VisibilityMask {
  int32_t n = 0;
  std::vector<uint8_t> allow;  // row-major n*n; allow[q*n+k]

  bool at(int32_t q, int32_t k) const {
    return allow[static_cast<size_t>(q) * static_cast<size_t>(n) +
                 static_cast<size_t>(k)] != 0;
  }
  bool operator==(const VisibilityMask&) const = default;
};

VisibilityMask causal_mask(int32_t n);
VisibilityMask noncausal_mask(int32_t n);

// Positions < p mutually visible, positions >= p causal over everything
// before them. p == 0 is causal, p == n non-causal.
VisibilityMask prefix_mask(int32_t n, int32_t p);

// Composite information-flow of the full stack: query q may be influenced by
// key k iff k <= q or both lie in the same span. Test oracle only — the
// runtime decoder uses causal_mask and bidirectionality enters through
// encoder outputs.
VisibilityMask semicausal_flow(const SpanLayout& layout);

// Rows are queries; '█' allowed, '·' blocked.
std::string render_mask(const VisibilityMask& mask);

}  // namespace sclm
