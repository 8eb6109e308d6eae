// SPDX-License-Identifier: Apache-2.0
#include "sclm/masks.hpp"

#include "sclm/errors.hpp"

namespace sclm {

namespace {
VisibilityMask blank(int32_t n) {
  if (n < 1) throw DimensionError("mask: n must be at least 1");
  VisibilityMask m;
  m.n = n;
  m.allow.assign(static_cast<size_t>(n) * static_cast<size_t>(n), 0);
  return m;
}
}  // namespace

VisibilityMask causal_mask(int32_t n) {
  VisibilityMask m = blank(n);
  for (int32_t q = 0; q < n; ++q)
    for (int32_t k = 0; k <= q; ++k) m.allow[static_cast<size_t>(q) * n + k] = 1;
  return m;
}

VisibilityMask noncausal_mask(int32_t n) {
  VisibilityMask m = blank(n);
  std::fill(m.allow.begin(), m.allow.end(), uint8_t{1});
  return m;
}

VisibilityMask prefix_mask(int32_t n, int32_t p) {
  if (p < 0 || p > n) throw DimensionError("prefix_mask: p must be in [0,n]");
  VisibilityMask m = blank(n);
  for (int32_t q = 0; q < n; ++q)
    for (int32_t k = 0; k < n; ++k)
      if ((q < p && k < p) || k <= q) m.allow[static_cast<size_t>(q) * n + k] = 1;
  return m;
}

VisibilityMask semicausal_flow(const SpanLayout& layout) {
  validate_layout(layout);
  VisibilityMask m = causal_mask(layout.n);
  for (const Span& sp : layout.spans) {
    // span covers 1-based positions [s, e); mask indices are 0-based
    const int32_t lo = sp.s - 1;
    const int32_t hi = std::min(sp.e - 1, layout.n);
    for (int32_t q = lo; q < hi; ++q)
      for (int32_t k = lo; k < hi; ++k)
        m.allow[static_cast<size_t>(q) * layout.n + k] = 1;
  }
  return m;
}

std::string render_mask(const VisibilityMask& mask) {
  std::string out;
  for (int32_t q = 0; q < mask.n; ++q) {
    for (int32_t k = 0; k < mask.n; ++k) out += mask.at(q, k) ? "█" : "·";
    out += '\n';
  }
  return out;
}

}  // namespace sclm
