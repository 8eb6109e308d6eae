// SPDX-License-Identifier: Apache-2.0
//
// Central-difference gradient checking against reverse-mode results.
// `build` must construct the loss graph from scratch on the given tape and
// be deterministic across calls (re-derive any RandomSource inside it).

#pragma once

#include <cmath>
#include <vector>

#include "sclm/tensor.hpp"

namespace sclm::testing {

// The denominator floor reflects the resolution of central differences at
// h=1e-5 on an O(1) loss in 64-bit: each ulp of the loss contributes about
// 1e-11 to the quotient, so derivatives below ~1e-9 are pure roundoff. With
// the floor at 1e-6, gradients the method can resolve still need 0.1%
// agreement, and sub-resolution ones must agree to 1e-9 absolute.
inline double grad_rel_err(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

template <class Build>
double fd_max_rel_err(const std::vector<TensorPtr<double>>& leaves, Build build,
                      double h = 1e-5) {
  Tape<double> tape;
  auto loss = build(tape);
  tape.backward(loss);
  std::vector<std::vector<double>> analytic;
  analytic.reserve(leaves.size());
  for (const auto& l : leaves) {
    auto copy = l->g;
    copy.resize(l->v.size(), 0.0);
    analytic.push_back(std::move(copy));
  }
  double worst = 0.0;
  for (size_t li = 0; li < leaves.size(); ++li) {
    auto& leaf = *leaves[li];
    for (size_t i = 0; i < leaf.v.size(); ++i) {
      const double keep = leaf.v[i];
      leaf.v[i] = keep + h;
      Tape<double> tp(false);
      const double fp = build(tp)->v[0];
      leaf.v[i] = keep - h;
      Tape<double> tm(false);
      const double fm = build(tm)->v[0];
      leaf.v[i] = keep;
      const double numeric = (fp - fm) / (2.0 * h);
      worst = std::max(worst, grad_rel_err(analytic[li][i], numeric));
    }
  }
  // restore clean grads for callers that reuse the leaves
  for (const auto& l : leaves) l->g.clear();
  return worst;
}

}  // namespace sclm::testing
