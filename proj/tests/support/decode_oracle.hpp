// SPDX-License-Identifier: Apache-2.0
//
// Brute-force reference for beam_search: enumerates every possible output
// (stop-terminated prefixes and generation-limit truncations), scores each
// by cumulative log-prob / lp(emitted), and returns the best, breaking score
// ties by lexicographically smaller token sequence. Conventions match
// decode.hpp exactly: the emitted count includes a terminating stop token.

#pragma once

#include <algorithm>
#include <vector>

#include "sclm/decode.hpp"

namespace sclm::testing {

inline std::vector<TokenId> exhaustive_best(const StepScorer& score,
                                            const DecodeOptions& opt) {
  struct Out {
    std::vector<TokenId> toks;
    double score;
  };
  std::vector<Out> outs;

  auto is_stop = [&opt](TokenId t) {
    return std::find(opt.stop.begin(), opt.stop.end(), t) != opt.stop.end();
  };

  // Depth-first over prefixes of non-stop tokens.
  std::vector<TokenId> prefix;
  auto recurse = [&](auto&& self, double cum) -> void {
    const auto len = static_cast<int32_t>(prefix.size());
    if (len == opt.max_new) {  // truncated output
      outs.push_back({prefix, cum / length_penalty(len, opt.alpha)});
      return;
    }
    const std::vector<double> lp = score(prefix);
    for (size_t t = 0; t < lp.size(); ++t) {
      if (is_stop(static_cast<TokenId>(t))) {
        outs.push_back({prefix, (cum + lp[t]) / length_penalty(len + 1, opt.alpha)});
      } else {
        prefix.push_back(static_cast<TokenId>(t));
        self(self, cum + lp[t]);
        prefix.pop_back();
      }
    }
  };
  recurse(recurse, 0.0);

  const Out* best = &outs.front();
  for (const Out& o : outs)
    if (o.score > best->score ||
        (o.score == best->score &&
         std::lexicographical_compare(o.toks.begin(), o.toks.end(),
                                      best->toks.begin(), best->toks.end())))
      best = &o;
  return best->toks;
}

}  // namespace sclm::testing
