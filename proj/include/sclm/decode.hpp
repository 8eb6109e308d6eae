// SPDX-License-Identifier: Apache-2.0
//
// Greedy and beam decoding over an abstract next-token scorer. The scorer
// closes over whatever prompt/model state it needs and maps the tokens
// generated so far to log-probabilities for the next one, which keeps both
// search procedures testable against hand-set tables and brute force.

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sclm/vocab.hpp"

namespace sclm {

// Log-probabilities over the scorer's vocabulary for the next token, given
// the tokens emitted so far. The vocabulary size is the returned length.
using StepScorer =
    std::function<std::vector<double>(const std::vector<TokenId>&)>;

struct DecodeOptions {
  int32_t max_new = 16;
  int32_t beam_size = 4;
  double alpha = 0.6;                    // length-penalty exponent
  std::vector<TokenId> stop = {EOP, EOD};
};

// lp(Y) = ((5 + |Y|) / 6)^alpha. |Y| counts every emitted token including a
// terminating stop token; a hypothesis cut off at the generation limit
// counts only the tokens it actually emitted.
double length_penalty(int64_t emitted, double alpha);

// Iteratively appends the argmax token (ties broken by lowest token id) and
// stops at a stop token or after max_new tokens. Stop tokens are not part of
// the returned sequence.
std::vector<TokenId> greedy_decode(const StepScorer& score,
                                   const DecodeOptions& opt);

// Length-penalized beam search: hypotheses are ranked by cumulative
// log-probability while growing and by cum/lp(|Y|) once complete. A
// hypothesis completes when it emits a stop token or reaches max_new. The
// search ends once beam_size hypotheses have completed (or the budget is
// exhausted) and returns the best completed hypothesis; candidate ties break
// by token id then parent hypothesis index, final ties by lexicographically
// smaller token sequence. With beam_size == 1 this reduces exactly to
// greedy_decode.
std::vector<TokenId> beam_search(const StepScorer& score,
                                 const DecodeOptions& opt);

}  // namespace sclm
