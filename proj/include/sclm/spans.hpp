// SPDX-License-Identifier: Apache-2.0
//
// Non-causal span layouts over packed sequences and the target-position
// bookkeeping of the semi-causal objective. Span positions are 1-based
// half-open [s,e) so they read like the objective's indices; doc_spans on
// PackedSequence stay 0-based.

#pragma once

#include <string>
#include <vector>

#include "sclm/packing.hpp"
#include "sclm/random.hpp"

namespace sclm {

struct Span {
  int32_t s = 0;  // first covered position, 1-based
  int32_t e = 0;  // one past the last covered position
  bool operator==(const Span&) const = default;
};

struct SpanLayout {
  int32_t n = 0;
  std::vector<Span> spans;  // sorted, pairwise disjoint with a 1-token gap
};

struct SpanSampleStats {
  double budget = 0.0;   // ratio * non-pad length
  int64_t total = 0;     // accepted span tokens
  int64_t attempts = 0;
  int64_t rejections = 0;
};

// Greedy rejection sampling: draw (length, start) uniformly, accept when the
// candidate fits the remaining budget, keeps a 1-token gap to accepted spans,
// stays inside one doc_span, covers no PAD and excludes position 1 (BOS).
// Stops when the remaining budget cannot fit min_len or after 10 * ceil(budget
// / min_len) attempts. A sparse or empty layout is a valid outcome.
SpanLayout sample_spans(const PackedSequence& seq, double ratio, int32_t min_len,
                        int32_t max_len, RandomSource& rng,
                        SpanSampleStats* stats = nullptr);

// Positions t in [2,n] predicted by the objective: everything except strict
// span interiors. The first token after span i is predicted at position e_i-1
// (the span's last position); span starts s_i are predicted causally.
std::vector<int32_t> target_positions(const SpanLayout& layout);

// Decoder position whose hidden state predicts x_t. ContractError when t is
// not a target of this layout.
int32_t prediction_source(const SpanLayout& layout, int32_t t);

// Throws ContractError on a malformed layout; with seq, additionally checks
// document confinement and PAD exclusion.
void validate_layout(const SpanLayout& layout, const PackedSequence* seq = nullptr);

// "idx: [s1,e1) [s2,e2) ..." for CLI inspection.
std::string format_layout(int64_t seq_idx, const SpanLayout& layout);

}  // namespace sclm
