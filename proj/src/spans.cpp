// SPDX-License-Identifier: Apache-2.0
#include "sclm/spans.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sclm/errors.hpp"

namespace sclm {

namespace {

// Disjointness with a 1-token causal gap: [s,e) and [s2,e2) conflict when
// neither leaves at least one free position between them.
bool conflicts(int32_t s, int32_t e, const Span& other) {
  return !(e + 1 <= other.s || other.e + 1 <= s);
}

bool inside_one_doc(const PackedSequence& seq, int32_t s, int32_t e) {
  // span positions are 1-based; doc_spans index 0-based ids
  const int32_t lo = s - 1, hi = e - 1;  // [lo,hi) over indices
  for (const Interval& d : seq.doc_spans)
    if (d.begin <= lo && hi <= d.end) return true;
  return false;
}

bool covers_pad(const PackedSequence& seq, int32_t s, int32_t e) {
  for (int32_t i = s - 1; i < e - 1; ++i)
    if (seq.ids[static_cast<size_t>(i)] == PAD) return true;
  return false;
}

}  // namespace

SpanLayout sample_spans(const PackedSequence& seq, double ratio, int32_t min_len,
                        int32_t max_len, RandomSource& rng,
                        SpanSampleStats* stats) {
  const int32_t n = static_cast<int32_t>(seq.ids.size());
  if (ratio < 0.0 || ratio >= 1.0)
    throw ContractError("sample_spans: ratio must be in [0,1)");
  if (min_len < 1 || min_len > max_len || max_len >= n)
    throw ContractError("sample_spans: need 1 <= min_len <= max_len < n");

  SpanLayout layout;
  layout.n = n;
  const double budget = ratio * static_cast<double>(non_pad_length(seq));
  int64_t total = 0;
  int64_t attempts = 0;
  const int64_t max_attempts =
      10 * static_cast<int64_t>(std::ceil(budget / static_cast<double>(min_len)));

  while (static_cast<double>(total + min_len) <= budget && attempts < max_attempts) {
    ++attempts;
    const int32_t len = static_cast<int32_t>(rng.uniform_int(min_len, max_len));
    if (static_cast<double>(total + len) > budget) continue;
    const int32_t s = static_cast<int32_t>(rng.uniform_int(2, n - len + 1));
    const int32_t e = s + len;
    bool ok = true;
    for (const Span& sp : layout.spans)
      if (conflicts(s, e, sp)) {
        ok = false;
        break;
      }
    if (ok) ok = inside_one_doc(seq, s, e) && !covers_pad(seq, s, e);
    if (!ok) continue;
    layout.spans.push_back({s, e});
    total += len;
  }
  std::sort(layout.spans.begin(), layout.spans.end(),
            [](const Span& a, const Span& b) { return a.s < b.s; });
  if (stats) {
    stats->budget = budget;
    stats->total = total;
    stats->attempts = attempts;
    stats->rejections = attempts - static_cast<int64_t>(layout.spans.size());
  }
  return layout;
}

std::vector<int32_t> target_positions(const SpanLayout& layout) {
  std::vector<uint8_t> interior(static_cast<size_t>(layout.n) + 1, 0);
  for (const Span& sp : layout.spans)
    for (int32_t t = sp.s + 1; t < sp.e && t <= layout.n; ++t)
      interior[static_cast<size_t>(t)] = 1;
  std::vector<int32_t> targets;
  for (int32_t t = 2; t <= layout.n; ++t)
    if (!interior[static_cast<size_t>(t)]) targets.push_back(t);
  return targets;
}

int32_t prediction_source(const SpanLayout& layout, int32_t t) {
  if (t < 2 || t > layout.n)
    throw ContractError("prediction_source: position out of range");
  for (const Span& sp : layout.spans) {
    if (t == sp.e) return sp.e - 1;  // generated at the span's last position
    if (t > sp.s && t < sp.e)
      throw ContractError("prediction_source: position inside a span is not a target");
  }
  return t - 1;
}

void validate_layout(const SpanLayout& layout, const PackedSequence* seq) {
  if (layout.n < 1) throw ContractError("layout: n must be positive");
  int64_t total = 0;
  for (size_t i = 0; i < layout.spans.size(); ++i) {
    const Span& sp = layout.spans[i];
    if (sp.s < 2) throw ContractError("layout: span may not contain position 1");
    if (sp.e <= sp.s) throw ContractError("layout: empty or inverted span");
    if (sp.e > layout.n + 1) throw ContractError("layout: span exceeds sequence");
    if (i > 0 && layout.spans[i - 1].e + 1 > sp.s)
      throw ContractError("layout: spans must be sorted with a 1-token gap");
    total += sp.e - sp.s;
  }
  if (total > layout.n) throw ContractError("layout: spans exceed sequence length");
  if (seq) {
    if (static_cast<int32_t>(seq->ids.size()) != layout.n)
      throw ContractError("layout: n differs from sequence length");
    for (const Span& sp : layout.spans) {
      if (!inside_one_doc(*seq, sp.s, sp.e))
        throw ContractError("layout: span crosses a document boundary");
      if (covers_pad(*seq, sp.s, sp.e))
        throw ContractError("layout: span covers PAD");
    }
  }
}

std::string format_layout(int64_t seq_idx, const SpanLayout& layout) {
  std::ostringstream out;
  out << seq_idx << ":";
  for (const Span& sp : layout.spans) out << " [" << sp.s << "," << sp.e << ")";
  return out.str();
}

}  // namespace sclm
