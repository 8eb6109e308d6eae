// SPDX-License-Identifier: Apache-2.0
//
// Wires a model into the decoding loop: a StepScorer that re-runs the
// forward pass on episode-plus-suffix each step, and a per-task evaluation
// driver producing mean exact-match / F1 reports.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "sclm/decode.hpp"
#include "sclm/episodes.hpp"
#include "sclm/metrics.hpp"
#include "sclm/model.hpp"

namespace sclm {

// Log-probabilities for the next token after episode + suffix. The episode
// is captured by value; the model must outlive the scorer. Scoring runs on a
// gradient-disabled tape and normalizes in double precision.
template <class S>
StepScorer make_model_scorer(const MetaLM<S>& model, const EvalEpisode& ep) {
  return [&model, ep](const std::vector<TokenId>& suffix) -> std::vector<double> {
    PackedSequence seq = ep.seq;
    seq.ids.insert(seq.ids.end(), suffix.begin(), suffix.end());
    seq.doc_spans = {{0, static_cast<int32_t>(seq.ids.size())}};
    const SpanLayout layout{static_cast<int32_t>(seq.ids.size()), ep.layout.spans};

    Tape<S> tape(false);
    const auto logits = model.logits_for(tape, seq, layout);
    const int64_t v = logits->shape[1];
    const S* row = logits->v.data() + (logits->shape[0] - 1) * v;

    double m = static_cast<double>(row[0]);
    for (int64_t j = 1; j < v; ++j) m = std::max(m, static_cast<double>(row[j]));
    double sum = 0.0;
    for (int64_t j = 0; j < v; ++j) sum += std::exp(static_cast<double>(row[j]) - m);
    const double lse = m + std::log(sum);

    std::vector<double> out(static_cast<size_t>(v));
    for (int64_t j = 0; j < v; ++j)
      out[static_cast<size_t>(j)] = static_cast<double>(row[j]) - lse;
    return out;
  };
}

// Decodes one episode; max_new is clamped so the sequence never exceeds the
// decoder's maximum length.
template <class S>
EpisodeOutcome run_episode(const MetaLM<S>& model, const EvalEpisode& ep,
                           const DecodeOptions& opt, bool beam) {
  DecodeOptions clamped = opt;
  clamped.max_new =
      std::min<int32_t>(opt.max_new, model.config().dec.n_max - ep.cutoff);
  const StepScorer scorer = make_model_scorer(model, ep);
  EpisodeOutcome out;
  out.pred = beam ? beam_search(scorer, clamped) : greedy_decode(scorer, clamped);
  out.em = exact_match(out.pred, ep.gold);
  out.f1 = token_f1(out.pred, ep.gold);
  return out;
}

template <class S>
EvalReport run_task_eval(const MetaLM<S>& model,
                         const std::vector<TaskRecord>& records, int32_t k,
                         const DecodeOptions& opt, bool beam) {
  EvalReport rep;
  rep.k = k;
  rep.decode = beam ? "beam" : "greedy";
  rep.episodes = records.size();
  for (const TaskRecord& rec : records) {
    const EvalEpisode ep = episode_from_record(rec, k, model.config().dec.n_max);
    EpisodeOutcome out = run_episode(model, ep, opt, beam);
    rep.em += out.em;
    rep.f1 += out.f1;
    rep.rows.push_back(std::move(out));
  }
  if (!records.empty()) {
    rep.em /= static_cast<double>(records.size());
    rep.f1 /= static_cast<double>(records.size());
  }
  return rep;
}

}  // namespace sclm
