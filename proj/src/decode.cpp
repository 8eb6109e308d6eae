// SPDX-License-Identifier: Apache-2.0
#include "sclm/decode.hpp"

#include <algorithm>
#include <cmath>

#include "sclm/errors.hpp"

namespace sclm {

double length_penalty(int64_t emitted, double alpha) {
  return std::pow((5.0 + static_cast<double>(emitted)) / 6.0, alpha);
}

namespace {

bool is_stop(const std::vector<TokenId>& stop, TokenId t) {
  return std::find(stop.begin(), stop.end(), t) != stop.end();
}

}  // namespace

std::vector<TokenId> greedy_decode(const StepScorer& score,
                                   const DecodeOptions& opt) {
  if (opt.max_new < 0) throw ContractError("greedy_decode: negative max_new");
  std::vector<TokenId> out;
  for (int32_t i = 0; i < opt.max_new; ++i) {
    const std::vector<double> lp = score(out);
    if (lp.empty()) throw ContractError("greedy_decode: empty score vector");
    size_t best = 0;
    for (size_t j = 1; j < lp.size(); ++j)
      if (lp[j] > lp[best]) best = j;  // strict: ties keep the lowest id
    const TokenId tok = static_cast<TokenId>(best);
    if (is_stop(opt.stop, tok)) break;
    out.push_back(tok);
  }
  return out;
}

std::vector<TokenId> beam_search(const StepScorer& score,
                                 const DecodeOptions& opt) {
  if (opt.beam_size < 1) throw ContractError("beam_search: beam size must be >= 1");
  if (opt.max_new < 0) throw ContractError("beam_search: negative max_new");
  const size_t B = static_cast<size_t>(opt.beam_size);

  struct Hyp {
    std::vector<TokenId> toks;
    double cum = 0.0;
  };
  struct Done {
    std::vector<TokenId> toks;
    double score = 0.0;
  };
  std::vector<Hyp> active{Hyp{}};
  std::vector<Done> done;

  int32_t step = 0;
  for (; step < opt.max_new; ++step) {
    if (done.size() >= B || active.empty()) break;

    struct Cand {
      double cum;
      TokenId tok;
      size_t parent;
    };
    std::vector<Cand> cands;
    for (size_t p = 0; p < active.size(); ++p) {
      const std::vector<double> lp = score(active[p].toks);
      if (lp.empty()) throw ContractError("beam_search: empty score vector");
      cands.reserve(cands.size() + lp.size());
      for (size_t t = 0; t < lp.size(); ++t)
        cands.push_back({active[p].cum + lp[t], static_cast<TokenId>(t), p});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      if (a.cum != b.cum) return a.cum > b.cum;
      if (a.tok != b.tok) return a.tok < b.tok;
      return a.parent < b.parent;
    });

    std::vector<Hyp> next;
    const size_t keep = std::min(B, cands.size());
    for (size_t i = 0; i < keep; ++i) {
      const Cand& c = cands[i];
      if (is_stop(opt.stop, c.tok)) {
        const int64_t len = static_cast<int64_t>(active[c.parent].toks.size()) + 1;
        done.push_back({active[c.parent].toks, c.cum / length_penalty(len, opt.alpha)});
      } else {
        Hyp h = active[c.parent];
        h.toks.push_back(c.tok);
        h.cum = c.cum;
        next.push_back(std::move(h));
      }
    }
    active = std::move(next);
  }

  // Hypotheses still growing when the budget ran out complete as-is. (When
  // the search ended early because B hypotheses finished, the remaining
  // prefixes are simply abandoned.)
  if (step == opt.max_new)
    for (const Hyp& h : active)
      done.push_back({h.toks,
                      h.cum / length_penalty(static_cast<int64_t>(h.toks.size()),
                                             opt.alpha)});

  const Done* best = &done.front();
  for (const Done& d : done)
    if (d.score > best->score ||
        (d.score == best->score &&
         std::lexicographical_compare(d.toks.begin(), d.toks.end(),
                                      best->toks.begin(), best->toks.end())))
      best = &d;
  return best->toks;
}

}  // namespace sclm
