// SPDX-License-Identifier: Apache-2.0
#include "sclm/episodes.hpp"

#include <sstream>

#include "sclm/errors.hpp"

namespace sclm {

namespace {

void check_content(const std::vector<TokenId>& ids, const char* what) {
  if (ids.empty())
    throw ContractError(std::string("build_icl_episode: empty ") + what);
  for (TokenId id : ids)
    if (id < 0 || id >= BOS)
      throw ContractError(std::string("build_icl_episode: non-byte id in ") + what);
}

}  // namespace

EvalEpisode build_icl_episode(const std::vector<DemoIds>& demos,
                              const std::vector<TokenId>& test_input,
                              const std::vector<TokenId>& gold, int32_t k,
                              int32_t n_max) {
  if (k != static_cast<int32_t>(demos.size()))
    throw ContractError("build_icl_episode: k must equal the demonstration count");

  std::vector<TokenId> ids = {BOS};
  std::vector<Span> spans;
  for (const DemoIds& d : demos) {
    check_content(d.input, "demonstration input");
    check_content(d.label, "demonstration label");
    const int32_t s = static_cast<int32_t>(ids.size()) + 1;  // 1-based
    ids.insert(ids.end(), d.input.begin(), d.input.end());
    spans.push_back({s, s + static_cast<int32_t>(d.input.size())});
    ids.insert(ids.end(), d.label.begin(), d.label.end());
    ids.push_back(EOP);
  }
  check_content(test_input, "test input");
  const int32_t s = static_cast<int32_t>(ids.size()) + 1;
  ids.insert(ids.end(), test_input.begin(), test_input.end());
  spans.push_back({s, s + static_cast<int32_t>(test_input.size())});

  if (static_cast<int32_t>(ids.size()) > n_max)
    throw ContractError("build_icl_episode: episode exceeds the decoder maximum");

  EvalEpisode ep;
  ep.cutoff = static_cast<int32_t>(ids.size());
  ep.seq.ids = std::move(ids);
  ep.seq.doc_spans = {{0, static_cast<int32_t>(ep.seq.ids.size())}};
  ep.layout = {static_cast<int32_t>(ep.seq.ids.size()), std::move(spans)};
  validate_layout(ep.layout, &ep.seq);
  ep.gold = gold;
  return ep;
}

EvalEpisode episode_from_record(const TaskRecord& rec, int32_t k, int32_t n_max) {
  if (k < 0 || k > static_cast<int32_t>(rec.demos.size()))
    throw ContractError("episode_from_record: k exceeds the stored demonstrations");
  std::vector<DemoIds> demos;
  demos.reserve(static_cast<size_t>(k));
  for (int32_t i = 0; i < k; ++i)
    demos.push_back({encode(rec.demos[static_cast<size_t>(i)].input),
                     encode(rec.demos[static_cast<size_t>(i)].label)});
  return build_icl_episode(demos, encode(rec.test_input), encode(rec.gold), k,
                           n_max);
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  out << "task=" << (task.empty() ? "-" : task) << " decode=" << decode
      << " k=" << k << " episodes=" << episodes << " em=" << em << " f1=" << f1
      << " config_checksum=" << (config_checksum.empty() ? "-" : config_checksum)
      << " seed=" << seed << "\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    out << "episode " << i << ": em=" << rows[i].em << " f1=" << rows[i].f1
        << " pred=" << render_tokens(rows[i].pred) << "\n";
  }
  return out.str();
}

}  // namespace sclm
