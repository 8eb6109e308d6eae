// SPDX-License-Identifier: Apache-2.0
//
// k-shot in-context episodes: each demonstration input and the test input
// become bidirectionally-encoded spans; labels and the EOP delimiters between
// examples stay plain causal tokens. Generation starts right after the test
// span. Assembly is a pure function of its arguments.
//
// Layout of a k=2 episode ('#' = span, '.' = plain):
//   <s> input1 label1 </s> input2 label2 </s> test_input
//    .  ######   ...    .  ######   ...    .   #########^-- cutoff

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sclm/packing.hpp"
#include "sclm/spans.hpp"
#include "sclm/tasks.hpp"
#include "sclm/vocab.hpp"

namespace sclm {

struct DemoIds {
  std::vector<TokenId> input;
  std::vector<TokenId> label;
};

struct EvalEpisode {
  PackedSequence seq;          // assembled tokens, one document span
  SpanLayout layout;           // one span per demo input plus the test input
  std::vector<TokenId> gold;
  int32_t cutoff = 0;          // assembled length; generation appends after it
};

// Preconditions: k == demos.size(); inputs and labels are non-empty plain
// byte tokens; assembled length fits n_max. Violations raise ContractError.
EvalEpisode build_icl_episode(const std::vector<DemoIds>& demos,
                              const std::vector<TokenId>& test_input,
                              const std::vector<TokenId>& gold, int32_t k,
                              int32_t n_max);

// Encodes the first k stored demonstrations of a task record into an episode.
EvalEpisode episode_from_record(const TaskRecord& rec, int32_t k, int32_t n_max);

struct EpisodeOutcome {
  std::vector<TokenId> pred;
  double em = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  std::string task;
  std::string decode = "greedy";
  int32_t k = 0;
  size_t episodes = 0;
  double em = 0.0;  // means over episodes
  double f1 = 0.0;
  std::string config_checksum;
  uint64_t seed = 0;
  std::vector<EpisodeOutcome> rows;

  // Summary line plus one machine-readable line per episode.
  std::string to_text() const;
};

}  // namespace sclm
