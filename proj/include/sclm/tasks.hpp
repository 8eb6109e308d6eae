// SPDX-License-Identifier: Apache-2.0
//
// Synthetic evaluation tasks and their on-disk format: one JSON record per
// line with fields `demos` (list of {input, label}), `test_input`, `gold`.
//
// kv-recall: each episode binds a few two-letter keys to one-letter values
// ("nq=" -> "m"); the test input repeats one of the demonstrated keys, so
// the answer is recoverable from the demonstrations alone. The companion
// corpus generator emits documents of "key=value" paragraphs whose keys
// recur with document-consistent values (and vary across documents), so a
// pretrained model can only resolve a repeated key from its own context.
//
// toy-classify: 7-character x/o strings labelled by their majority symbol.

#pragma once

#include <string>
#include <vector>

#include "sclm/random.hpp"

namespace sclm {

struct TaskDemo {
  std::string input;
  std::string label;
  bool operator==(const TaskDemo&) const = default;
};

struct TaskRecord {
  std::vector<TaskDemo> demos;
  std::string test_input;
  std::string gold;
  bool operator==(const TaskRecord&) const = default;
};

// Key-value recall episodes with `demos_per` distinct keys each. Corpus keys
// start with a-m; heldout keys start with n-z, so heldout episodes never
// collide with generated corpus bindings.
std::vector<TaskRecord> gen_kv_recall(RandomSource& rng, int32_t episodes,
                                      int32_t demos_per, bool heldout);

// True when the gold answer is derivable from the demonstrations alone: some
// demo input equals the test input, and every such demo carries the gold
// label (no ambiguous bindings).
bool kv_episode_solvable(const TaskRecord& rec);

// Pretraining documents for the kv-recall pattern: each document introduces
// `keys_per_doc` distinct keys and repeats every "key=value" paragraph
// (1 + repeats) times in shuffled order.
std::vector<std::vector<std::string>> gen_kv_corpus(RandomSource& rng,
                                                    int32_t docs,
                                                    int32_t keys_per_doc,
                                                    int32_t repeats);

// Two-class majority classification with textual labels "x" / "o".
std::vector<TaskRecord> gen_toy_classify(RandomSource& rng, int32_t episodes,
                                         int32_t demos_per);

// Majority symbol of an x/o string; the gold label for toy-classify inputs.
std::string classify_label(const std::string& input);

std::string record_to_json(const TaskRecord& rec);
TaskRecord record_from_json(const std::string& line);

void write_task_file(const std::string& path,
                     const std::vector<TaskRecord>& records);
std::vector<TaskRecord> read_task_file(const std::string& path);

}  // namespace sclm
