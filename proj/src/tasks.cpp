// SPDX-License-Identifier: Apache-2.0
#include "sclm/tasks.hpp"

#include <fstream>
#include <set>
#include <utility>

#include "json.hpp"
#include "sclm/errors.hpp"

namespace sclm {

namespace {

using nlohmann::json;

std::string make_key(RandomSource& rng, bool heldout) {
  const char first = static_cast<char>((heldout ? 'n' : 'a') + rng.uniform_int(0, 12));
  const char second = static_cast<char>('a' + rng.uniform_int(0, 25));
  return std::string{first, second};
}

char make_value(RandomSource& rng) {
  return static_cast<char>('a' + rng.uniform_int(0, 25));
}

}  // namespace

std::vector<TaskRecord> gen_kv_recall(RandomSource& rng, int32_t episodes,
                                      int32_t demos_per, bool heldout) {
  if (episodes < 1 || demos_per < 1)
    throw ContractError("gen_kv_recall: counts must be positive");
  std::vector<TaskRecord> out;
  out.reserve(static_cast<size_t>(episodes));
  for (int32_t e = 0; e < episodes; ++e) {
    TaskRecord rec;
    std::set<std::string> used;
    while (static_cast<int32_t>(rec.demos.size()) < demos_per) {
      const std::string key = make_key(rng, heldout);
      if (!used.insert(key).second) continue;
      rec.demos.push_back({key + "=", std::string(1, make_value(rng))});
    }
    const auto pick = static_cast<size_t>(rng.uniform_int(0, demos_per - 1));
    rec.test_input = rec.demos[pick].input;
    rec.gold = rec.demos[pick].label;
    out.push_back(std::move(rec));
  }
  return out;
}

bool kv_episode_solvable(const TaskRecord& rec) {
  bool found = false;
  for (const TaskDemo& d : rec.demos) {
    if (d.input != rec.test_input) continue;
    if (d.label != rec.gold) return false;  // ambiguous or contradictory binding
    found = true;
  }
  return found;
}

std::vector<std::vector<std::string>> gen_kv_corpus(RandomSource& rng,
                                                    int32_t docs,
                                                    int32_t keys_per_doc,
                                                    int32_t repeats) {
  if (docs < 1 || keys_per_doc < 1 || repeats < 0)
    throw ContractError("gen_kv_corpus: counts out of range");
  std::vector<std::vector<std::string>> out;
  out.reserve(static_cast<size_t>(docs));
  for (int32_t d = 0; d < docs; ++d) {
    std::set<std::string> used;
    std::vector<std::pair<std::string, char>> pairs;
    while (static_cast<int32_t>(pairs.size()) < keys_per_doc) {
      const std::string key = make_key(rng, false);
      if (!used.insert(key).second) continue;
      pairs.emplace_back(key, make_value(rng));
    }
    std::vector<std::string> paras;
    for (const auto& [key, value] : pairs)
      for (int32_t r = 0; r <= repeats; ++r)
        paras.push_back(key + "=" + std::string(1, value));
    for (size_t i = paras.size(); i > 1; --i)  // Fisher-Yates
      std::swap(paras[i - 1],
                paras[static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(i) - 1))]);
    out.push_back(std::move(paras));
  }
  return out;
}

std::string classify_label(const std::string& input) {
  int64_t x = 0, o = 0;
  for (char c : input) {
    if (c == 'x') ++x;
    if (c == 'o') ++o;
  }
  if (x == o) throw ContractError("classify_label: no majority symbol");
  return x > o ? "x" : "o";
}

std::vector<TaskRecord> gen_toy_classify(RandomSource& rng, int32_t episodes,
                                         int32_t demos_per) {
  if (episodes < 1 || demos_per < 0)
    throw ContractError("gen_toy_classify: counts out of range");
  auto sample_input = [&rng]() {
    const bool x_major = rng.bernoulli(0.5);
    const char hi = x_major ? 'x' : 'o';
    const auto hi_count = rng.uniform_int(4, 7);
    std::string s(7, x_major ? 'o' : 'x');
    std::vector<size_t> idx{0, 1, 2, 3, 4, 5, 6};
    for (int64_t i = 0; i < hi_count; ++i) {
      const auto j = static_cast<size_t>(rng.uniform_int(i, 6));
      std::swap(idx[static_cast<size_t>(i)], idx[j]);
      s[idx[static_cast<size_t>(i)]] = hi;
    }
    return s;
  };
  std::vector<TaskRecord> out;
  out.reserve(static_cast<size_t>(episodes));
  for (int32_t e = 0; e < episodes; ++e) {
    TaskRecord rec;
    for (int32_t d = 0; d < demos_per; ++d) {
      const std::string input = sample_input();
      rec.demos.push_back({input, classify_label(input)});
    }
    rec.test_input = sample_input();
    rec.gold = classify_label(rec.test_input);
    out.push_back(std::move(rec));
  }
  return out;
}

std::string record_to_json(const TaskRecord& rec) {
  json j;
  j["demos"] = json::array();
  for (const TaskDemo& d : rec.demos)
    j["demos"].push_back({{"input", d.input}, {"label", d.label}});
  j["test_input"] = rec.test_input;
  j["gold"] = rec.gold;
  return j.dump();
}

TaskRecord record_from_json(const std::string& line) {
  try {
    const json j = json::parse(line);
    TaskRecord rec;
    for (const auto& d : j.at("demos"))
      rec.demos.push_back({d.at("input").get<std::string>(),
                           d.at("label").get<std::string>()});
    rec.test_input = j.at("test_input").get<std::string>();
    rec.gold = j.at("gold").get<std::string>();
    return rec;
  } catch (const json::exception& e) {
    throw ParseError(std::string("task record: ") + e.what());
  }
}

void write_task_file(const std::string& path,
                     const std::vector<TaskRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open task file for writing: " + path);
  for (const TaskRecord& rec : records) out << record_to_json(rec) << "\n";
  if (!out) throw IoError("failed writing task file: " + path);
}

std::vector<TaskRecord> read_task_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open task file: " + path);
  std::vector<TaskRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(record_from_json(line));
  }
  return out;
}

}  // namespace sclm
