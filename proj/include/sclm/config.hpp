// SPDX-License-Identifier: Apache-2.0
//
// Flat key=value run configuration with [section] headers. The canonical
// serialization is byte-stable for identical configs, so its checksum can
// anchor checkpoint provenance.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "sclm/model.hpp"

namespace sclm {

struct SamplerConfig {
  double ratio = 0.25;
  int32_t min_len = 8;
  int32_t max_len = 16;
};

struct ScheduleConfig {
  double peak_lr = 1e-3;
  int64_t warmup = 100;
  int64_t total_steps = 1000;
};

enum class FreezePolicy { Pretrain, SingleTask, Full };

struct TrainConfig {
  int32_t batch = 4;
  int64_t steps = 500;
  int64_t checkpoint_every = 0;  // 0 = only final
  double weight_decay = 0.01;
  double clip_norm = 1.0;
  FreezePolicy policy = FreezePolicy::Full;
  uint64_t seed = 1;
};

struct EvalConfig {
  std::string decode = "greedy";  // greedy|beam
  int32_t beam_size = 4;
  double alpha = 0.6;
  int32_t k = 0;
  int32_t max_new = 16;
};

struct RunConfig {
  ModelConfig model;
  SamplerConfig sampler;
  ScheduleConfig schedule;
  TrainConfig train;
  EvalConfig eval;
};

std::string policy_name(FreezePolicy p);
FreezePolicy parse_policy(std::string_view s);

// Fixed section/key order, normalized numerals: same config -> same bytes.
std::string canonical_config_text(const RunConfig& cfg);
RunConfig parse_config_text(std::string_view text);
RunConfig load_config_file(const std::string& path);

uint64_t fnv1a64(std::string_view bytes);
std::string config_checksum(const RunConfig& cfg);  // 16 hex chars

}  // namespace sclm
