// SPDX-License-Identifier: Apache-2.0
//
// Versioned checkpoint container: magic "SCCK", version, the canonical config
// text, named f32 tensors (optimizer moments under reserved "__opt." name
// prefixes), and the step counter.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sclm {

struct NamedTensor {
  std::string name;
  std::vector<int64_t> shape;
  std::vector<float> data;
};

struct CheckpointData {
  std::string config_text;
  std::vector<NamedTensor> tensors;
  uint64_t step = 0;
};

inline constexpr const char* kOptMomentPrefix1 = "__opt.m.";
inline constexpr const char* kOptMomentPrefix2 = "__opt.v.";

void save_checkpoint_file(const std::string& path, const CheckpointData& data);
CheckpointData load_checkpoint_file(const std::string& path);

}  // namespace sclm
