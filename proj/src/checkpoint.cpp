// SPDX-License-Identifier: Apache-2.0
#include "sclm/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "sclm/errors.hpp"

namespace sclm {

namespace {

constexpr char kMagic[4] = {'S', 'C', 'C', 'K'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& out, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void put_u64(std::ostream& out, uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw FormatError("checkpoint: truncated file");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw FormatError("checkpoint: truncated file");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

// f32 payloads are written as little-endian words, independent of host order.
void put_f32s(std::ostream& out, const std::vector<float>& xs) {
  for (float x : xs) {
    uint32_t w;
    std::memcpy(&w, &x, 4);
    put_u32(out, w);
  }
}

void get_f32s(std::istream& in, std::vector<float>& xs, size_t count) {
  xs.resize(count);
  for (size_t i = 0; i < count; ++i) {
    const uint32_t w = get_u32(in);
    std::memcpy(&xs[i], &w, 4);
  }
}

}  // namespace

void save_checkpoint_file(const std::string& path, const CheckpointData& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for write: " + path);
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<uint32_t>(data.config_text.size()));
  out.write(data.config_text.data(),
            static_cast<std::streamsize>(data.config_text.size()));
  put_u32(out, static_cast<uint32_t>(data.tensors.size()));
  for (const NamedTensor& t : data.tensors) {
    put_u32(out, static_cast<uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put_u32(out, static_cast<uint32_t>(t.shape.size()));
    size_t numel = 1;
    for (int64_t e : t.shape) {
      put_u32(out, static_cast<uint32_t>(e));
      numel *= static_cast<size_t>(e);
    }
    if (numel != t.data.size())
      throw ContractError("checkpoint: tensor extents do not match data: " + t.name);
    put_f32s(out, t.data);
  }
  put_u64(out, data.step);
  if (!out) throw IoError("checkpoint: write failed: " + path);
}

CheckpointData load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("checkpoint: bad magic");
  const uint32_t version = get_u32(in);
  if (version != kVersion)
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  CheckpointData data;
  const uint32_t cfg_len = get_u32(in);
  data.config_text.resize(cfg_len);
  in.read(data.config_text.data(), cfg_len);
  if (!in) throw FormatError("checkpoint: truncated config blob");
  const uint32_t count = get_u32(in);
  data.tensors.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    const uint32_t name_len = get_u32(in);
    if (name_len > 4096) throw FormatError("checkpoint: implausible name length");
    t.name.resize(name_len);
    in.read(t.name.data(), name_len);
    if (!in) throw FormatError("checkpoint: truncated name");
    const uint32_t rank = get_u32(in);
    if (rank > 8) throw FormatError("checkpoint: implausible rank");
    size_t numel = 1;
    for (uint32_t r = 0; r < rank; ++r) {
      const uint32_t e = get_u32(in);
      t.shape.push_back(static_cast<int64_t>(e));
      numel *= e;
    }
    if (numel > (1u << 28)) throw FormatError("checkpoint: implausible tensor size");
    get_f32s(in, t.data, numel);
    data.tensors.push_back(std::move(t));
  }
  data.step = get_u64(in);
  return data;
}

}  // namespace sclm
