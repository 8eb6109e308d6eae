// SPDX-License-Identifier: Apache-2.0
#include "sclm/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "sclm/errors.hpp"

namespace sclm {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

int64_t parse_int(std::string_view key, std::string_view v) {
  try {
    size_t used = 0;
    const int64_t x = std::stoll(std::string(v), &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ParseError("config: bad integer for " + std::string(key) + ": " + std::string(v));
  }
}

double parse_real(std::string_view key, std::string_view v) {
  try {
    size_t used = 0;
    const double x = std::stod(std::string(v), &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ParseError("config: bad real for " + std::string(key) + ": " + std::string(v));
  }
}

}  // namespace

std::string policy_name(FreezePolicy p) {
  switch (p) {
    case FreezePolicy::Pretrain: return "pretrain";
    case FreezePolicy::SingleTask: return "single_task";
    case FreezePolicy::Full: return "full";
  }
  throw ContractError("unknown policy value");
}

FreezePolicy parse_policy(std::string_view s) {
  if (s == "pretrain") return FreezePolicy::Pretrain;
  if (s == "single_task") return FreezePolicy::SingleTask;
  if (s == "full") return FreezePolicy::Full;
  throw ParseError("config: unknown policy: " + std::string(s));
}

std::string canonical_config_text(const RunConfig& cfg) {
  std::ostringstream out;
  out << "[model]\n";
  out << "deepnorm=" << (cfg.model.deepnorm ? 1 : 0) << "\n";
  out << "[decoder]\n";
  out << "layers=" << cfg.model.dec.layers << "\n";
  out << "d=" << cfg.model.dec.d << "\n";
  out << "heads=" << cfg.model.dec.heads << "\n";
  out << "n_max=" << cfg.model.dec.n_max << "\n";
  out << "dropout=" << fmt_double(cfg.model.dec.dropout) << "\n";
  for (const auto& [name, enc] : cfg.model.encoders) {  // std::map: sorted
    out << "[encoder." << name << "]\n";
    out << "layers=" << enc.layers << "\n";
    out << "d=" << enc.d << "\n";
    out << "heads=" << enc.heads << "\n";
    out << "max_span=" << enc.max_span << "\n";
    out << "dropout=" << fmt_double(enc.dropout) << "\n";
    out << "payload=" << (enc.payload == EncoderPayload::Text ? "text" : "vec") << "\n";
    out << "d_feat=" << enc.d_feat << "\n";
    out << "connector=" << (enc.connector == ConnectorKind::Linear ? "linear" : "mlp")
        << "\n";
  }
  out << "[sampler]\n";
  out << "ratio=" << fmt_double(cfg.sampler.ratio) << "\n";
  out << "min_len=" << cfg.sampler.min_len << "\n";
  out << "max_len=" << cfg.sampler.max_len << "\n";
  out << "[schedule]\n";
  out << "peak_lr=" << fmt_double(cfg.schedule.peak_lr) << "\n";
  out << "warmup=" << cfg.schedule.warmup << "\n";
  out << "total_steps=" << cfg.schedule.total_steps << "\n";
  out << "[train]\n";
  out << "batch=" << cfg.train.batch << "\n";
  out << "steps=" << cfg.train.steps << "\n";
  out << "checkpoint_every=" << cfg.train.checkpoint_every << "\n";
  out << "weight_decay=" << fmt_double(cfg.train.weight_decay) << "\n";
  out << "clip_norm=" << fmt_double(cfg.train.clip_norm) << "\n";
  out << "policy=" << policy_name(cfg.train.policy) << "\n";
  out << "seed=" << cfg.train.seed << "\n";
  out << "[eval]\n";
  out << "decode=" << cfg.eval.decode << "\n";
  out << "beam_size=" << cfg.eval.beam_size << "\n";
  out << "alpha=" << fmt_double(cfg.eval.alpha) << "\n";
  out << "k=" << cfg.eval.k << "\n";
  out << "max_new=" << cfg.eval.max_new << "\n";
  return out.str();
}

RunConfig parse_config_text(std::string_view text) {
  RunConfig cfg;
  cfg.model.encoders.clear();
  std::string section;
  size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = trim(text.substr(pos, nl - pos));
    ++line_no;
    const size_t next = (nl == text.size()) ? text.size() + 1 : nl + 1;
    pos = next;
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError("config line " + std::to_string(line_no) + ": bad section");
      section = std::string(line.substr(1, line.size() - 2));
      if (section.rfind("encoder.", 0) == 0) {
        const std::string name = section.substr(8);
        if (name.empty()) throw ParseError("config: empty encoder name");
        cfg.model.encoders.emplace(name, EncoderConfig{});
      } else if (section != "model" && section != "decoder" && section != "sampler" &&
                 section != "schedule" && section != "train" && section != "eval") {
        throw ParseError("config: unknown section [" + section + "]");
      }
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("config line " + std::to_string(line_no) + ": expected key=value");
    const std::string key{trim(line.substr(0, eq))};
    const std::string val{trim(line.substr(eq + 1))};
    if (section.empty())
      throw ParseError("config: key outside any section: " + key);

    auto unknown = [&]() -> ParseError {
      return ParseError("config: unknown key " + key + " in [" + section + "]");
    };

    if (section == "model") {
      if (key == "deepnorm") cfg.model.deepnorm = parse_int(key, val) != 0;
      else throw unknown();
    } else if (section == "decoder") {
      if (key == "layers") cfg.model.dec.layers = static_cast<int32_t>(parse_int(key, val));
      else if (key == "d") cfg.model.dec.d = static_cast<int32_t>(parse_int(key, val));
      else if (key == "heads") cfg.model.dec.heads = static_cast<int32_t>(parse_int(key, val));
      else if (key == "n_max") cfg.model.dec.n_max = static_cast<int32_t>(parse_int(key, val));
      else if (key == "dropout") cfg.model.dec.dropout = parse_real(key, val);
      else throw unknown();
    } else if (section.rfind("encoder.", 0) == 0) {
      EncoderConfig& enc = cfg.model.encoders.at(section.substr(8));
      if (key == "layers") enc.layers = static_cast<int32_t>(parse_int(key, val));
      else if (key == "d") enc.d = static_cast<int32_t>(parse_int(key, val));
      else if (key == "heads") enc.heads = static_cast<int32_t>(parse_int(key, val));
      else if (key == "max_span") enc.max_span = static_cast<int32_t>(parse_int(key, val));
      else if (key == "dropout") enc.dropout = parse_real(key, val);
      else if (key == "d_feat") enc.d_feat = static_cast<int32_t>(parse_int(key, val));
      else if (key == "payload") {
        if (val == "text") enc.payload = EncoderPayload::Text;
        else if (val == "vec") enc.payload = EncoderPayload::Vec;
        else throw ParseError("config: unknown payload: " + val);
      } else if (key == "connector") {
        if (val == "linear") enc.connector = ConnectorKind::Linear;
        else if (val == "mlp") enc.connector = ConnectorKind::Mlp;
        else throw ParseError("config: unknown connector: " + val);
      } else throw unknown();
    } else if (section == "sampler") {
      if (key == "ratio") cfg.sampler.ratio = parse_real(key, val);
      else if (key == "min_len") cfg.sampler.min_len = static_cast<int32_t>(parse_int(key, val));
      else if (key == "max_len") cfg.sampler.max_len = static_cast<int32_t>(parse_int(key, val));
      else throw unknown();
    } else if (section == "schedule") {
      if (key == "peak_lr") cfg.schedule.peak_lr = parse_real(key, val);
      else if (key == "warmup") cfg.schedule.warmup = parse_int(key, val);
      else if (key == "total_steps") cfg.schedule.total_steps = parse_int(key, val);
      else throw unknown();
    } else if (section == "train") {
      if (key == "batch") cfg.train.batch = static_cast<int32_t>(parse_int(key, val));
      else if (key == "steps") cfg.train.steps = parse_int(key, val);
      else if (key == "checkpoint_every") cfg.train.checkpoint_every = parse_int(key, val);
      else if (key == "weight_decay") cfg.train.weight_decay = parse_real(key, val);
      else if (key == "clip_norm") cfg.train.clip_norm = parse_real(key, val);
      else if (key == "policy") cfg.train.policy = parse_policy(val);
      else if (key == "seed") cfg.train.seed = static_cast<uint64_t>(parse_int(key, val));
      else throw unknown();
    } else if (section == "eval") {
      if (key == "decode") {
        if (val != "greedy" && val != "beam")
          throw ParseError("config: decode must be greedy or beam");
        cfg.eval.decode = val;
      } else if (key == "beam_size") cfg.eval.beam_size = static_cast<int32_t>(parse_int(key, val));
      else if (key == "alpha") cfg.eval.alpha = parse_real(key, val);
      else if (key == "k") cfg.eval.k = static_cast<int32_t>(parse_int(key, val));
      else if (key == "max_new") cfg.eval.max_new = static_cast<int32_t>(parse_int(key, val));
      else throw unknown();
    }
    if (nl == text.size()) break;
  }
  if (cfg.model.encoders.empty()) cfg.model.encoders.emplace("text", EncoderConfig{});
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_checksum(const RunConfig& cfg) {
  const uint64_t h = fnv1a64(canonical_config_text(cfg));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sclm
