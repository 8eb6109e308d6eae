// SPDX-License-Identifier: Apache-2.0
//
// Optimization: Adam with bias correction and decoupled weight decay,
// warmup + linear-decay schedule, name-based freeze policies, and the
// deterministic training loop with periodic checkpoints.

#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "sclm/checkpoint.hpp"
#include "sclm/config.hpp"
#include "sclm/errors.hpp"
#include "sclm/model.hpp"

namespace sclm {

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.98;
inline constexpr double kAdamEps = 1e-6;

template <class S>
struct AdamState {
  std::unordered_map<std::string, std::vector<S>> m, v;
  int64_t step = 0;
};

// A leaf is trainable under:
//   Pretrain   — decoder, connectors, and each encoder's last two blocks;
//                encoder embeddings/positions/earlier blocks/final norm frozen.
//   SingleTask — encoders and connectors only; the decoder (including the
//                shared embedding, which is decoder storage) is frozen.
//   Full       — everything.
template <class S>
bool is_trainable(const MetaLM<S>& model, const std::string& name, FreezePolicy policy) {
  switch (policy) {
    case FreezePolicy::Full:
      return true;
    case FreezePolicy::SingleTask:
      return name.rfind("enc.", 0) == 0 || name.rfind("conn.", 0) == 0;
    case FreezePolicy::Pretrain: {
      if (name.rfind("dec.", 0) == 0 || name.rfind("conn.", 0) == 0) return true;
      if (name.rfind("enc.", 0) != 0) return false;
      const size_t mod_end = name.find('.', 4);
      if (mod_end == std::string::npos) return false;
      const std::string modality = name.substr(4, mod_end - 4);
      const std::string rest = name.substr(mod_end + 1);
      if (rest.rfind("block", 0) != 0) return false;
      const size_t dot = rest.find('.');
      const int32_t idx = std::stoi(rest.substr(5, dot - 5));
      const int32_t layers = model.config().encoders.at(modality).layers;
      return idx >= layers - 2;
    }
  }
  return false;
}

template <class S>
std::vector<uint8_t> trainable_mask(const MetaLM<S>& model, FreezePolicy policy) {
  std::vector<uint8_t> mask(model.params().size(), 0);
  bool any = false;
  for (size_t i = 0; i < model.params().size(); ++i) {
    mask[i] = is_trainable(model, model.params().names()[i], policy) ? 1 : 0;
    any = any || mask[i];
  }
  if (!any) throw ContractError("freeze policy leaves no trainable leaf");
  return mask;
}

inline double lr_at(const ScheduleConfig& s, int64_t step) {
  if (s.warmup > 0 && step < s.warmup)
    return s.peak_lr * static_cast<double>(step) / static_cast<double>(s.warmup);
  if (step >= s.total_steps) return 0.0;
  const int64_t decay_span = s.total_steps - s.warmup;
  if (decay_span <= 0) return s.peak_lr;
  return s.peak_lr * static_cast<double>(s.total_steps - step) /
         static_cast<double>(decay_span);
}

// Returns the pre-clip global gradient norm over trainable leaves.
template <class S>
double adam_step(MetaLM<S>& model, const std::vector<uint8_t>& trainable,
                 AdamState<S>& state, double lr, double weight_decay,
                 double clip_norm) {
  auto& params = model.params();
  double sq = 0.0;
  for (size_t i = 0; i < params.size(); ++i) {
    if (!trainable[i]) continue;
    const auto& t = *params.at(i);
    if (t.g.empty())
      throw ContractError("adam_step: missing gradient on trainable leaf " +
                          params.names()[i]);
    for (S g : t.g) sq += static_cast<double>(g) * static_cast<double>(g);
  }
  const double gnorm = std::sqrt(sq);
  const S gscale =
      (clip_norm > 0.0 && gnorm > clip_norm) ? static_cast<S>(clip_norm / gnorm) : S(1);

  ++state.step;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));

  for (size_t i = 0; i < params.size(); ++i) {
    if (!trainable[i]) continue;
    auto& t = *params.at(i);
    const std::string& name = params.names()[i];
    auto& m = state.m[name];
    auto& v = state.v[name];
    if (m.empty()) m.assign(t.v.size(), S(0));
    if (v.empty()) v.assign(t.v.size(), S(0));
    const bool decay = weight_decay > 0.0 && t.rank() >= 2;  // not norms/biases
    for (size_t j = 0; j < t.v.size(); ++j) {
      const S g = t.g[j] * gscale;
      m[j] = static_cast<S>(kAdamBeta1) * m[j] + static_cast<S>(1.0 - kAdamBeta1) * g;
      v[j] = static_cast<S>(kAdamBeta2) * v[j] + static_cast<S>(1.0 - kAdamBeta2) * g * g;
      const double mhat = static_cast<double>(m[j]) / bc1;
      const double vhat = static_cast<double>(v[j]) / bc2;
      double upd = lr * mhat / (std::sqrt(vhat) + kAdamEps);
      if (decay) upd += lr * weight_decay * static_cast<double>(t.v[j]);
      t.v[j] -= static_cast<S>(upd);
    }
  }
  return gnorm;
}

template <class S>
void zero_gradients(MetaLM<S>& model) {
  for (size_t i = 0; i < model.params().size(); ++i) model.params().at(i)->g.clear();
}

// --- checkpoint glue -----------------------------------------------------

template <class S>
CheckpointData to_checkpoint(const MetaLM<S>& model, const AdamState<S>& state,
                             const std::string& config_text) {
  CheckpointData data;
  data.config_text = config_text;
  data.step = static_cast<uint64_t>(state.step);
  for (size_t i = 0; i < model.params().size(); ++i) {
    const auto& t = *model.params().at(i);
    NamedTensor nt;
    nt.name = model.params().names()[i];
    nt.shape = t.shape;
    nt.data.assign(t.v.begin(), t.v.end());
    data.tensors.push_back(std::move(nt));
  }
  auto dump_moments = [&](const char* prefix,
                          const std::unordered_map<std::string, std::vector<S>>& mm) {
    // iterate in parameter order so the byte stream is deterministic
    for (size_t i = 0; i < model.params().size(); ++i) {
      const std::string& name = model.params().names()[i];
      auto it = mm.find(name);
      if (it == mm.end()) continue;
      NamedTensor nt;
      nt.name = std::string(prefix) + name;
      nt.shape = model.params().at(i)->shape;
      nt.data.assign(it->second.begin(), it->second.end());
      data.tensors.push_back(std::move(nt));
    }
  };
  dump_moments(kOptMomentPrefix1, state.m);
  dump_moments(kOptMomentPrefix2, state.v);
  return data;
}

template <class S>
void from_checkpoint(MetaLM<S>& model, AdamState<S>& state, const CheckpointData& data) {
  state.m.clear();
  state.v.clear();
  state.step = static_cast<int64_t>(data.step);
  size_t param_hits = 0;
  for (const NamedTensor& nt : data.tensors) {
    if (nt.name.rfind(kOptMomentPrefix1, 0) == 0) {
      auto& dst = state.m[nt.name.substr(std::string(kOptMomentPrefix1).size())];
      dst.assign(nt.data.begin(), nt.data.end());
      continue;
    }
    if (nt.name.rfind(kOptMomentPrefix2, 0) == 0) {
      auto& dst = state.v[nt.name.substr(std::string(kOptMomentPrefix2).size())];
      dst.assign(nt.data.begin(), nt.data.end());
      continue;
    }
    if (!model.params().has(nt.name))
      throw FormatError("checkpoint: unknown tensor " + nt.name);
    auto& t = *model.params().get(nt.name);
    if (t.shape != nt.shape)
      throw FormatError("checkpoint: shape mismatch for " + nt.name);
    for (size_t j = 0; j < nt.data.size(); ++j) t.v[j] = static_cast<S>(nt.data[j]);
    ++param_hits;
  }
  if (param_hits != model.params().size())
    throw FormatError("checkpoint: missing tensors for this configuration");
}

// --- training loop --------------------------------------------------------

struct StepRecord {
  int64_t step = 0;
  double loss = 0.0;
  double coverage = 0.0;   // mean sampled span coverage this step
  double grad_norm = 0.0;  // pre-clip
  double lr = 0.0;
};

struct TrainReport {
  std::vector<StepRecord> steps;
  std::string config_checksum;
  uint64_t seed = 0;
  std::string stop_reason = "completed";

  std::string to_text() const {
    std::ostringstream out;
    out << "# run report\n";
    out << "config_checksum=" << config_checksum << "\n";
    out << "seed=" << seed << "\n";
    out << "stop=" << stop_reason << "\n";
    for (const StepRecord& r : steps) {
      out << "step=" << r.step << " loss=" << r.loss << " coverage=" << r.coverage
          << " grad_norm=" << r.grad_norm << " lr=" << r.lr << "\n";
    }
    return out.str();
  }
};

// Deterministic given (config, sequences, seed): batch membership derives
// from (seed, step), span layouts from (seed, step, slot+1). NaN loss aborts
// with a diagnostic checkpoint next to `checkpoint_path`.
template <class S>
TrainReport train(MetaLM<S>& model, const std::vector<PackedSequence>& sequences,
                  const RunConfig& cfg, AdamState<S>& state,
                  const std::string& checkpoint_path = "",
                  const std::vector<SpanLayout>* fixed_layouts = nullptr) {
  if (sequences.empty()) throw ContractError("train: empty corpus");
  const TrainConfig& tc = cfg.train;
  const auto trainable = trainable_mask(model, tc.policy);
  const std::string config_text = canonical_config_text(cfg);

  TrainReport report;
  report.config_checksum = config_checksum(cfg);
  report.seed = tc.seed;

  auto save = [&](const std::string& path) {
    if (!path.empty()) save_checkpoint_file(path, to_checkpoint(model, state, config_text));
  };

  const int64_t first_step = state.step;
  for (int64_t step = first_step; step < first_step + tc.steps; ++step) {
    Tape<S> tape;
    RandomSource pick = RandomSource::derived(tc.seed, static_cast<uint64_t>(step), 0);
    TensorPtr<S> total;
    double coverage = 0.0;
    for (int32_t b = 0; b < tc.batch; ++b) {
      const size_t idx =
          static_cast<size_t>(pick.uniform_int(0, static_cast<int64_t>(sequences.size()) - 1));
      const PackedSequence& seq = sequences[idx];
      SpanLayout layout;
      if (fixed_layouts) {
        layout = (*fixed_layouts)[idx];
      } else {
        RandomSource span_rng = RandomSource::derived(
            tc.seed, static_cast<uint64_t>(step), static_cast<uint64_t>(b) + 1);
        layout = sample_spans(seq, cfg.sampler.ratio, cfg.sampler.min_len,
                              cfg.sampler.max_len, span_rng);
      }
      int64_t covered = 0;
      for (const Span& sp : layout.spans) covered += sp.e - sp.s;
      coverage += static_cast<double>(covered) / static_cast<double>(layout.n);
      RandomSource drop = RandomSource::derived(
          tc.seed ^ 0x9e3779b97f4a7c15ull, static_cast<uint64_t>(step),
          static_cast<uint64_t>(b));
      auto loss = model.semicausal_loss(tape, seq, layout, {}, &drop);
      total = total ? add(tape, total, loss) : loss;
    }
    auto batch_loss = scale(tape, total, static_cast<S>(1.0 / tc.batch));
    const double loss_value = static_cast<double>(batch_loss->v[0]);
    if (!std::isfinite(loss_value)) {
      save(checkpoint_path.empty() ? "" : checkpoint_path + ".diag");
      report.stop_reason = "nan_loss_at_step_" + std::to_string(step);
      throw Error("train: non-finite loss at step " + std::to_string(step) +
                  (checkpoint_path.empty() ? "" : "; diagnostic checkpoint written"));
    }

    zero_gradients(model);
    tape.backward(batch_loss);
    // leaves that took no part in this step's graph have a zero gradient
    for (size_t i = 0; i < model.params().size(); ++i)
      if (trainable[i]) model.params().at(i)->ensure_grad();
    const double lr = lr_at(cfg.schedule, step);
    const double gnorm =
        adam_step(model, trainable, state, lr, tc.weight_decay, tc.clip_norm);

    report.steps.push_back({step + 1, loss_value, coverage / tc.batch, gnorm, lr});
    if (tc.checkpoint_every > 0 && (step + 1 - first_step) % tc.checkpoint_every == 0)
      save(checkpoint_path);
  }
  save(checkpoint_path);
  return report;
}

inline void write_report_file(const std::string& path, const TrainReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report: " + path);
  out << report.to_text();
}

}  // namespace sclm
