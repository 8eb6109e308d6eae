// SPDX-License-Identifier: Apache-2.0
//
// The semi-causal LM stack: per-modality bidirectional span encoders docked
// into a causal decoder through connectors, with a shared input/output token
// embedding. The decoder always runs under a causal mask; bidirectional
// information enters only through encoder outputs pasted over span rows.

#pragma once

#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sclm/errors.hpp"
#include "sclm/masks.hpp"
#include "sclm/packing.hpp"
#include "sclm/random.hpp"
#include "sclm/spans.hpp"
#include "sclm/tensor.hpp"
#include "sclm/vocab.hpp"

namespace sclm {

enum class ConnectorKind { Linear, Mlp };  // mlp = 3 affine layers, gelu between

enum class EncoderPayload { Text, Vec };

struct EncoderConfig {
  int32_t layers = 2;
  int32_t d = 32;        // d_enc
  int32_t heads = 2;
  int32_t max_span = 64;
  double dropout = 0.1;
  EncoderPayload payload = EncoderPayload::Text;
  int32_t d_feat = 0;    // Vec payload width
  ConnectorKind connector = ConnectorKind::Linear;
};

struct DecoderConfig {
  int32_t layers = 2;
  int32_t d = 64;        // d_dec
  int32_t heads = 2;
  int32_t n_max = 256;
  double dropout = 0.0;
};

struct ModelConfig {
  DecoderConfig dec;
  std::map<std::string, EncoderConfig> encoders;  // modality -> encoder
  bool deepnorm = false;

  void validate() const {
    if (dec.d % dec.heads != 0)
      throw DimensionError("config: d_dec not divisible by heads");
    if (dec.layers < 1 || dec.d < 2 || dec.n_max < 2)
      throw DimensionError("config: decoder extents out of range");
    for (const auto& [name, enc] : encoders) {
      if (enc.d % enc.heads != 0)
        throw DimensionError("config: d_enc not divisible by heads for " + name);
      if (enc.payload == EncoderPayload::Vec && enc.d_feat < 1)
        throw DimensionError("config: vec payload needs d_feat for " + name);
      if (enc.layers < 1 || enc.max_span < 1)
        throw DimensionError("config: encoder extents out of range for " + name);
    }
  }
};

// One span's encoder-side content. Text payloads carry token ids, vec
// payloads a row-major feat_len x d_feat feature block.
struct EncoderInput {
  std::string modality = "text";
  std::vector<TokenId> ids;
  std::vector<double> features;
  int32_t feat_len = 0;

  int32_t length() const {
    return ids.empty() ? feat_len : static_cast<int32_t>(ids.size());
  }
};

// Named parameter leaves in fixed insertion order (checkpoint order).
template <class S>
class ParamStore {
 public:
  TensorPtr<S> add(const std::string& name, std::vector<int64_t> shape) {
    if (index_.count(name)) throw RegistryError("duplicate parameter: " + name);
    auto t = make_tensor<S>(std::move(shape), true);
    index_[name] = names_.size();
    names_.push_back(name);
    tensors_.push_back(t);
    return t;
  }

  const TensorPtr<S>& get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw RegistryError("unknown parameter: " + name);
    return tensors_[it->second];
  }

  bool has(const std::string& name) const { return index_.count(name) != 0; }
  size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const TensorPtr<S>& at(size_t i) const { return tensors_[i]; }

 private:
  std::vector<std::string> names_;
  std::vector<TensorPtr<S>> tensors_;
  std::unordered_map<std::string, size_t> index_;
};

template <class S>
std::vector<S> sinusoidal_positions(int64_t n, int64_t d) {
  std::vector<S> out(static_cast<size_t>(n * d));
  for (int64_t t = 0; t < n; ++t)
    for (int64_t i = 0; i < d; ++i) {
      const double angle =
          static_cast<double>(t) /
          std::pow(10000.0, static_cast<double>(2 * (i / 2)) / static_cast<double>(d));
      out[static_cast<size_t>(t * d + i)] =
          static_cast<S>((i % 2 == 0) ? std::sin(angle) : std::cos(angle));
    }
  return out;
}

// Perturbation-based dependency report: moved[q][p] == 1 when perturbing
// input position q changed the logits row p. Exact comparison is meaningful
// because masked positions contribute exact zeros.
struct FlowReport {
  int32_t n = 0;
  std::vector<std::vector<uint8_t>> moved;             // [q][p]
  std::vector<std::pair<int32_t, int32_t>> violations;  // (q, p) not allowed
  bool ok() const { return violations.empty(); }
};

template <class S>
class MetaLM {
 public:
  MetaLM(ModelConfig config, uint64_t init_seed) : cfg_(std::move(config)) {
    cfg_.validate();
    build_params();
    init_params(init_seed);
  }

  const ModelConfig& config() const { return cfg_; }
  ParamStore<S>& params() { return params_; }
  const ParamStore<S>& params() const { return params_; }

  // --- encoder ---------------------------------------------------------

  TensorPtr<S> encode_span(Tape<S>& tape, const EncoderInput& input,
                           RandomSource* drop = nullptr) const {
    const auto it = cfg_.encoders.find(input.modality);
    if (it == cfg_.encoders.end())
      throw RegistryError("unregistered modality: " + input.modality);
    const EncoderConfig& enc = it->second;
    const int32_t len = input.length();
    if (len < 1) throw DimensionError("encode_span: empty input");
    if (len > enc.max_span)
      throw DimensionError("encode_span: span exceeds encoder max length");
    const std::string p = "enc." + input.modality + ".";

    TensorPtr<S> x;
    if (enc.payload == EncoderPayload::Text) {
      if (input.ids.empty()) throw DimensionError("encode_span: text payload needs ids");
      std::vector<int64_t> rows;
      rows.reserve(input.ids.size());
      for (TokenId id : input.ids) {
        if (id < 0 || id >= VOCAB_SIZE)
          throw ContractError("encode_span: id out of vocabulary");
        rows.push_back(id);
      }
      x = gather_rows(tape, params_.get(p + "embed"), rows);
    } else {
      if (static_cast<int32_t>(input.features.size()) != len * enc.d_feat)
        throw DimensionError("encode_span: feature block has wrong extent");
      std::vector<S> feat(input.features.begin(), input.features.end());
      auto f = make_tensor<S>({len, enc.d_feat}, std::move(feat));
      x = add_bias(tape, matmul(tape, f, params_.get(p + "lift.w")),
                   params_.get(p + "lift.b"));
    }

    std::vector<int64_t> pos_rows(static_cast<size_t>(len));
    for (int32_t i = 0; i < len; ++i) pos_rows[static_cast<size_t>(i)] = i;
    x = add(tape, x, gather_rows(tape, params_.get(p + "pos"), pos_rows));

    const VisibilityMask mask = noncausal_mask(len);
    for (int32_t l = 0; l < enc.layers; ++l)
      x = block(tape, x, mask.allow, p + "block" + std::to_string(l) + ".",
                enc.heads, enc.dropout, enc.layers, drop);
    return final_norm(tape, x, p);
  }

  // --- connector -------------------------------------------------------

  TensorPtr<S> connect(Tape<S>& tape, const std::string& modality,
                       const TensorPtr<S>& span_reps) const {
    const auto it = cfg_.encoders.find(modality);
    if (it == cfg_.encoders.end())
      throw RegistryError("unregistered modality: " + modality);
    if (span_reps->rank() != 2 || span_reps->shape[1] != it->second.d)
      throw DimensionError("connect: input width must be d_enc");
    const std::string p = "conn." + modality + ".";
    auto h = add_bias(tape, matmul(tape, span_reps, params_.get(p + "w0")),
                      params_.get(p + "b0"));
    if (it->second.connector == ConnectorKind::Mlp) {
      h = add_bias(tape, matmul(tape, gelu(tape, h), params_.get(p + "w1")),
                   params_.get(p + "b1"));
      h = add_bias(tape, matmul(tape, gelu(tape, h), params_.get(p + "w2")),
                   params_.get(p + "b2"));
    }
    return h;
  }

  // --- decoder input assembly ------------------------------------------

  // Token-embedding rows, span rows overwritten by connect(encode_span(.)),
  // then sinusoidal positions added uniformly to every row. `overrides`
  // supplies non-text payloads by index into layout.spans; text spans default
  // to the sequence's own token ids.
  TensorPtr<S> assemble_inputs(
      Tape<S>& tape, const PackedSequence& seq, const SpanLayout& layout,
      const std::map<size_t, EncoderInput>& overrides = {},
      RandomSource* drop = nullptr) const {
    const int32_t n = static_cast<int32_t>(seq.ids.size());
    if (layout.n != n) throw DimensionError("assemble_inputs: layout length mismatch");
    validate_layout(layout, &seq);

    std::vector<int64_t> rows;
    rows.reserve(seq.ids.size());
    for (TokenId id : seq.ids) rows.push_back(id);
    TensorPtr<S> x = gather_rows(tape, params_.get("dec.embed"), rows);

    for (size_t si = 0; si < layout.spans.size(); ++si) {
      const Span& sp = layout.spans[si];
      EncoderInput in;
      const auto ov = overrides.find(si);
      if (ov != overrides.end()) {
        in = ov->second;
      } else {
        in.modality = "text";
        in.ids.assign(seq.ids.begin() + (sp.s - 1), seq.ids.begin() + (sp.e - 1));
      }
      if (in.length() != sp.e - sp.s)
        throw DimensionError("assemble_inputs: payload length differs from span");
      auto reps = connect(tape, in.modality, encode_span(tape, in, drop));
      if (reps->shape[1] != cfg_.dec.d)
        throw DimensionError("assemble_inputs: connector output width mismatch");
      x = paste_rows(tape, x, reps, sp.s - 1);
    }

    auto pos = make_tensor<S>({n, cfg_.dec.d},
                              sinusoidal_positions<S>(n, cfg_.dec.d));
    return add(tape, x, pos);
  }

  // --- decoder ---------------------------------------------------------

  TensorPtr<S> decoder_forward(Tape<S>& tape, const TensorPtr<S>& inputs,
                               RandomSource* drop = nullptr) const {
    if (inputs->rank() != 2 || inputs->shape[1] != cfg_.dec.d)
      throw DimensionError("decoder_forward: input width must be d_dec");
    const int32_t n = static_cast<int32_t>(inputs->shape[0]);
    if (n > cfg_.dec.n_max) throw DimensionError("decoder_forward: sequence too long");

    const VisibilityMask mask = causal_mask(n);
    TensorPtr<S> x = inputs;
    for (int32_t l = 0; l < cfg_.dec.layers; ++l)
      x = block(tape, x, mask.allow, "dec.block" + std::to_string(l) + ".",
                cfg_.dec.heads, cfg_.dec.dropout, cfg_.dec.layers, drop);
    x = final_norm(tape, x, "dec.");
    // shared embedding: the output projection is E transposed, same storage
    return matmul(tape, x, transpose(tape, params_.get("dec.embed")));
  }

  TensorPtr<S> logits_for(Tape<S>& tape, const PackedSequence& seq,
                          const SpanLayout& layout,
                          const std::map<size_t, EncoderInput>& overrides = {},
                          RandomSource* drop = nullptr) const {
    return decoder_forward(tape, assemble_inputs(tape, seq, layout, overrides, drop),
                           drop);
  }

  // --- objective -------------------------------------------------------

  // Positions scored: target_positions(layout) minus PAD targets. Target t is
  // scored at decoder row t-2 (0-based form of "predicted at position t-1").
  static void build_targets(const PackedSequence& seq, const SpanLayout& layout,
                            std::vector<int32_t>& targets,
                            std::vector<uint8_t>& mask) {
    const int32_t n = static_cast<int32_t>(seq.ids.size());
    targets.assign(static_cast<size_t>(n), 0);
    mask.assign(static_cast<size_t>(n), 0);
    for (int32_t t : target_positions(layout)) {
      const TokenId goal = seq.ids[static_cast<size_t>(t - 1)];
      if (goal == PAD) continue;
      const int32_t row = prediction_source(layout, t) - 1;
      targets[static_cast<size_t>(row)] = goal;
      mask[static_cast<size_t>(row)] = 1;
    }
  }

  TensorPtr<S> semicausal_loss(Tape<S>& tape, const PackedSequence& seq,
                               const SpanLayout& layout,
                               const std::map<size_t, EncoderInput>& overrides = {},
                               RandomSource* drop = nullptr) const {
    auto logits = logits_for(tape, seq, layout, overrides, drop);
    std::vector<int32_t> targets;
    std::vector<uint8_t> mask;
    build_targets(seq, layout, targets, mask);
    return cross_entropy(tape, logits, targets, mask);
  }

  // Independent re-derivation of the k=0 objective from the same logits:
  // plain next-token prediction over non-PAD targets, arithmetic in the same
  // evaluation order as cross_entropy so the two agree bitwise.
  static S causal_reference_loss(const TensorPtr<S>& logits,
                                 const PackedSequence& seq) {
    const int64_t n = logits->shape[0], v = logits->shape[1];
    S total = S(0);
    int64_t count = 0;
    for (int64_t row = 0; row < n - 1; ++row) {
      const TokenId goal = seq.ids[static_cast<size_t>(row + 1)];
      if (goal == PAD) continue;
      const S* r = logits->v.data() + row * v;
      S m = r[0];
      for (int64_t j = 1; j < v; ++j) m = std::max(m, r[j]);
      S sum = S(0);
      for (int64_t j = 0; j < v; ++j) sum += std::exp(r[j] - m);
      total += (m + std::log(sum)) - r[goal];
      ++count;
    }
    if (count == 0) throw ContractError("causal_reference_loss: nothing to score");
    return total / static_cast<S>(count);
  }

  // --- dependency oracle -------------------------------------------------

  FlowReport information_flow_check(
      const PackedSequence& seq, const SpanLayout& layout,
      const std::map<size_t, EncoderInput>& overrides = {}) const {
    const int32_t n = static_cast<int32_t>(seq.ids.size());
    const VisibilityMask flow = semicausal_flow(layout);
    FlowReport report;
    report.n = n;
    report.moved.assign(static_cast<size_t>(n), std::vector<uint8_t>(n, 0));

    Tape<S> tape(false);
    auto base = logits_for(tape, seq, layout, overrides);

    for (int32_t q = 0; q < n; ++q) {
      PackedSequence mod = seq;
      auto ovs = overrides;
      perturb(mod, ovs, layout, q);
      Tape<S> tp(false);
      auto out = logits_for(tp, mod, layout, ovs);
      for (int32_t p = 0; p < n; ++p) {
        bool diff = false;
        for (int64_t j = 0; j < out->shape[1] && !diff; ++j)
          diff = out->v[p * out->shape[1] + j] != base->v[p * out->shape[1] + j];
        if (diff) {
          report.moved[static_cast<size_t>(q)][static_cast<size_t>(p)] = 1;
          if (!flow.at(p, q))
            report.violations.emplace_back(q, p);
        }
      }
    }
    return report;
  }

 private:
  // Changes exactly the content feeding position q (0-based): the token id,
  // or for a vec-override span the feature row.
  static void perturb(PackedSequence& seq, std::map<size_t, EncoderInput>& ovs,
                      const SpanLayout& layout, int32_t q) {
    for (size_t si = 0; si < layout.spans.size(); ++si) {
      const Span& sp = layout.spans[si];
      auto it = ovs.find(si);
      if (it == ovs.end()) continue;
      if (q >= sp.s - 1 && q < sp.e - 1) {
        EncoderInput& in = it->second;
        if (!in.features.empty()) {
          in.features[static_cast<size_t>((q - (sp.s - 1)) * // row offset
                                          (in.features.size() / in.feat_len))] += 1.0;
          return;
        }
        in.ids[static_cast<size_t>(q - (sp.s - 1))] =
            (in.ids[static_cast<size_t>(q - (sp.s - 1))] + 1) % 256;
        return;
      }
    }
    seq.ids[static_cast<size_t>(q)] =
        (seq.ids[static_cast<size_t>(q)] + 1) % 256;  // always a plain byte
  }

  void build_params() {
    params_.add("dec.embed", {VOCAB_SIZE, cfg_.dec.d});
    for (int32_t l = 0; l < cfg_.dec.layers; ++l)
      add_block_params("dec.block" + std::to_string(l) + ".", cfg_.dec.d);
    params_.add("dec.final.g", {cfg_.dec.d});
    params_.add("dec.final.b", {cfg_.dec.d});

    for (const auto& [name, enc] : cfg_.encoders) {
      const std::string p = "enc." + name + ".";
      if (enc.payload == EncoderPayload::Text) {
        params_.add(p + "embed", {VOCAB_SIZE, enc.d});
      } else {
        params_.add(p + "lift.w", {enc.d_feat, enc.d});
        params_.add(p + "lift.b", {enc.d});
      }
      params_.add(p + "pos", {enc.max_span, enc.d});
      for (int32_t l = 0; l < enc.layers; ++l)
        add_block_params(p + "block" + std::to_string(l) + ".", enc.d);
      params_.add(p + "final.g", {enc.d});
      params_.add(p + "final.b", {enc.d});

      const std::string c = "conn." + name + ".";
      if (enc.connector == ConnectorKind::Linear) {
        params_.add(c + "w0", {enc.d, cfg_.dec.d});
        params_.add(c + "b0", {cfg_.dec.d});
      } else {
        params_.add(c + "w0", {enc.d, cfg_.dec.d});
        params_.add(c + "b0", {cfg_.dec.d});
        params_.add(c + "w1", {cfg_.dec.d, cfg_.dec.d});
        params_.add(c + "b1", {cfg_.dec.d});
        params_.add(c + "w2", {cfg_.dec.d, cfg_.dec.d});
        params_.add(c + "b2", {cfg_.dec.d});
      }
    }
  }

  void add_block_params(const std::string& p, int32_t d) {
    params_.add(p + "ln1.g", {d});
    params_.add(p + "ln1.b", {d});
    params_.add(p + "attn.wq", {d, d});
    params_.add(p + "attn.bq", {d});
    params_.add(p + "attn.wk", {d, d});
    params_.add(p + "attn.bk", {d});
    params_.add(p + "attn.wv", {d, d});
    params_.add(p + "attn.bv", {d});
    params_.add(p + "attn.wo", {d, d});
    params_.add(p + "attn.bo", {d});
    params_.add(p + "ln2.g", {d});
    params_.add(p + "ln2.b", {d});
    params_.add(p + "ffn.w1", {d, 4 * d});
    params_.add(p + "ffn.b1", {4 * d});
    params_.add(p + "ffn.w2", {4 * d, d});
    params_.add(p + "ffn.b2", {d});
  }

  void init_params(uint64_t seed) {
    for (size_t i = 0; i < params_.size(); ++i) {
      const std::string& name = params_.names()[i];
      auto& t = *params_.at(i);
      const bool is_gain = name.ends_with(".g") || name.ends_with("ln1.g") ||
                           name.ends_with("ln2.g");
      const bool is_bias = name.ends_with(".b") || name.ends_with("b0") ||
                           name.ends_with("b1") || name.ends_with("b2") ||
                           name.ends_with("bq") || name.ends_with("bk") ||
                           name.ends_with("bv") || name.ends_with("bo");
      if (is_gain) {
        fill_constant(t, S(1));
      } else if (is_bias) {
        fill_constant(t, S(0));
      } else {
        RandomSource rng = RandomSource::derived(seed, i);
        fill_gaussian(t, rng, 0.02);
      }
    }
  }

  TensorPtr<S> layer_norm_named(Tape<S>& tape, const TensorPtr<S>& x,
                                const std::string& p) const {
    return layer_norm(tape, x, params_.get(p + "g"), params_.get(p + "b"), 1e-5);
  }

  TensorPtr<S> final_norm(Tape<S>& tape, const TensorPtr<S>& x,
                          const std::string& stack_prefix) const {
    return layer_norm_named(tape, x, stack_prefix + "final.");
  }

  TensorPtr<S> attention(Tape<S>& tape, const TensorPtr<S>& x,
                         const std::vector<uint8_t>& allow, const std::string& p,
                         int32_t heads) const {
    const int32_t d = static_cast<int32_t>(x->shape[1]);
    const int32_t dh = d / heads;
    auto q = add_bias(tape, matmul(tape, x, params_.get(p + "wq")), params_.get(p + "bq"));
    auto k = add_bias(tape, matmul(tape, x, params_.get(p + "wk")), params_.get(p + "bk"));
    auto v = add_bias(tape, matmul(tape, x, params_.get(p + "wv")), params_.get(p + "bv"));
    std::vector<TensorPtr<S>> heads_out;
    heads_out.reserve(static_cast<size_t>(heads));
    const S inv_sqrt = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));
    for (int32_t h = 0; h < heads; ++h) {
      auto qh = slice_cols(tape, q, h * dh, (h + 1) * dh);
      auto kh = slice_cols(tape, k, h * dh, (h + 1) * dh);
      auto vh = slice_cols(tape, v, h * dh, (h + 1) * dh);
      auto scores = scale(tape, matmul(tape, qh, transpose(tape, kh)), inv_sqrt);
      heads_out.push_back(matmul(tape, masked_softmax(tape, scores, allow), vh));
    }
    auto o = heads == 1 ? heads_out[0] : concat_cols(tape, heads_out);
    return add_bias(tape, matmul(tape, o, params_.get(p + "wo")), params_.get(p + "bo"));
  }

  TensorPtr<S> ffn(Tape<S>& tape, const TensorPtr<S>& x, const std::string& p) const {
    auto h = gelu(tape, add_bias(tape, matmul(tape, x, params_.get(p + "w1")),
                                 params_.get(p + "b1")));
    return add_bias(tape, matmul(tape, h, params_.get(p + "w2")), params_.get(p + "b2"));
  }

  TensorPtr<S> maybe_dropout(Tape<S>& tape, const TensorPtr<S>& x, double rate,
                             RandomSource* drop) const {
    return drop ? dropout(tape, x, rate, *drop) : x;
  }

  // Pre-layer-norm residual block; with deepnorm enabled, post-layer-norm
  // with alpha-scaled residuals instead.
  TensorPtr<S> block(Tape<S>& tape, const TensorPtr<S>& x,
                     const std::vector<uint8_t>& allow, const std::string& p,
                     int32_t heads, double drop_rate, int32_t total_layers,
                     RandomSource* drop) const {
    if (!cfg_.deepnorm) {
      auto a = attention(tape, layer_norm_named(tape, x, p + "ln1."), allow, p + "attn.", heads);
      auto x1 = add(tape, x, maybe_dropout(tape, a, drop_rate, drop));
      auto f = ffn(tape, layer_norm_named(tape, x1, p + "ln2."), p + "ffn.");
      return add(tape, x1, maybe_dropout(tape, f, drop_rate, drop));
    }
    const S alpha = static_cast<S>(std::pow(2.0 * total_layers, 0.25));
    auto a = attention(tape, x, allow, p + "attn.", heads);
    auto x1 = layer_norm_named(
        tape, add(tape, scale(tape, x, alpha), maybe_dropout(tape, a, drop_rate, drop)),
        p + "ln1.");
    auto f = ffn(tape, x1, p + "ffn.");
    return layer_norm_named(
        tape, add(tape, scale(tape, x1, alpha), maybe_dropout(tape, f, drop_rate, drop)),
        p + "ln2.");
  }

  ModelConfig cfg_;
  ParamStore<S> params_;
};

}  // namespace sclm
