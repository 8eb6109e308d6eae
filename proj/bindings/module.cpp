// SPDX-License-Identifier: Apache-2.0
//
// Python bindings over the core operations: tokenizer, packing, span
// sampling, visibility masks, the model (loss/logits/train/generate),
// checkpoints, decoding, task generators, and metrics.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "sclm/eval.hpp"
#include "sclm/tasks.hpp"
#include "sclm/training.hpp"

namespace py = pybind11;
using namespace sclm;

namespace {

using Model = MetaLM<float>;

RunConfig config_with_seed(const std::string& text, std::optional<uint64_t> seed) {
  RunConfig cfg = parse_config_text(text);
  if (seed) cfg.train.seed = *seed;
  return cfg;
}

SpanLayout layout_from_pairs(int32_t n,
                             const std::vector<std::pair<int32_t, int32_t>>& spans) {
  SpanLayout layout{n, {}};
  for (const auto& [s, e] : spans) layout.spans.push_back({s, e});
  validate_layout(layout);
  return layout;
}

PackedSequence seq_from_ids(std::vector<TokenId> ids,
                            std::vector<std::pair<int32_t, int32_t>> doc_spans) {
  PackedSequence seq;
  seq.ids = std::move(ids);
  if (doc_spans.empty()) {
    seq.doc_spans = {{0, static_cast<int32_t>(seq.ids.size())}};
  } else {
    for (const auto& [b, e] : doc_spans) seq.doc_spans.push_back({b, e});
  }
  return seq;
}

struct PyModel {
  RunConfig cfg;
  Model model;
  AdamState<float> state;

  PyModel(const std::string& config_text, std::optional<uint64_t> seed)
      : cfg(config_with_seed(config_text, seed)), model(cfg.model, cfg.train.seed) {}

  explicit PyModel(const CheckpointData& data)
      : cfg(parse_config_text(data.config_text)), model(cfg.model, cfg.train.seed) {
    from_checkpoint(model, state, data);
  }

  double loss(const std::vector<TokenId>& ids,
              const std::vector<std::pair<int32_t, int32_t>>& spans) const {
    const PackedSequence seq = seq_from_ids(ids, {});
    const SpanLayout layout =
        layout_from_pairs(static_cast<int32_t>(ids.size()), spans);
    Tape<float> tape(false);
    return static_cast<double>(model.semicausal_loss(tape, seq, layout)->v[0]);
  }

  std::vector<std::vector<float>> logits(
      const std::vector<TokenId>& ids,
      const std::vector<std::pair<int32_t, int32_t>>& spans) const {
    const PackedSequence seq = seq_from_ids(ids, {});
    const SpanLayout layout =
        layout_from_pairs(static_cast<int32_t>(ids.size()), spans);
    Tape<float> tape(false);
    const auto out = model.logits_for(tape, seq, layout);
    std::vector<std::vector<float>> rows(static_cast<size_t>(out->shape[0]));
    for (int64_t r = 0; r < out->shape[0]; ++r)
      rows[static_cast<size_t>(r)].assign(
          out->v.begin() + r * out->shape[1],
          out->v.begin() + (r + 1) * out->shape[1]);
    return rows;
  }

  std::string train_corpus(const std::vector<Document>& docs,
                           const std::string& checkpoint_path) {
    const PackResult packed = pack_corpus(docs, cfg.model.dec.n_max);
    const TrainReport report =
        train(model, packed.sequences, cfg, state, checkpoint_path);
    return report.to_text();
  }

  void save(const std::string& path) const {
    save_checkpoint_file(path,
                         to_checkpoint(model, state, canonical_config_text(cfg)));
  }

  std::string generate(const std::vector<std::pair<std::string, std::string>>& demos,
                       const std::string& test_input, bool beam,
                       std::optional<int32_t> max_new) const {
    TaskRecord rec;
    for (const auto& [input, label] : demos) rec.demos.push_back({input, label});
    rec.test_input = test_input;
    const EvalEpisode ep = episode_from_record(
        rec, static_cast<int32_t>(rec.demos.size()), cfg.model.dec.n_max);
    DecodeOptions opt;
    opt.max_new = max_new ? *max_new : cfg.eval.max_new;
    opt.beam_size = cfg.eval.beam_size;
    opt.alpha = cfg.eval.alpha;
    return render_tokens(run_episode(model, ep, opt, beam).pred);
  }

  py::dict eval_records(const std::vector<TaskRecord>& records, int32_t k,
                        bool beam) const {
    DecodeOptions opt;
    opt.max_new = cfg.eval.max_new;
    opt.beam_size = cfg.eval.beam_size;
    opt.alpha = cfg.eval.alpha;
    const EvalReport rep = run_task_eval(model, records, k, opt, beam);
    py::dict out;
    out["episodes"] = rep.episodes;
    out["em"] = rep.em;
    out["f1"] = rep.f1;
    return out;
  }
};

}  // namespace

PYBIND11_MODULE(pysclm, m) {
  m.doc() = "semi-causal language modeling core";

  m.attr("BOS") = BOS;
  m.attr("EOP") = EOP;
  m.attr("EOD") = EOD;
  m.attr("PAD") = PAD;
  m.attr("VOCAB_SIZE") = VOCAB_SIZE;

  // tokenizer
  m.def("encode", [](const std::string& s) { return encode(s); });
  m.def("decode", &decode);
  m.def("render_tokens", &render_tokens);
  m.def("token_name", &token_name);

  // packing
  py::class_<PackedSequence>(m, "PackedSequence")
      .def_property_readonly("ids",
                             [](const PackedSequence& s) { return s.ids; })
      .def_property_readonly("doc_spans", [](const PackedSequence& s) {
        std::vector<std::pair<int32_t, int32_t>> out;
        for (const Interval& iv : s.doc_spans) out.emplace_back(iv.begin, iv.end);
        return out;
      });
  m.def("pack_corpus", [](const std::vector<Document>& docs, int32_t n) {
    PackResult r = pack_corpus(docs, n);
    return py::make_tuple(r.sequences, r.notes);
  });
  m.def("parse_corpus_text",
        [](const std::string& text) { return parse_corpus_text(text); });

  // spans
  py::class_<SpanLayout>(m, "SpanLayout")
      .def_property_readonly("n", [](const SpanLayout& l) { return l.n; })
      .def_property_readonly("spans", [](const SpanLayout& l) {
        std::vector<std::pair<int32_t, int32_t>> out;
        for (const Span& sp : l.spans) out.emplace_back(sp.s, sp.e);
        return out;
      });
  m.def("sample_spans",
        [](const PackedSequence& seq, double ratio, int32_t min_len,
           int32_t max_len, uint64_t seed) {
          RandomSource rng(seed);
          return sample_spans(seq, ratio, min_len, max_len, rng);
        });
  m.def("target_positions", &target_positions);
  m.def("prediction_source", &prediction_source);

  // masks
  py::class_<VisibilityMask>(m, "VisibilityMask")
      .def_property_readonly("n", [](const VisibilityMask& v) { return v.n; })
      .def("at", &VisibilityMask::at)
      .def("render", [](const VisibilityMask& v) { return render_mask(v); });
  m.def("causal_mask", &causal_mask);
  m.def("noncausal_mask", &noncausal_mask);
  m.def("prefix_mask", &prefix_mask);
  m.def("semicausal_flow",
        [](int32_t n, const std::vector<std::pair<int32_t, int32_t>>& spans) {
          return semicausal_flow(layout_from_pairs(n, spans));
        });

  // config
  m.def("canonical_config", [](const std::string& text) {
    return canonical_config_text(parse_config_text(text));
  });
  m.def("config_checksum", [](const std::string& text) {
    return config_checksum(parse_config_text(text));
  });

  // model
  py::class_<PyModel>(m, "Model")
      .def(py::init<const std::string&, std::optional<uint64_t>>(),
           py::arg("config_text"), py::arg("seed") = std::nullopt)
      .def_static("load",
                  [](const std::string& path) {
                    return std::make_unique<PyModel>(load_checkpoint_file(path));
                  })
      .def("loss", &PyModel::loss, py::arg("ids"),
           py::arg("spans") = std::vector<std::pair<int32_t, int32_t>>{})
      .def("logits", &PyModel::logits, py::arg("ids"),
           py::arg("spans") = std::vector<std::pair<int32_t, int32_t>>{})
      .def("train_corpus", &PyModel::train_corpus, py::arg("documents"),
           py::arg("checkpoint_path") = std::string())
      .def("save", &PyModel::save)
      .def("generate", &PyModel::generate, py::arg("demos"), py::arg("test_input"),
           py::arg("beam") = false, py::arg("max_new") = std::nullopt)
      .def("eval_records", &PyModel::eval_records, py::arg("records"),
           py::arg("k"), py::arg("beam") = false)
      .def_property_readonly("config_text",
                             [](const PyModel& pm) {
                               return canonical_config_text(pm.cfg);
                             })
      .def_property_readonly(
          "checksum", [](const PyModel& pm) { return config_checksum(pm.cfg); })
      .def_property_readonly("step",
                             [](const PyModel& pm) { return pm.state.step; });

  // decoding over an arbitrary python scorer
  m.def(
      "greedy_decode",
      [](const StepScorer& scorer, int32_t max_new, std::vector<TokenId> stop) {
        DecodeOptions opt;
        opt.max_new = max_new;
        opt.stop = std::move(stop);
        return greedy_decode(scorer, opt);
      },
      py::arg("scorer"), py::arg("max_new"),
      py::arg("stop") = std::vector<TokenId>{EOP, EOD});
  m.def(
      "beam_search",
      [](const StepScorer& scorer, int32_t max_new, int32_t beam_size,
         double alpha, std::vector<TokenId> stop) {
        DecodeOptions opt;
        opt.max_new = max_new;
        opt.beam_size = beam_size;
        opt.alpha = alpha;
        opt.stop = std::move(stop);
        return beam_search(scorer, opt);
      },
      py::arg("scorer"), py::arg("max_new"), py::arg("beam_size") = 4,
      py::arg("alpha") = 0.6, py::arg("stop") = std::vector<TokenId>{EOP, EOD});

  // tasks
  py::class_<TaskDemo>(m, "TaskDemo")
      .def(py::init<std::string, std::string>())
      .def_readwrite("input", &TaskDemo::input)
      .def_readwrite("label", &TaskDemo::label);
  py::class_<TaskRecord>(m, "TaskRecord")
      .def(py::init<>())
      .def_readwrite("demos", &TaskRecord::demos)
      .def_readwrite("test_input", &TaskRecord::test_input)
      .def_readwrite("gold", &TaskRecord::gold);
  m.def("gen_kv_recall",
        [](uint64_t seed, int32_t episodes, int32_t demos, bool heldout) {
          RandomSource rng(seed);
          return gen_kv_recall(rng, episodes, demos, heldout);
        });
  m.def("gen_kv_corpus",
        [](uint64_t seed, int32_t docs, int32_t keys, int32_t repeats) {
          RandomSource rng(seed);
          return gen_kv_corpus(rng, docs, keys, repeats);
        });
  m.def("gen_toy_classify", [](uint64_t seed, int32_t episodes, int32_t demos) {
    RandomSource rng(seed);
    return gen_toy_classify(rng, episodes, demos);
  });
  m.def("kv_episode_solvable", &kv_episode_solvable);
  m.def("read_task_file", &read_task_file);
  m.def("write_task_file", &write_task_file);

  // metrics
  m.def("exact_match", &exact_match);
  m.def("token_f1", &token_f1);

  // errors -> python exceptions
  py::register_exception<ContractError>(m, "ContractError");
  py::register_exception<DimensionError>(m, "DimensionError");
  py::register_exception<ParseError>(m, "ParseFailure");
  py::register_exception<FormatError>(m, "FormatFailure");
  py::register_exception<IoError>(m, "IoFailure");
}
