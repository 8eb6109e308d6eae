// SPDX-License-Identifier: Apache-2.0
//
// sclm: command-line front end tying configuration, packing, training,
// decoding, and evaluation into reproducible runs.
//
// Exit codes: 0 success, 2 missing file / I/O failure, 3 parse failure,
// 4 binary-format or version mismatch, 1 anything else. Errors print one
// machine-parsable line to stderr: "error kind=<kind>: <message>".

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sclm/config.hpp"
#include "sclm/eval.hpp"
#include "sclm/tasks.hpp"
#include "sclm/training.hpp"

namespace {

using namespace sclm;

// SCLM_SEED is the only environment override; it beats both the config file
// and --seed so CI can resweep fixed command lines.
void resolve_seed(RunConfig& cfg, const std::optional<uint64_t>& flag_seed) {
  if (flag_seed) cfg.train.seed = *flag_seed;
  if (const char* env = std::getenv("SCLM_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
      throw ParseError("SCLM_SEED must be a non-negative integer");
    cfg.train.seed = static_cast<uint64_t>(v);
  }
}

struct DecodeFlags {
  std::string decode;
  int32_t beam_size = -1;
  double alpha = -1.0;
  int32_t max_new = -1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--decode", decode, "greedy|beam");
    cmd->add_option("--beam-size", beam_size, "beam width");
    cmd->add_option("--alpha", alpha, "length-penalty exponent");
    cmd->add_option("--max-new", max_new, "generation budget in tokens");
  }

  // Flags override the [eval] section; unset flags keep config values.
  std::pair<DecodeOptions, bool> resolve(const EvalConfig& ec) const {
    EvalConfig merged = ec;
    if (!decode.empty()) merged.decode = decode;
    if (beam_size >= 0) merged.beam_size = beam_size;
    if (alpha >= 0.0) merged.alpha = alpha;
    if (max_new >= 0) merged.max_new = max_new;
    if (merged.decode != "greedy" && merged.decode != "beam")
      throw ParseError("--decode must be greedy or beam");
    DecodeOptions opt;
    opt.max_new = merged.max_new;
    opt.beam_size = merged.beam_size;
    opt.alpha = merged.alpha;
    return {opt, merged.decode == "beam"};
  }
};

using Model = MetaLM<float>;

// An explicit --config wins; otherwise the configuration embedded in the
// checkpoint is used, so checkpoint-consuming commands run without a file.
RunConfig resolve_config(const std::string& config_path, const CheckpointData& data) {
  return config_path.empty() ? parse_config_text(data.config_text)
                             : load_config_file(config_path);
}

Model load_model(const RunConfig& cfg, const CheckpointData& data,
                 AdamState<float>* state_out = nullptr) {
  Model model(cfg.model, cfg.train.seed);
  AdamState<float> state;
  from_checkpoint(model, state, data);
  if (state_out) *state_out = std::move(state);
  return model;
}

// Supervised sequence for one episode: the assembled prompt followed by the
// gold answer and a closing delimiter, keeping the episode's span layout.
std::pair<PackedSequence, SpanLayout> training_sequence(const TaskRecord& rec,
                                                        int32_t k, int32_t n_max) {
  EvalEpisode ep = episode_from_record(rec, k, n_max);
  PackedSequence seq = ep.seq;
  seq.ids.insert(seq.ids.end(), ep.gold.begin(), ep.gold.end());
  seq.ids.push_back(EOP);
  if (static_cast<int32_t>(seq.ids.size()) > n_max)
    throw ContractError("task episode with answer exceeds the decoder maximum");
  seq.doc_spans = {{0, static_cast<int32_t>(seq.ids.size())}};
  SpanLayout layout{static_cast<int32_t>(seq.ids.size()), ep.layout.spans};
  return {std::move(seq), std::move(layout)};
}

int cmd_pretrain(const std::string& config_path, const std::string& corpus_path,
                 const std::string& out_path, const std::optional<uint64_t>& seed) {
  RunConfig cfg = load_config_file(config_path);
  resolve_seed(cfg, seed);
  const auto docs = load_corpus_file(corpus_path);
  const PackResult packed = pack_corpus(docs, cfg.model.dec.n_max);
  for (const std::string& note : packed.notes) std::cout << "note: " << note << "\n";

  Model model(cfg.model, cfg.train.seed);
  AdamState<float> state;
  const TrainReport report = train(model, packed.sequences, cfg, state, out_path);
  write_report_file(out_path + ".report.txt", report);
  std::cout << "pretrain done: steps=" << report.steps.size()
            << " final_loss=" << report.steps.back().loss
            << " checkpoint=" << out_path
            << " config_checksum=" << report.config_checksum
            << " seed=" << report.seed << "\n";
  return 0;
}

int cmd_finetune(const std::string& config_path, const std::string& checkpoint_path,
                 const std::string& task_path, const std::string& out_path,
                 int32_t k, const std::string& policy,
                 const std::optional<uint64_t>& seed) {
  const CheckpointData data = load_checkpoint_file(checkpoint_path);
  RunConfig cfg = resolve_config(config_path, data);
  resolve_seed(cfg, seed);
  if (!policy.empty()) cfg.train.policy = parse_policy(policy);
  Model model = load_model(cfg, data);

  std::vector<PackedSequence> seqs;
  std::vector<SpanLayout> layouts;
  for (const TaskRecord& rec : read_task_file(task_path)) {
    auto [seq, layout] = training_sequence(rec, k, cfg.model.dec.n_max);
    seqs.push_back(std::move(seq));
    layouts.push_back(std::move(layout));
  }

  AdamState<float> state;  // finetuning restarts the optimizer
  const TrainReport report = train(model, seqs, cfg, state, out_path, &layouts);
  write_report_file(out_path + ".report.txt", report);
  std::cout << "finetune done: policy=" << policy_name(cfg.train.policy)
            << " episodes=" << seqs.size()
            << " final_loss=" << report.steps.back().loss
            << " checkpoint=" << out_path
            << " config_checksum=" << report.config_checksum
            << " seed=" << report.seed << "\n";
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& checkpoint_path,
             const std::string& task_path, int32_t k, const DecodeFlags& flags,
             const std::optional<uint64_t>& seed) {
  const CheckpointData data = load_checkpoint_file(checkpoint_path);
  RunConfig cfg = resolve_config(config_path, data);
  resolve_seed(cfg, seed);
  const auto [opt, beam] = flags.resolve(cfg.eval);
  Model model = load_model(cfg, data);
  const auto records = read_task_file(task_path);

  EvalReport rep = run_task_eval(model, records, k, opt, beam);
  rep.task = task_path;
  rep.config_checksum = config_checksum(cfg);
  rep.seed = cfg.train.seed;
  std::cout << rep.to_text();
  std::ofstream out(checkpoint_path + ".eval.txt");
  if (!out) throw IoError("cannot write report beside the checkpoint");
  out << rep.to_text();
  return 0;
}

int cmd_sample(const std::string& config_path, const std::string& checkpoint_path,
               const std::string& prompt, const DecodeFlags& flags,
               const std::optional<uint64_t>& seed) {
  const CheckpointData data = load_checkpoint_file(checkpoint_path);
  RunConfig cfg = resolve_config(config_path, data);
  resolve_seed(cfg, seed);
  const auto [opt, beam] = flags.resolve(cfg.eval);
  Model model = load_model(cfg, data);
  const EvalEpisode ep =
      build_icl_episode({}, encode(prompt), {}, 0, cfg.model.dec.n_max);
  const EpisodeOutcome out = run_episode(model, ep, opt, beam);
  std::cout << render_tokens(out.pred) << "\n";
  return 0;
}

SpanLayout parse_layout_spec(int32_t n, const std::string& spec) {
  SpanLayout layout{n, {}};
  if (spec.empty()) return layout;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const size_t colon = part.find(':');
    if (colon == std::string::npos)
      throw ParseError("layout spec wants comma-separated s:e pairs, got: " + part);
    try {
      layout.spans.push_back({std::stoi(part.substr(0, colon)),
                              std::stoi(part.substr(colon + 1))});
    } catch (const std::exception&) {
      throw ParseError("layout spec has a non-integer bound: " + part);
    }
  }
  return layout;
}

int cmd_inspect_masks(const std::string& variant, int32_t n, int32_t prefix_len,
                      const std::string& layout_spec) {
  VisibilityMask mask;
  if (variant == "causal") {
    mask = causal_mask(n);
  } else if (variant == "noncausal") {
    mask = noncausal_mask(n);
  } else if (variant == "prefix") {
    mask = prefix_mask(n, prefix_len);
  } else if (variant == "semicausal") {
    mask = semicausal_flow(parse_layout_spec(n, layout_spec));
  } else {
    throw ParseError("unknown mask variant: " + variant);
  }
  std::cout << render_mask(mask);
  return 0;
}

int cmd_gen_corpus(const std::string& out_path, int32_t docs, int32_t keys,
                   int32_t repeats, uint64_t seed) {
  RandomSource rng(seed);
  const auto documents = gen_kv_corpus(rng, docs, keys, repeats);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("cannot open corpus file for writing: " + out_path);
  for (size_t d = 0; d < documents.size(); ++d) {
    if (d) out << "\n";  // blank line separates documents
    for (const std::string& para : documents[d]) out << para << "\n";
  }
  std::cout << "wrote " << documents.size() << " documents to " << out_path << "\n";
  return 0;
}

int cmd_gen_tasks(const std::string& out_path, const std::string& kind,
                  int32_t episodes, int32_t demos, bool heldout, uint64_t seed) {
  RandomSource rng(seed);
  std::vector<TaskRecord> records;
  if (kind == "kv") {
    records = gen_kv_recall(rng, episodes, demos, heldout);
  } else if (kind == "classify") {
    records = gen_toy_classify(rng, episodes, demos);
  } else {
    throw ParseError("unknown task kind: " + kind);
  }
  write_task_file(out_path, records);
  std::cout << "wrote " << records.size() << " episodes to " << out_path << "\n";
  return 0;
}

int guarded(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const IoError& e) {
    std::cerr << "error kind=io: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error kind=parse: " << e.what() << "\n";
    return 3;
  } catch (const FormatError& e) {
    std::cerr << "error kind=format: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error kind=internal: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semi-causal language modeling toolkit"};
  app.require_subcommand(1);

  std::string config_path, corpus_path, checkpoint_path, task_path, out_path;
  std::string prompt, policy, variant = "causal", layout_spec, kind = "kv";
  int32_t k = 0, n = 8, prefix_len = 0, docs = 50, keys = 4, repeats = 2,
          episodes = 100, demos = 2;
  bool heldout = false;
  std::optional<uint64_t> seed_flag;
  uint64_t gen_seed = 1;

  auto* pre = app.add_subcommand("pretrain", "train on a packed corpus");
  pre->add_option("--config", config_path)->required();
  pre->add_option("--corpus", corpus_path)->required();
  pre->add_option("--checkpoint", checkpoint_path, "output checkpoint path")->required();
  pre->add_option("--seed", seed_flag);

  auto* fin = app.add_subcommand("finetune", "adapt a checkpoint on a task file");
  fin->add_option("--config", config_path, "defaults to the checkpoint-embedded config");
  fin->add_option("--checkpoint", checkpoint_path, "input checkpoint")->required();
  fin->add_option("--task", task_path)->required();
  fin->add_option("--out", out_path, "output checkpoint path")->required();
  fin->add_option("--k", k, "demonstrations per training episode");
  fin->add_option("--policy", policy, "pretrain|single_task|full");
  fin->add_option("--seed", seed_flag);

  DecodeFlags eval_flags;
  auto* ev = app.add_subcommand("eval", "score a task file");
  ev->add_option("--config", config_path, "defaults to the checkpoint-embedded config");
  ev->add_option("--checkpoint", checkpoint_path)->required();
  ev->add_option("--task", task_path)->required();
  ev->add_option("--k", k, "in-context demonstrations per episode");
  eval_flags.attach(ev);
  ev->add_option("--seed", seed_flag);

  DecodeFlags sample_flags;
  auto* sam = app.add_subcommand("sample", "generate from an encoded prompt");
  sam->add_option("--config", config_path, "defaults to the checkpoint-embedded config");
  sam->add_option("--checkpoint", checkpoint_path)->required();
  sam->add_option("--prompt", prompt)->required();
  sample_flags.attach(sam);
  sam->add_option("--seed", seed_flag);

  auto* ins = app.add_subcommand("inspect-masks", "render a visibility mask");
  ins->add_option("--variant", variant, "causal|noncausal|prefix|semicausal");
  ins->add_option("--n", n, "sequence length")->required();
  ins->add_option("--prefix-len", prefix_len, "prefix boundary (prefix variant)");
  ins->add_option("--layout", layout_spec, "spans as 1-based s:e,s:e (semicausal)");

  auto* gc = app.add_subcommand("gen-corpus", "synthesize a key=value corpus");
  gc->add_option("--out", out_path)->required();
  gc->add_option("--docs", docs);
  gc->add_option("--keys", keys, "distinct keys per document");
  gc->add_option("--repeats", repeats, "extra occurrences per key");
  gc->add_option("--seed", gen_seed);

  auto* gt = app.add_subcommand("gen-tasks", "synthesize an episode file");
  gt->add_option("--out", out_path)->required();
  gt->add_option("--kind", kind, "kv|classify");
  gt->add_option("--episodes", episodes);
  gt->add_option("--demos", demos, "stored demonstrations per episode");
  gt->add_flag("--heldout", heldout, "draw keys from the held-out alphabet");
  gt->add_option("--seed", gen_seed);

  CLI11_PARSE(app, argc, argv);

  if (pre->parsed())
    return guarded([&] { return cmd_pretrain(config_path, corpus_path, checkpoint_path, seed_flag); });
  if (fin->parsed())
    return guarded([&] {
      return cmd_finetune(config_path, checkpoint_path, task_path, out_path, k, policy, seed_flag);
    });
  if (ev->parsed())
    return guarded([&] { return cmd_eval(config_path, checkpoint_path, task_path, k, eval_flags, seed_flag); });
  if (sam->parsed())
    return guarded([&] { return cmd_sample(config_path, checkpoint_path, prompt, sample_flags, seed_flag); });
  if (ins->parsed())
    return guarded([&] { return cmd_inspect_masks(variant, n, prefix_len, layout_spec); });
  if (gc->parsed())
    return guarded([&] { return cmd_gen_corpus(out_path, docs, keys, repeats, gen_seed); });
  if (gt->parsed())
    return guarded([&] { return cmd_gen_tasks(out_path, kind, episodes, demos, heldout, gen_seed); });
  return 1;
}
