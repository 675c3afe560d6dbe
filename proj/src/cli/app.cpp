#include "dualview/cli/app.h"

#include "dualview/bench/latency.h"
#include "dualview/data/dataset_io.h"
#include "dualview/data/mining.h"
#include "dualview/data/synthetic.h"
#include "dualview/errors.h"
#include "dualview/eval/evaluate.h"
#include "dualview/model/dualview.h"
#include "dualview/model/mlp_baseline.h"
#include "dualview/training/trainer.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <limits>
#include <memory>
#include <ostream>
#include <set>

namespace dualview::cli {
namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("DUALVIEW_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::logic_error&) {
      throw ConfigError(std::string("DUALVIEW_SEED is not an unsigned integer: ") + env);
    }
  }
  return 42;
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = one_line(message);
  err << j.dump() << "\n";
}

struct ModelFlags {
  model::ModelConfig cfg;
  std::string ablation = "full";
  std::string kind = "dualview";
  std::size_t mlp_hidden = 256;

  void add(CLI::App& app) {
    app.add_option("--model-kind", kind, "dualview or mlp_baseline")->check(CLI::IsMember({"dualview", "mlp_baseline"}));
    app.add_option("--embed-dim", cfg.embed_dim, "Embedding width (0 = from data)")->capture_default_str();
    app.add_option("--local-layers", cfg.local_layers)->capture_default_str();
    app.add_option("--local-heads", cfg.local_heads)->capture_default_str();
    app.add_option("--global-dim", cfg.global_dim)->capture_default_str();
    app.add_option("--global-layers", cfg.global_layers)->capture_default_str();
    app.add_option("--global-heads", cfg.global_heads)->capture_default_str();
    app.add_option("--max-candidates", cfg.max_candidates)->capture_default_str();
    app.add_option("--local-mlp-hidden", cfg.local_mlp_hidden)->capture_default_str();
    app.add_option("--global-mlp-hidden", cfg.global_mlp_hidden)->capture_default_str();
    app.add_option("--gate-hidden", cfg.gate_hidden)->capture_default_str();
    app.add_option("--mlp-hidden", mlp_hidden, "Hidden width of the mlp_baseline")->capture_default_str();
    app.add_option("--ablation", ablation, "full, avg_fusion, no_global or no_local")->capture_default_str();
  }

  model::ModelConfig resolve(std::size_t data_dim) const {
    model::ModelConfig out = cfg;
    if (out.embed_dim == 0) out.embed_dim = data_dim;
    out.ablation = model::parse_ablation(ablation);
    out.validate();
    return out;
  }
};

struct TrainFlags {
  training::TrainConfig cfg;

  void add(CLI::App& app) {
    app.add_option("--lr", cfg.base_lr, "Peak learning rate")->capture_default_str();
    app.add_option("--weight-decay", cfg.weight_decay)->capture_default_str();
    app.add_option("--warmup", cfg.warmup_fraction, "Warmup fraction of total steps")->capture_default_str();
    app.add_option("--clip", cfg.max_grad_norm, "Global gradient norm limit")->capture_default_str();
    app.add_option("--batch", cfg.batch_size)->capture_default_str();
    app.add_option("--accum", cfg.accumulation_steps, "Gradient accumulation steps")->capture_default_str();
    app.add_option("--epochs", cfg.epochs)->capture_default_str();
    app.add_option("--eval-every", cfg.eval_every, "Validation interval in steps (0 = end only)")
        ->capture_default_str();
    app.add_option("--select", cfg.selection_metric, "Validation metric used for model selection")
        ->capture_default_str();
    app.add_option("--w-bce", cfg.loss.weight_bce)->capture_default_str();
    app.add_option("--w-margin", cfg.loss.weight_margin)->capture_default_str();
    app.add_option("--w-infonce", cfg.loss.weight_infonce)->capture_default_str();
    app.add_option("--w-triplet", cfg.loss.weight_triplet)->capture_default_str();
    app.add_option("--w-views", cfg.view_loss_weight, "Extra loss weight on each intermediate score view")
        ->capture_default_str();
    app.add_option("--margin", cfg.loss.margin_pairwise)->capture_default_str();
    app.add_option("--triplet-margin", cfg.loss.margin_triplet)->capture_default_str();
    app.add_option("--temperature", cfg.loss.infonce_temperature)->capture_default_str();
  }
};

data::ValidationLimits limits_for(std::size_t max_candidates, bool require_gold = false) {
  data::ValidationLimits l;
  l.max_candidates = max_candidates;
  l.require_gold = require_gold;
  return l;
}

std::size_t dataset_dim(const data::Dataset& d, const std::string& path) {
  if (d.empty()) throw InputError("dataset '" + path + "' is empty");
  return d.front().embed_dim();
}

std::unique_ptr<model::Scorer<float>> build_model(const ModelFlags& flags, std::size_t data_dim, std::uint64_t seed,
                                                  model::ModelConfig* resolved = nullptr) {
  if (flags.kind == "mlp_baseline") {
    const std::size_t dim = flags.cfg.embed_dim == 0 ? data_dim : flags.cfg.embed_dim;
    return std::make_unique<model::MlpBaseline<float>>(dim, flags.mlp_hidden, seed);
  }
  const model::ModelConfig cfg = flags.resolve(data_dim);
  if (resolved != nullptr) *resolved = cfg;
  return std::make_unique<model::DualViewModel<float>>(cfg, seed);
}

std::size_t capacity_of(const model::Scorer<float>& scorer) {
  if (const auto* m = dynamic_cast<const model::DualViewModel<float>*>(&scorer)) return m->config().max_candidates;
  return std::numeric_limits<std::size_t>::max();
}

std::string fingerprint_of(const model::Scorer<float>& scorer, std::size_t k) {
  auto kv = scorer.checkpoint_header();
  kv.emplace_back("k", std::to_string(k));
  return model::fingerprint_of(kv);
}

void emit_train_summary(std::ostream& out, const std::string& format, const training::TrainResult& r,
                        const std::string& path) {
  if (format == "json") {
    nlohmann::ordered_json j;
    j["checkpoint"] = path;
    j["steps"] = r.steps;
    j["best_step"] = r.best_step ? nlohmann::ordered_json(*r.best_step) : nlohmann::ordered_json(nullptr);
    j["best_metric"] = r.best_metric;
    out << j.dump() << "\n";
  } else {
    out << "trained " << r.steps << " steps";
    if (r.best_step) out << ", best validation " << r.best_metric << " after step " << *r.best_step;
    out << "\nsaved " << path << "\n";
  }
}

int cmd_gen_synth(const data::SyntheticConfig& cfg, const std::string& out_path, const std::string& format,
                  std::ostream& out) {
  const data::Dataset d = data::generate_synthetic(cfg);
  if (format == "binary") {
    data::save_binary(out_path, d);
  } else {
    data::save_dataset(out_path, d);
  }
  out << "wrote " << d.size() << " queries to " << out_path << "\n";
  return kOk;
}

int cmd_mine(const std::string& queries_path, const std::string& pool_path, std::size_t target, std::size_t k,
             std::uint64_t seed, const std::string& out_path, std::ostream& out, std::ostream& err) {
  const data::Dataset queries = data::load_any(queries_path, limits_for(std::numeric_limits<std::size_t>::max()));
  const data::Dataset pool_sets = data::load_any(pool_path, limits_for(std::numeric_limits<std::size_t>::max()));
  std::vector<data::Candidate> pool;
  std::set<std::string> seen;
  for (const auto& s : pool_sets) {
    for (const auto& c : s.candidates) {
      if (seen.insert(c.doc_id).second) pool.push_back({c.doc_id, c.embedding, 0});
    }
  }
  if (pool.empty()) throw InputError("distractor pool '" + pool_path + "' holds no documents");
  std::vector<data::EmbeddingVector> pool_vecs;
  for (const auto& c : pool) pool_vecs.push_back(c.embedding);

  data::Dataset result;
  bool truncated = false;
  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const auto& q = queries[qi];
    std::vector<data::Candidate> golds;
    std::vector<data::EmbeddingVector> gold_vecs;
    std::set<std::string> gold_ids;
    for (const auto& c : q.candidates) {
      if (c.label == 1) {
        golds.push_back(c);
        gold_vecs.push_back(c.embedding);
        gold_ids.insert(c.doc_id);
      }
    }
    if (golds.empty()) throw InputError("query '" + q.query_id + "' has no gold document to mine around");
    const data::MiningResult mined = data::mine_hard_negatives(gold_vecs, pool_vecs, k);
    truncated = truncated || mined.truncated;
    std::vector<data::Candidate> negatives;
    for (std::size_t idx : data::merge_neighbors(mined)) {
      if (!gold_ids.count(pool[idx].doc_id)) negatives.push_back(pool[idx]);
    }
    result.push_back(data::build_candidate_set(q.query_id, q.query_embedding, golds, negatives, target, seed + qi));
  }
  if (truncated) report_error(err, "warning", "k exceeds the distractor pool; neighbor lists were truncated");
  data::save_dataset(out_path, result);
  out << "wrote " << result.size() << " candidate sets to " << out_path << "\n";
  return kOk;
}

int cmd_train(const ModelFlags& mflags, const TrainFlags& tflags, const std::string& train_path,
              const std::string& val_path, const std::string& out_path, const std::string& log_path,
              const std::string& format, std::ostream& out, std::ostream& err) {
  const std::size_t cap = mflags.kind == "dualview" ? mflags.cfg.max_candidates : std::numeric_limits<std::size_t>::max();
  const data::Dataset train = data::load_any(train_path, limits_for(cap, true));
  const data::Dataset val = val_path.empty() ? data::Dataset{} : data::load_any(val_path, limits_for(cap));
  auto scorer = build_model(mflags, dataset_dim(train, train_path), tflags.cfg.seed);

  std::ofstream log_file;
  if (!log_path.empty()) {
    log_file.open(log_path, std::ios::binary | std::ios::trunc);
    if (!log_file) throw InputError("cannot open log file '" + log_path + "'");
  }
  const training::TrainResult r = training::train(*scorer, train, val, tflags.cfg, log_path.empty() ? nullptr : &log_file);
  if (r.aborted) {
    model::save_model(out_path, *scorer);
    report_error(err, "numerical", r.diagnostic + " (last good parameters saved to " + out_path + ")");
    return kNumericalError;
  }
  model::save_model(out_path, *scorer);
  emit_train_summary(out, format, r, out_path);
  return kOk;
}

int cmd_rerank(const std::string& model_path, const std::string& data_path, const std::string& format,
               std::ostream& out) {
  const auto scorer = model::load_scorer(nn::load_checkpoint(model_path));
  const data::Dataset d = data::load_any(data_path, limits_for(capacity_of(*scorer)));
  const auto* dual = dynamic_cast<const model::DualViewModel<float>*>(scorer.get());
  for (const auto& set : d) {
    model::ScoredCandidates scored;
    if (dual != nullptr) {
      scored = dual->rerank(set);
    } else {
      const auto values = scorer->score_values(set);
      scored.documents.resize(set.size());
      for (std::size_t i = 0; i < set.size(); ++i) scored.documents[i].fused = values[i];
      scored.ranking = model::rank_by_scores(std::span<const float>(values));
    }
    if (format == "json") {
      nlohmann::ordered_json j;
      j["query_id"] = set.query_id;
      nlohmann::ordered_json docs = nlohmann::ordered_json::array();
      for (std::size_t idx : scored.ranking) {
        const auto& s = scored.documents[idx];
        nlohmann::ordered_json doc;
        doc["doc_id"] = set.candidates[idx].doc_id;
        doc["local"] = s.local;
        doc["global"] = s.global;
        doc["gate"] = s.gate_weight;
        doc["fused"] = s.fused;
        docs.push_back(doc);
      }
      j["ranking"] = docs;
      out << j.dump() << "\n";
    } else {
      out << set.query_id << "\n";
      std::size_t rank = 1;
      for (std::size_t idx : scored.ranking) {
        const auto& s = scored.documents[idx];
        out << "  " << rank++ << ". " << set.candidates[idx].doc_id << "  fused " << s.fused << "  local " << s.local
            << "  global " << s.global << "  gate " << s.gate_weight << "\n";
      }
    }
  }
  return kOk;
}

int cmd_eval(const std::string& model_path, const std::string& baseline, const std::string& data_path,
             std::size_t k, std::size_t threads, const std::string& format, std::ostream& out) {
  eval::EvalOptions opts;
  opts.k = k;
  opts.threads = threads;
  eval::MetricsReport report;
  if (!baseline.empty()) {
    const data::Dataset d = data::load_any(data_path, limits_for(std::numeric_limits<std::size_t>::max()));
    opts.label = "cosine";
    opts.fingerprint = model::fingerprint_of({{"model", "cosine"}, {"k", std::to_string(k)}});
    report = eval::evaluate_cosine(d, opts);
  } else {
    const auto scorer = model::load_scorer(nn::load_checkpoint(model_path));
    const data::Dataset d = data::load_any(data_path, limits_for(capacity_of(*scorer)));
    opts.label = model_path;
    opts.fingerprint = fingerprint_of(*scorer, k);
    report = eval::evaluate(*scorer, d, opts);
  }
  out << (format == "json" ? report.to_json() + "\n" : report.to_text());
  return kOk;
}

int cmd_ablate(const ModelFlags& mflags, const TrainFlags& tflags, const std::string& train_path,
               const std::string& val_path, const std::string& data_path, const std::string& from_prefix,
               const std::string& save_prefix, std::size_t k, bool with_cosine, const std::string& format,
               std::ostream& out, std::ostream& err) {
  if (train_path.empty() == from_prefix.empty()) {
    throw ConfigError("ablate needs exactly one of --train (train every variant) or --from (load checkpoints)");
  }
  const data::Dataset eval_data = data::load_any(data_path, limits_for(mflags.cfg.max_candidates));
  data::Dataset train, val;
  if (!train_path.empty()) {
    train = data::load_any(train_path, limits_for(mflags.cfg.max_candidates, true));
    if (!val_path.empty()) val = data::load_any(val_path, limits_for(mflags.cfg.max_candidates));
  }
  std::vector<eval::MetricsReport> reports;
  if (with_cosine) {
    eval::EvalOptions opts;
    opts.k = k;
    opts.label = "cosine";
    reports.push_back(eval::evaluate_cosine(eval_data, opts));
  }
  for (model::Ablation a : model::kAllAblations) {
    std::unique_ptr<model::Scorer<float>> scorer;
    const std::string name = model::to_string(a);
    if (!from_prefix.empty()) {
      scorer = model::load_scorer(nn::load_checkpoint(from_prefix + name + ".ckpt"));
    } else {
      ModelFlags variant = mflags;
      variant.kind = "dualview";
      variant.ablation = name;
      scorer = build_model(variant, dataset_dim(train, train_path), tflags.cfg.seed);
      const training::TrainResult r = training::train(*scorer, train, val, tflags.cfg);
      if (r.aborted) {
        report_error(err, "numerical", name + ": " + r.diagnostic);
        return kNumericalError;
      }
      if (!save_prefix.empty()) model::save_model(save_prefix + name + ".ckpt", *scorer);
    }
    eval::EvalOptions opts;
    opts.k = k;
    opts.label = name;
    opts.fingerprint = fingerprint_of(*scorer, k);
    reports.push_back(eval::evaluate(*scorer, eval_data, opts));
  }
  out << (format == "json" ? eval::reports_to_json(reports) + "\n" : eval::format_table(reports));
  return kOk;
}

int cmd_bench(const ModelFlags& mflags, const std::string& model_path, const std::string& data_path,
              std::size_t n_candidates, std::size_t warmup, std::size_t iters, std::size_t streams,
              std::uint64_t seed, const std::string& format, std::ostream& out, std::ostream& err) {
  std::unique_ptr<model::Scorer<float>> scorer;
  if (!model_path.empty()) {
    scorer = model::load_scorer(nn::load_checkpoint(model_path));
  } else {
    ModelFlags defaults = mflags;
    if (defaults.cfg.embed_dim == 0) defaults.cfg.embed_dim = 768;
    scorer = build_model(defaults, defaults.cfg.embed_dim, seed);
  }
  data::Dataset d;
  if (!data_path.empty()) {
    d = data::load_any(data_path, limits_for(capacity_of(*scorer)));
  } else {
    data::SyntheticConfig syn;
    syn.n_queries = 64;
    syn.n_candidates = n_candidates;
    const auto* dual = dynamic_cast<const model::DualViewModel<float>*>(scorer.get());
    syn.embed_dim = dual != nullptr ? dual->config().embed_dim
                                    : static_cast<const model::MlpBaseline<float>*>(scorer.get())->embed_dim();
    syn.seed = seed;
    d = data::generate_synthetic(syn);
  }
  bench::BenchOptions opts;
  opts.warmup = warmup;
  opts.iters = iters;
  opts.streams = streams;
  opts.fingerprint = fingerprint_of(*scorer, 0);
  const bench::LatencyReport report = bench::bench_rerank(*scorer, d, opts);
  (void)err;
  out << (format == "json" ? report.to_json() + "\n" : report.to_text());
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual-view neural reranker over cached embeddings"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", "dualview 1.0");

  std::uint64_t seed = 0;
  std::string format = "text";
  bool seed_given = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option_function<std::uint64_t>(
        "--seed",
        [&](const std::uint64_t& s) {
          seed = s;
          seed_given = true;
        },
        "Random seed (default: $DUALVIEW_SEED or 42)");
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
  };

  // gen-synth
  auto* gen = app.add_subcommand("gen-synth", "Generate a synthetic candidate-set dataset");
  data::SyntheticConfig syn;
  std::string syn_mode = "planted_similarity";
  std::string gen_out;
  std::string gen_file_format = "jsonl";
  gen->add_option("--mode", syn_mode, "planted_similarity or complementary_pair")->capture_default_str();
  gen->add_option("--queries", syn.n_queries)->capture_default_str();
  gen->add_option("--candidates", syn.n_candidates)->capture_default_str();
  gen->add_option("--dim", syn.embed_dim)->capture_default_str();
  gen->add_option("--sigma", syn.noise_sigma, "Noise scale")->capture_default_str();
  gen->add_option("--gold", syn.n_gold, "Gold documents per query")->capture_default_str();
  gen->add_option("--id-prefix", syn.id_prefix)->capture_default_str();
  gen->add_option("--file-format", gen_file_format, "jsonl or binary")
      ->check(CLI::IsMember({"jsonl", "binary"}))
      ->capture_default_str();
  gen->add_option("--out", gen_out, "Output path")->required();
  add_common(gen);

  // mine-negatives
  auto* mine = app.add_subcommand("mine-negatives", "Rebuild candidate sets from cosine-mined hard negatives");
  std::string mine_queries, mine_pool, mine_out;
  std::size_t mine_target = 10, mine_k = 10;
  mine->add_option("--queries", mine_queries, "Dataset whose label-1 documents are the golds")->required();
  mine->add_option("--pool", mine_pool, "Dataset whose documents form the distractor pool")->required();
  mine->add_option("--target", mine_target, "Candidates per output set")->capture_default_str();
  mine->add_option("--k", mine_k, "Neighbors mined per gold")->capture_default_str();
  mine->add_option("--out", mine_out)->required();
  add_common(mine);

  // train
  auto* train = app.add_subcommand("train", "Train a reranker and save the selected checkpoint");
  ModelFlags train_model;
  train_model.cfg.embed_dim = 0;
  TrainFlags train_flags;
  std::string train_path, val_path, train_out, log_path;
  train->add_option("--train", train_path, "Training dataset")->required();
  train->add_option("--val", val_path, "Validation dataset for model selection");
  train->add_option("--out", train_out, "Checkpoint path")->required();
  train->add_option("--log", log_path, "JSON-lines training log");
  train_model.add(*train);
  train_flags.add(*train);
  add_common(train);

  // rerank
  auto* rerank = app.add_subcommand("rerank", "Rank candidates and print every per-document score");
  std::string rr_model, rr_data;
  rerank->add_option("--model", rr_model, "Checkpoint")->required();
  rerank->add_option("--data", rr_data, "Dataset")->required();
  add_common(rerank);

  // eval
  auto* evalc = app.add_subcommand("eval", "Report Recall, Full-Hit, NDCG, MRR and Precision at k");
  std::string ev_model, ev_baseline, ev_data;
  std::size_t ev_k = 4, ev_threads = 1;
  auto* ev_model_opt = evalc->add_option("--model", ev_model, "Checkpoint");
  auto* ev_base_opt =
      evalc->add_option("--baseline", ev_baseline, "Evaluate a fixed baseline instead")->check(CLI::IsMember({"cosine"}));
  ev_model_opt->excludes(ev_base_opt);
  evalc->add_option("--data", ev_data, "Dataset")->required();
  evalc->add_option("--k", ev_k)->capture_default_str();
  evalc->add_option("--threads", ev_threads)->capture_default_str();
  add_common(evalc);

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Evaluate full, avg_fusion, no_global and no_local side by side");
  ModelFlags ab_model;
  ab_model.cfg.embed_dim = 0;
  TrainFlags ab_flags;
  std::string ab_train, ab_val, ab_data, ab_from, ab_save;
  std::size_t ab_k = 4;
  bool ab_cosine = false;
  ablate->add_option("--data", ab_data, "Evaluation dataset")->required();
  ablate->add_option("--train", ab_train, "Train each variant on this dataset");
  ablate->add_option("--val", ab_val, "Validation dataset for model selection");
  ablate->add_option("--from", ab_from, "Load <prefix><variant>.ckpt instead of training");
  ablate->add_option("--save-prefix", ab_save, "Save trained variants as <prefix><variant>.ckpt");
  ablate->add_option("--k", ab_k)->capture_default_str();
  ablate->add_flag("--with-cosine", ab_cosine, "Add a cosine baseline row");
  ab_model.add(*ablate);
  ab_flags.add(*ablate);
  add_common(ablate);

  // bench
  auto* benchc = app.add_subcommand("bench", "Batch-1 rerank latency over cached embeddings");
  ModelFlags bench_model;
  std::string bench_ckpt, bench_data;
  std::size_t bench_warmup = 100, bench_iters = 1000, bench_streams = 1, bench_n = 10;
  benchc->add_option("--model", bench_ckpt, "Checkpoint (default: randomly initialized model)");
  benchc->add_option("--data", bench_data, "Dataset (default: synthetic sets)");
  benchc->add_option("--candidates", bench_n, "Candidates per synthetic set")->capture_default_str();
  benchc->add_option("--warmup", bench_warmup)->capture_default_str();
  benchc->add_option("--iters", bench_iters)->capture_default_str();
  benchc->add_option("--threads", bench_streams, "Independent streams for the aggregate QPS figure")
      ->capture_default_str();
  bench_model.add(*benchc);
  add_common(benchc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    report_error(err, "usage", e.what());
    return kUsageError;
  }

  try {
    if (!seed_given) seed = default_seed();
    train_flags.cfg.seed = seed;
    ab_flags.cfg.seed = seed;
    if (gen->parsed()) {
      syn.mode = data::parse_synthetic_mode(syn_mode);
      syn.seed = seed;
      return cmd_gen_synth(syn, gen_out, gen_file_format, out);
    }
    if (mine->parsed()) return cmd_mine(mine_queries, mine_pool, mine_target, mine_k, seed, mine_out, out, err);
    if (train->parsed()) {
      return cmd_train(train_model, train_flags, train_path, val_path, train_out, log_path, format, out, err);
    }
    if (rerank->parsed()) return cmd_rerank(rr_model, rr_data, format, out);
    if (evalc->parsed()) {
      if (ev_model.empty() && ev_baseline.empty()) throw ConfigError("eval needs --model or --baseline");
      return cmd_eval(ev_model, ev_baseline, ev_data, ev_k, ev_threads, format, out);
    }
    if (ablate->parsed()) {
      return cmd_ablate(ab_model, ab_flags, ab_train, ab_val, ab_data, ab_from, ab_save, ab_k, ab_cosine, format,
                        out, err);
    }
    if (benchc->parsed()) {
      return cmd_bench(bench_model, bench_ckpt, bench_data, bench_n, bench_warmup, bench_iters, bench_streams, seed,
                       format, out, err);
    }
  } catch (const ConfigError& e) {
    report_error(err, "config", e.what());
    return kUsageError;
  } catch (const NumericalError& e) {
    report_error(err, "numerical", e.what());
    return kNumericalError;
  } catch (const Error& e) {
    report_error(err, "data", e.what());
    return kDataError;
  } catch (const std::ios_base::failure& e) {
    report_error(err, "data", e.what());
    return kDataError;
  }
  return kUsageError;
}

}  // namespace dualview::cli
