#include "dualview/training/trainer.h"

#include "dualview/errors.h"
#include "dualview/nn/ops.h"
#include "dualview/nn/optim.h"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

namespace dualview::training {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (accumulation_steps < 1) throw ConfigError("accumulation_steps must be at least 1");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) throw ConfigError("warmup_fraction must lie in [0, 1)");
  if (!(base_lr >= 0.0) || !std::isfinite(base_lr)) throw ConfigError("base_lr must be finite and nonnegative");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be nonnegative");
  if (!(max_grad_norm > 0.0)) throw ConfigError("max_grad_norm must be positive");
  if (eval_k < 1) throw ConfigError("eval_k must be at least 1");
  if (!(view_loss_weight >= 0.0) || !std::isfinite(view_loss_weight)) {
    throw ConfigError("view_loss_weight must be finite and nonnegative");
  }
  loss.validate();
  metric_value(eval::MetricsReport{}, selection_metric);
}

std::size_t TrainConfig::total_steps(std::size_t n_train) const {
  const std::size_t per_step = batch_size * accumulation_steps;
  return epochs * ((n_train + per_step - 1) / per_step);
}

double metric_value(const eval::MetricsReport& report, const std::string& name) {
  if (name == "recall_at_k") return report.recall_at_k;
  if (name == "full_hit_at_k") return report.full_hit_at_k;
  if (name == "ndcg_at_k") return report.ndcg_at_k;
  if (name == "mrr_at_k") return report.mrr_at_k;
  if (name == "precision_at_k") return report.precision_at_k;
  throw ConfigError("unknown selection metric '" + name + "'");
}

double accumulate_gradients(model::Scorer<float>& model, std::span<const data::CandidateSet* const> queries,
                            const losses::LossConfig& loss, double weight, losses::LossBreakdown* breakdown,
                            double view_weight, double* view_total) {
  double total = 0.0;
  for (const data::CandidateSet* set : queries) {
    nn::Tape<float> tape;
    const std::vector<int> labels = set->labels();
    const std::span<const int> label_span(labels);
    nn::Var<float> objective{};
    losses::LossBreakdown terms;
    double views = 0.0;
    if (view_weight > 0.0) {
      const model::ScoreViews<float> out = model.score_views(tape, *set);
      objective = losses::combined_loss(out.final_scores, label_span, loss, &terms);
      for (const nn::Var<float>& v : out.views) {
        losses::LossBreakdown view_terms;
        const nn::Var<float> l = losses::combined_loss(v, label_span, loss, &view_terms);
        objective = nn::ops::add(objective, nn::ops::scale(l, static_cast<float>(view_weight)));
        views += view_weight * view_terms.total;
      }
    } else {
      objective = losses::combined_loss(model.score(tape, *set), label_span, loss, &terms);
    }
    if (!std::isfinite(terms.total) || !std::isfinite(views)) {
      throw NumericalError("non-finite loss on query '" + set->query_id + "' (bce " + std::to_string(terms.bce) +
                           ", margin " + std::to_string(terms.margin) + ", infonce " + std::to_string(terms.infonce) +
                           ", triplet " + std::to_string(terms.triplet) + ", views " + std::to_string(views) + ")");
    }
    tape.backward(nn::ops::scale(objective, static_cast<float>(weight)));
    total += weight * (terms.total + views);
    if (view_total != nullptr) *view_total += weight * views;
    if (breakdown != nullptr) {
      breakdown->bce += weight * terms.bce;
      breakdown->margin += weight * terms.margin;
      breakdown->infonce += weight * terms.infonce;
      breakdown->triplet += weight * terms.triplet;
      breakdown->total += weight * terms.total;
      breakdown->degenerate = breakdown->degenerate || terms.degenerate;
    }
  }
  return total;
}

TrainResult train(model::Scorer<float>& model, const data::Dataset& train_data, const data::Dataset& val,
                  const TrainConfig& cfg, std::ostream* log_stream) {
  cfg.validate();
  if (train_data.empty()) throw InputError("training dataset is empty");
  for (const auto& set : train_data) {
    if (set.gold_count() == 0) throw InputError("training query '" + set.query_id + "' has no gold document");
  }

  auto& params = model.parameters();
  nn::AdamW<float> optimizer(params, {cfg.base_lr, cfg.weight_decay, 0.9, 0.999, 1e-8});
  const std::size_t total = cfg.total_steps(train_data.size());
  const std::size_t per_step = cfg.batch_size * cfg.accumulation_steps;
  std::mt19937_64 rng(cfg.seed);

  TrainResult result;
  std::vector<nn::Matrix<float>> best_params;
  auto emit = [&](const nlohmann::ordered_json& j) {
    result.log.push_back(j.dump());
    if (log_stream != nullptr) *log_stream << result.log.back() << "\n" << std::flush;
  };
  auto validate_now = [&](std::size_t step) {
    if (val.empty()) return;
    eval::EvalOptions opts;
    opts.k = cfg.eval_k;
    opts.label = "step " + std::to_string(step);
    eval::MetricsReport report = eval::evaluate(model, val, opts);
    const double score = metric_value(report, cfg.selection_metric);
    const bool improved = !result.best_step || score > result.best_metric;
    if (improved) {
      result.best_metric = score;
      result.best_step = step;
      best_params = params.snapshot();
    }
    nlohmann::ordered_json j;
    j["event"] = "validation";
    j["step"] = step;
    j["recall_at_k"] = report.recall_at_k;
    j["full_hit_at_k"] = report.full_hit_at_k;
    j["ndcg_at_k"] = report.ndcg_at_k;
    j["mrr_at_k"] = report.mrr_at_k;
    j["precision_at_k"] = report.precision_at_k;
    j["selected"] = improved;
    emit(j);
    result.validations.push_back(std::move(report));
  };

  std::vector<std::size_t> order(train_data.size());
  std::size_t step = 0;
  std::vector<nn::Matrix<float>> before_step;
  for (std::size_t epoch = 0; epoch < cfg.epochs && !result.aborted; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += per_step) {
      const std::size_t end = std::min(order.size(), start + per_step);
      const double weight = 1.0 / static_cast<double>(end - start);
      if (best_params.empty()) before_step = params.snapshot();
      params.zero_grad();
      losses::LossBreakdown terms;
      double view_loss = 0.0;
      try {
        for (std::size_t micro = start; micro < end; micro += cfg.batch_size) {
          std::vector<const data::CandidateSet*> batch;
          for (std::size_t i = micro; i < std::min(end, micro + cfg.batch_size); ++i) {
            batch.push_back(&train_data[order[i]]);
          }
          accumulate_gradients(model, batch, cfg.loss, weight, &terms, cfg.view_loss_weight, &view_loss);
        }
        const double norm = params.grad_norm();
        if (!std::isfinite(norm)) throw NumericalError("non-finite gradient norm at step " + std::to_string(step));
        const double lr = nn::lr_schedule(step, total, cfg.base_lr, cfg.warmup_fraction);
        const double clip = nn::clip_gradients(params, cfg.max_grad_norm);
        optimizer.step(params, lr);
        nlohmann::ordered_json j;
        j["event"] = "step";
        j["step"] = step;
        j["epoch"] = epoch;
        j["lr"] = lr;
        j["loss"] = terms.total;
        j["bce"] = terms.bce;
        j["margin"] = terms.margin;
        j["infonce"] = terms.infonce;
        j["triplet"] = terms.triplet;
        if (cfg.view_loss_weight > 0.0) j["view_loss"] = view_loss;
        j["grad_norm"] = norm;
        j["clip_scale"] = clip;
        if (terms.degenerate) j["degenerate"] = true;
        emit(j);
      } catch (const NumericalError& e) {
        result.aborted = true;
        result.diagnostic = "step " + std::to_string(step) + ": " + e.what();
        params.restore(best_params.empty() ? before_step : best_params);
        params.zero_grad();
        nlohmann::ordered_json j;
        j["event"] = "abort";
        j["step"] = step;
        j["diagnostic"] = result.diagnostic;
        emit(j);
        break;
      }
      ++step;
      if (cfg.eval_every > 0 && step % cfg.eval_every == 0 && step != total) validate_now(step);
    }
  }
  result.steps = step;
  if (result.aborted) return result;
  validate_now(step);
  if (!best_params.empty()) params.restore(best_params);
  params.zero_grad();
  return result;
}

}  // namespace dualview::training
