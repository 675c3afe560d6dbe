#pragma once

#include "dualview/data/candidate_set.h"
#include "dualview/eval/evaluate.h"
#include "dualview/losses/losses.h"
#include "dualview/model/scorer.h"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dualview::training {

struct TrainConfig {
  double base_lr = 2e-5;
  double weight_decay = 0.01;
  double warmup_fraction = 0.10;
  double max_grad_norm = 1.0;
  std::size_t batch_size = 8;
  std::size_t accumulation_steps = 1;
  std::size_t epochs = 3;
  std::uint64_t seed = 42;
  losses::LossConfig loss;
  // Extra weight on the combined loss of each intermediate score view (the
  // local and global columns of the dual-view model). 0 trains on the final
  // scores only.
  double view_loss_weight = 0.0;
  std::size_t eval_every = 0;  // optimizer steps; 0 evaluates only after the last step
  std::string selection_metric = "full_hit_at_k";
  std::size_t eval_k = 4;

  // Throws ConfigError.
  void validate() const;
  // Optimizer steps for a training set of the given size.
  std::size_t total_steps(std::size_t n_train) const;
};

// Reads one metric by its report field name. Throws ConfigError.
double metric_value(const eval::MetricsReport& report, const std::string& name);

struct TrainResult {
  std::size_t steps = 0;
  std::optional<std::size_t> best_step;  // step after which the best validation score was seen
  double best_metric = 0.0;
  std::vector<eval::MetricsReport> validations;
  std::vector<std::string> log;  // one JSON object per line
  bool aborted = false;
  std::string diagnostic;
};

// Adds d(sum of per-query losses * weight)/d(params) into the parameter
// gradients and returns the weighted loss sum. A query's loss is the combined
// loss of the final scores plus `view_weight` times that of each score view.
// `breakdown` accumulates the weighted final-score terms; `view_total` the
// weighted view losses.
double accumulate_gradients(model::Scorer<float>& model, std::span<const data::CandidateSet* const> queries,
                            const losses::LossConfig& loss, double weight, losses::LossBreakdown* breakdown = nullptr,
                            double view_weight = 0.0, double* view_total = nullptr);

// Runs AdamW over shuffled per-query micro-batches. After the call the model
// holds the parameters with the best validation score (strictly greater wins,
// earliest kept on ties), or the final parameters when `val` is empty. A
// non-finite loss or gradient stops training: the model is restored to the best
// parameters seen so far (or those before the failing step) and the result
// carries a diagnostic. Log lines are mirrored to `log_stream` when given.
TrainResult train(model::Scorer<float>& model, const data::Dataset& train_data, const data::Dataset& val,
                  const TrainConfig& cfg, std::ostream* log_stream = nullptr);

}  // namespace dualview::training
