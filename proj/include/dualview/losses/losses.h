#pragma once

#include "dualview/nn/tape.h"

#include <span>
#include <vector>

// Ranking objectives over one query's raw score column. Each loss is computed
// in double with its closed-form gradient with respect to the scores.
namespace dualview::losses {

struct LossConfig {
  double weight_bce = 1.0;
  double weight_margin = 1.0;
  double weight_infonce = 1.0;
  double weight_triplet = 1.0;
  double margin_pairwise = 1.0;
  double margin_triplet = 0.5;
  double infonce_temperature = 0.1;

  // Throws ConfigError.
  void validate() const;
};

struct LossResult {
  double value = 0.0;
  std::vector<double> gradient;  // d value / d scores
  // No positive (or, for pairwise losses, no negative): value and gradient are 0.
  bool degenerate = false;
};

// Mean binary cross-entropy on logits, in the stable form
// max(s, 0) - s*y + log(1 + exp(-|s|)).
LossResult bce_loss(std::span<const double> scores, std::span<const int> labels);
// Mean over (positive, negative) pairs of max(0, margin - (s_pos - s_neg)).
LossResult margin_loss(std::span<const double> scores, std::span<const int> labels, double margin);
// Mean over positives of -log softmax(scores / temperature)[pos].
LossResult infonce_loss(std::span<const double> scores, std::span<const int> labels, double temperature);
// Mean over positives of max(0, margin - (s_pos - max s_neg)).
LossResult triplet_loss(std::span<const double> scores, std::span<const int> labels, double margin);

struct LossBreakdown {
  double bce = 0.0;
  double margin = 0.0;
  double infonce = 0.0;
  double triplet = 0.0;
  double total = 0.0;
  bool degenerate = false;  // any component hit a degenerate set
};

struct CombinedLoss {
  LossBreakdown breakdown;
  std::vector<double> gradient;
};

// Weighted sum of the four components; zero-weight components are skipped.
CombinedLoss combined_loss(std::span<const double> scores, std::span<const int> labels, const LossConfig& cfg);

// Records the combined loss of an (n x 1) score column on the tape.
template <typename T>
nn::Var<T> combined_loss(nn::Var<T> scores, std::span<const int> labels, const LossConfig& cfg,
                         LossBreakdown* breakdown = nullptr);

}  // namespace dualview::losses
