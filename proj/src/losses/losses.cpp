#include "dualview/losses/losses.h"

#include "dualview/errors.h"
#include "dualview/nn/ops.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace dualview::losses {
namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels, const char* what) {
  if (scores.empty()) throw InputError(std::string(what) + ": empty score list");
  if (scores.size() != labels.size()) {
    throw DimensionError(std::string(what) + ": " + std::to_string(scores.size()) + " scores vs " +
                         std::to_string(labels.size()) + " labels");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw InputError(std::string(what) + ": label " + std::to_string(y) + " is not 0 or 1");
  }
}

struct Split {
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
};

Split split_labels(std::span<const int> labels) {
  Split s;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? s.pos : s.neg).push_back(i);
  return s;
}

LossResult degenerate(std::size_t n) { return {0.0, std::vector<double>(n, 0.0), true}; }

}  // namespace

void LossConfig::validate() const {
  for (double w : {weight_bce, weight_margin, weight_infonce, weight_triplet}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("loss weights must be finite and nonnegative");
  }
  if (weight_bce + weight_margin + weight_infonce + weight_triplet <= 0.0) {
    throw ConfigError("at least one loss weight must be positive");
  }
  if (!(margin_pairwise >= 0.0) || !(margin_triplet >= 0.0)) throw ConfigError("margins must be nonnegative");
  if (!(infonce_temperature > 0.0) || !std::isfinite(infonce_temperature)) {
    throw ConfigError("infonce temperature must be positive");
  }
}

LossResult bce_loss(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels, "bce_loss");
  const double n = static_cast<double>(scores.size());
  LossResult r;
  r.gradient.resize(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = scores[i];
    const double y = labels[i];
    r.value += std::max(s, 0.0) - s * y + std::log1p(std::exp(-std::abs(s)));
    const double sig = s >= 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
    r.gradient[i] = (sig - y) / n;
  }
  r.value /= n;
  return r;
}

LossResult margin_loss(std::span<const double> scores, std::span<const int> labels, double margin) {
  check_inputs(scores, labels, "margin_loss");
  const Split s = split_labels(labels);
  if (s.pos.empty() || s.neg.empty()) return degenerate(scores.size());
  const double pairs = static_cast<double>(s.pos.size() * s.neg.size());
  LossResult r;
  r.gradient.assign(scores.size(), 0.0);
  for (std::size_t p : s.pos) {
    for (std::size_t q : s.neg) {
      const double h = margin - (scores[p] - scores[q]);
      if (h > 0.0) {
        r.value += h;
        r.gradient[p] -= 1.0 / pairs;
        r.gradient[q] += 1.0 / pairs;
      }
    }
  }
  r.value /= pairs;
  return r;
}

LossResult infonce_loss(std::span<const double> scores, std::span<const int> labels, double temperature) {
  check_inputs(scores, labels, "infonce_loss");
  const Split s = split_labels(labels);
  if (s.pos.empty()) return degenerate(scores.size());
  const std::size_t n = scores.size();
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = scores[i] / temperature;
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - zmax);
  const double lse = zmax + std::log(sum);
  const double npos = static_cast<double>(s.pos.size());
  LossResult r;
  r.gradient.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.gradient[i] = std::exp(z[i] - lse) / temperature;
  for (std::size_t p : s.pos) {
    r.value += lse - z[p];
    r.gradient[p] -= 1.0 / (npos * temperature);
  }
  r.value /= npos;
  return r;
}

LossResult triplet_loss(std::span<const double> scores, std::span<const int> labels, double margin) {
  check_inputs(scores, labels, "triplet_loss");
  const Split s = split_labels(labels);
  if (s.pos.empty() || s.neg.empty()) return degenerate(scores.size());
  std::size_t hardest = s.neg.front();
  for (std::size_t q : s.neg) {
    if (scores[q] > scores[hardest]) hardest = q;
  }
  const double npos = static_cast<double>(s.pos.size());
  LossResult r;
  r.gradient.assign(scores.size(), 0.0);
  for (std::size_t p : s.pos) {
    const double h = margin - (scores[p] - scores[hardest]);
    if (h > 0.0) {
      r.value += h;
      r.gradient[p] -= 1.0 / npos;
      r.gradient[hardest] += 1.0 / npos;
    }
  }
  r.value /= npos;
  return r;
}

CombinedLoss combined_loss(std::span<const double> scores, std::span<const int> labels, const LossConfig& cfg) {
  check_inputs(scores, labels, "combined_loss");
  CombinedLoss out;
  out.gradient.assign(scores.size(), 0.0);
  auto accumulate = [&](double weight, const LossResult& r, double& slot) {
    slot = r.value;
    out.breakdown.degenerate = out.breakdown.degenerate || r.degenerate;
    out.breakdown.total += weight * r.value;
    for (std::size_t i = 0; i < scores.size(); ++i) out.gradient[i] += weight * r.gradient[i];
  };
  if (cfg.weight_bce > 0.0) accumulate(cfg.weight_bce, bce_loss(scores, labels), out.breakdown.bce);
  if (cfg.weight_margin > 0.0) {
    accumulate(cfg.weight_margin, margin_loss(scores, labels, cfg.margin_pairwise), out.breakdown.margin);
  }
  if (cfg.weight_infonce > 0.0) {
    accumulate(cfg.weight_infonce, infonce_loss(scores, labels, cfg.infonce_temperature), out.breakdown.infonce);
  }
  if (cfg.weight_triplet > 0.0) {
    accumulate(cfg.weight_triplet, triplet_loss(scores, labels, cfg.margin_triplet), out.breakdown.triplet);
  }
  return out;
}

template <typename T>
nn::Var<T> combined_loss(nn::Var<T> scores, std::span<const int> labels, const LossConfig& cfg,
                         LossBreakdown* breakdown) {
  const nn::Matrix<T>& s = scores.value();
  if (s.cols() != 1) throw DimensionError("combined_loss: scores must be a column, got " + nn::shape_string(s));
  std::vector<double> values(static_cast<std::size_t>(s.rows()));
  for (Eigen::Index i = 0; i < s.rows(); ++i) values[static_cast<std::size_t>(i)] = static_cast<double>(s(i, 0));
  const CombinedLoss loss = combined_loss(std::span<const double>(values), labels, cfg);
  if (breakdown != nullptr) *breakdown = loss.breakdown;
  nn::Matrix<T> grad(s.rows(), 1);
  for (Eigen::Index i = 0; i < s.rows(); ++i) grad(i, 0) = static_cast<T>(loss.gradient[static_cast<std::size_t>(i)]);
  return nn::ops::scalar_function(scores, static_cast<T>(loss.breakdown.total), std::move(grad));
}

template nn::Var<float> combined_loss(nn::Var<float>, std::span<const int>, const LossConfig&, LossBreakdown*);
template nn::Var<double> combined_loss(nn::Var<double>, std::span<const int>, const LossConfig&, LossBreakdown*);

}  // namespace dualview::losses
