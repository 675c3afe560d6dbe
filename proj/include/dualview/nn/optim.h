#pragma once

#include "dualview/nn/matrix.h"
#include "dualview/nn/parameter.h"

#include <cstddef>
#include <vector>

namespace dualview::nn {

struct AdamWOptions {
  double lr = 2e-5;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with decoupled weight decay:
//   theta <- theta - lr * wd * theta
//   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
// with bias-corrected moments m_hat = m / (1 - beta1^t), v_hat = v / (1 - beta2^t).
template <typename T>
class AdamW {
 public:
  AdamW(const ParameterRegistry<T>& params, AdamWOptions options);

  // Applies one update using the gradients currently stored on `params`.
  // `lr` overrides options().lr for this step (scheduled learning rate).
  void step(ParameterRegistry<T>& params, double lr);
  void step(ParameterRegistry<T>& params) { step(params, options_.lr); }

  std::size_t steps() const { return step_; }
  const AdamWOptions& options() const { return options_; }
  const std::vector<Matrix<T>>& first_moment() const { return m_; }
  const std::vector<Matrix<T>>& second_moment() const { return v_; }

 private:
  AdamWOptions options_;
  std::size_t step_ = 0;
  std::vector<Matrix<T>> m_;
  std::vector<Matrix<T>> v_;
};

// Linear warmup from 0 to base_lr over the first round(warmup_fraction * total)
// steps, then cosine annealing from base_lr to 0 at step == total_steps.
// Throws ConfigError when total_steps == 0 or step > total_steps.
double lr_schedule(std::size_t step, std::size_t total_steps, double base_lr, double warmup_fraction = 0.1);

std::size_t warmup_steps(std::size_t total_steps, double warmup_fraction);

// Rescales every gradient by max_norm / norm when the global L2 norm exceeds
// max_norm. Returns the factor applied (1 when unchanged).
template <typename T>
double clip_gradients(ParameterRegistry<T>& params, double max_norm = 1.0);

}  // namespace dualview::nn
