#include "dualview/nn/optim.h"

#include "dualview/errors.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dualview::nn {

template <typename T>
AdamW<T>::AdamW(const ParameterRegistry<T>& params, AdamWOptions options) : options_(options) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const auto& p : params) {
    m_.push_back(Matrix<T>::Zero(p->value().rows(), p->value().cols()));
    v_.push_back(Matrix<T>::Zero(p->value().rows(), p->value().cols()));
  }
}

template <typename T>
void AdamW<T>::step(ParameterRegistry<T>& params, double lr) {
  if (params.size() != m_.size()) {
    throw DimensionError("optimizer state tracks " + std::to_string(m_.size()) + " parameters, registry has " +
                         std::to_string(params.size()));
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const T b1 = static_cast<T>(options_.beta1);
  const T b2 = static_cast<T>(options_.beta2);
  const T c1 = static_cast<T>(1.0 - std::pow(options_.beta1, t));
  const T c2 = static_cast<T>(1.0 - std::pow(options_.beta2, t));
  const T step_lr = static_cast<T>(lr);
  const T decay = static_cast<T>(1.0 - lr * options_.weight_decay);
  const T eps = static_cast<T>(options_.eps);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& m = m_[i];
    auto& v = v_[i];
    const auto& g = p.grad();
    m = b1 * m + (T(1) - b1) * g;
    v.array() = b2 * v.array() + (T(1) - b2) * g.array().square();
    p.value() *= decay;
    p.value().array() -= step_lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
}

std::size_t warmup_steps(std::size_t total_steps, double warmup_fraction) {
  if (total_steps == 0) return 0;
  const auto w = static_cast<std::size_t>(std::llround(warmup_fraction * static_cast<double>(total_steps)));
  return std::min(w, total_steps - 1);
}

double lr_schedule(std::size_t step, std::size_t total_steps, double base_lr, double warmup_fraction) {
  if (total_steps == 0) throw ConfigError("lr schedule needs total_steps > 0");
  if (step > total_steps) {
    throw ConfigError("lr schedule step " + std::to_string(step) + " beyond total " + std::to_string(total_steps));
  }
  if (warmup_fraction < 0.0 || warmup_fraction >= 1.0) {
    throw ConfigError("warmup fraction must lie in [0, 1)");
  }
  const std::size_t warmup = warmup_steps(total_steps, warmup_fraction);
  if (step < warmup) {
    return base_lr * static_cast<double>(step) / static_cast<double>(warmup);
  }
  const double progress =
      static_cast<double>(step - warmup) / static_cast<double>(total_steps - warmup);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

template <typename T>
double clip_gradients(ParameterRegistry<T>& params, double max_norm) {
  const double norm = params.grad_norm();
  if (!(norm > max_norm)) return 1.0;
  const double factor = max_norm / norm;
  for (auto& p : params) p->grad() *= static_cast<T>(factor);
  return factor;
}

template class AdamW<float>;
template class AdamW<double>;
template double clip_gradients(ParameterRegistry<float>&, double);
template double clip_gradients(ParameterRegistry<double>&, double);

}  // namespace dualview::nn
