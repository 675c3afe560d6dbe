#include "dualview/nn/parameter.h"

#include "dualview/errors.h"

#include <cmath>

namespace dualview::nn {

template <typename T>
Parameter<T>& ParameterRegistry<T>::add(std::string name, Matrix<T> init) {
  if (find(name) != nullptr) {
    throw ConfigError("duplicate parameter name '" + name + "'");
  }
  params_.push_back(std::make_unique<Parameter<T>>(std::move(name), std::move(init)));
  return *params_.back();
}

template <typename T>
Parameter<T>* ParameterRegistry<T>::find(const std::string& name) {
  for (auto& p : params_) {
    if (p->name() == name) return p.get();
  }
  return nullptr;
}

template <typename T>
const Parameter<T>* ParameterRegistry<T>::find(const std::string& name) const {
  for (const auto& p : params_) {
    if (p->name() == name) return p.get();
  }
  return nullptr;
}

template <typename T>
std::size_t ParameterRegistry<T>::scalar_count() const {
  std::size_t total = 0;
  for (const auto& p : params_) total += p->size();
  return total;
}

template <typename T>
void ParameterRegistry<T>::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

template <typename T>
double ParameterRegistry<T>::grad_norm() const {
  double sum = 0.0;
  for (const auto& p : params_) {
    sum += p->grad().template cast<double>().squaredNorm();
  }
  return std::sqrt(sum);
}

template <typename T>
std::vector<Matrix<T>> ParameterRegistry<T>::snapshot() const {
  std::vector<Matrix<T>> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p->value());
  return out;
}

template <typename T>
void ParameterRegistry<T>::restore(const std::vector<Matrix<T>>& values) {
  check_registry_layout(params_.size(), values.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = *params_[i];
    if (p.value().rows() != values[i].rows() || p.value().cols() != values[i].cols()) {
      throw DimensionError("snapshot shape " + shape_string(values[i]) + " does not match parameter '" +
                           p.name() + "' " + shape_string(p.value()));
    }
    p.value() = values[i];
  }
}

void check_registry_layout(std::size_t lhs_size, std::size_t rhs_size) {
  if (lhs_size != rhs_size) {
    throw DimensionError("parameter count mismatch: " + std::to_string(lhs_size) + " vs " +
                         std::to_string(rhs_size));
  }
}

void check_parameter_match(const std::string& lhs_name, const std::string& rhs_name, long lhs_rows,
                           long lhs_cols, long rhs_rows, long rhs_cols) {
  if (lhs_name != rhs_name || lhs_rows != rhs_rows || lhs_cols != rhs_cols) {
    throw DimensionError("parameter mismatch: '" + lhs_name + "' (" + std::to_string(lhs_rows) + "x" +
                         std::to_string(lhs_cols) + ") vs '" + rhs_name + "' (" +
                         std::to_string(rhs_rows) + "x" + std::to_string(rhs_cols) + ")");
  }
}

template class ParameterRegistry<float>;
template class ParameterRegistry<double>;

}  // namespace dualview::nn
