#pragma once

#include "dualview/nn/matrix.h"

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace dualview::nn {

template <typename T>
class Parameter {
 public:
  Parameter(std::string name, Matrix<T> value)
      : name_(std::move(name)),
        value_(std::move(value)),
        grad_(Matrix<T>::Zero(value_.rows(), value_.cols())) {}

  const std::string& name() const { return name_; }
  Matrix<T>& value() { return value_; }
  const Matrix<T>& value() const { return value_; }
  Matrix<T>& grad() { return grad_; }
  const Matrix<T>& grad() const { return grad_; }
  std::size_t size() const { return static_cast<std::size_t>(value_.size()); }

  void zero_grad() { grad_.setZero(); }

 private:
  std::string name_;
  Matrix<T> value_;
  Matrix<T> grad_;
};

// Owns every trainable parameter of a model in registration order. Parameter
// addresses are stable for the registry's lifetime, so layers keep raw
// pointers into it.
template <typename T>
class ParameterRegistry {
 public:
  ParameterRegistry() = default;
  ParameterRegistry(const ParameterRegistry&) = delete;
  ParameterRegistry& operator=(const ParameterRegistry&) = delete;
  ParameterRegistry(ParameterRegistry&&) noexcept = default;
  ParameterRegistry& operator=(ParameterRegistry&&) noexcept = default;

  // Throws ConfigError on a duplicate name.
  Parameter<T>& add(std::string name, Matrix<T> init);

  std::size_t size() const { return params_.size(); }
  Parameter<T>& operator[](std::size_t i) { return *params_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return *params_[i]; }

  Parameter<T>* find(const std::string& name);
  const Parameter<T>* find(const std::string& name) const;

  // Total number of scalar entries across all parameters.
  std::size_t scalar_count() const;

  void zero_grad();

  // Global L2 norm over every gradient entry.
  double grad_norm() const;

  std::vector<Matrix<T>> snapshot() const;
  // Throws DimensionError when the snapshot does not match the registry.
  void restore(const std::vector<Matrix<T>>& values);

  // Copies values from a registry of another precision with identical layout.
  template <typename U>
  void assign_from(const ParameterRegistry<U>& other);

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
};

void check_registry_layout(std::size_t lhs_size, std::size_t rhs_size);
void check_parameter_match(const std::string& lhs_name, const std::string& rhs_name,
                           long lhs_rows, long lhs_cols, long rhs_rows, long rhs_cols);

template <typename T>
template <typename U>
void ParameterRegistry<T>::assign_from(const ParameterRegistry<U>& other) {
  check_registry_layout(size(), other.size());
  for (std::size_t i = 0; i < size(); ++i) {
    const auto& src = other[i];
    auto& dst = *params_[i];
    check_parameter_match(dst.name(), src.name(), dst.value().rows(), dst.value().cols(),
                          src.value().rows(), src.value().cols());
    dst.value() = src.value().template cast<T>();
  }
}

}  // namespace dualview::nn
