#pragma once

#include <Eigen/Core>

#include <string>

namespace dualview::nn {

// Dense row-major matrix. Rows index the batch / sequence position.
template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
std::string shape_string(const Matrix<T>& m) {
  return "(" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ")";
}

template <typename T>
bool all_finite(const Matrix<T>& m) {
  return m.allFinite();
}

}  // namespace dualview::nn
