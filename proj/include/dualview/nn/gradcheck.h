#pragma once

#include "dualview/nn/parameter.h"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace dualview::nn {

struct ParameterCheck {
  std::string name;
  std::size_t entries = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  // Index of the worst entry and the two derivative estimates there.
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<ParameterCheck> parameters;
  double max_rel_error = 0.0;
  double tolerance = 0.0;

  bool passed() const;
  std::vector<std::string> failures() const;
};

// Relative error with an absolute floor so that derivatives near zero compare
// on absolute scale: |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-6);

// Compares the gradients currently stored on `params` against central finite
// differences (f(theta + h) - f(theta - h)) / 2h of `loss_fn`, one entry at a
// time. `loss_fn` must be deterministic and must not touch the gradients.
// Throws NumericalError when the loss is non-finite at any probe.
GradCheckReport fd_gradient_check(const std::function<double()>& loss_fn, ParameterRegistry<double>& params,
                                  double h = 1e-4, double tol = 1e-3);

// Finite-difference derivative of a scalar function of one variable.
double central_difference(const std::function<double(double)>& f, double x, double h = 1e-4);

}  // namespace dualview::nn
