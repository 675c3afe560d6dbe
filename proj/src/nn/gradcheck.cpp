#include "dualview/nn/gradcheck.h"

#include "dualview/errors.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dualview::nn {

bool GradCheckReport::passed() const {
  return std::all_of(parameters.begin(), parameters.end(), [](const ParameterCheck& c) { return c.passed; });
}

std::vector<std::string> GradCheckReport::failures() const {
  std::vector<std::string> out;
  for (const auto& c : parameters) {
    if (c.passed) continue;
    std::ostringstream os;
    os << c.name << "[" << c.worst_index << "]: analytic=" << c.analytic << " numeric=" << c.numeric
       << " rel=" << c.max_rel_error;
    out.push_back(os.str());
  }
  return out;
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport fd_gradient_check(const std::function<double()>& loss_fn, ParameterRegistry<double>& params,
                                  double h, double tol) {
  GradCheckReport report;
  report.tolerance = tol;
  auto eval = [&](const std::string& where) {
    const double v = loss_fn();
    if (!std::isfinite(v)) throw NumericalError("gradient check: non-finite loss " + where);
    return v;
  };
  eval("at the base point");

  for (auto& param : params) {
    ParameterCheck check;
    check.name = param->name();
    check.entries = param->size();
    auto& value = param->value();
    const auto& grad = param->grad();
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      const double saved = value.data()[i];
      value.data()[i] = saved + h;
      const double plus = eval("while perturbing " + check.name);
      value.data()[i] = saved - h;
      const double minus = eval("while perturbing " + check.name);
      value.data()[i] = saved;

      const double numeric = (plus - minus) / (2.0 * h);
      const double analytic = grad.data()[i];
      const double rel = relative_error(analytic, numeric);
      check.max_abs_error = std::max(check.max_abs_error, std::abs(analytic - numeric));
      if (i == 0 || rel > check.max_rel_error) {
        check.max_rel_error = rel;
        check.worst_index = static_cast<std::size_t>(i);
        check.analytic = analytic;
        check.numeric = numeric;
      }
    }
    check.passed = check.max_rel_error <= tol;
    report.max_rel_error = std::max(report.max_rel_error, check.max_rel_error);
    report.parameters.push_back(std::move(check));
  }
  return report;
}

double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace dualview::nn
