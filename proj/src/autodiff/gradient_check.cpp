#include "intent/autodiff/gradient_check.hpp"

#include <algorithm>
#include <cmath>

namespace intent::ad {

GradientCheckReport gradient_check(const LossClosure& closure, ParamSet& params, double tolerance,
                                   const GradientCheckOptions& opts) {
  params.zero_grad();
  {
    Tape tape;
    tape.backward(closure(tape, params));
  }
  std::vector<Eigen::VectorXd> analytic;
  for (auto& [_, p] : params) analytic.push_back(p.grad);
  params.clear_grad();

  const auto eval = [&] {
    Tape tape;
    return closure(tape, params).item();
  };

  GradientCheckReport report;
  report.tolerance = tolerance;
  std::size_t k = 0;
  for (auto& [name, p] : params) {
    GradientCheckEntry entry{name};
    auto& values = p.value.values;
    for (Index i = 0; i < values.size(); ++i) {
      const double saved = values(i);
      values(i) = saved + opts.step;
      const double up = eval();
      values(i) = saved - opts.step;
      const double down = eval();
      values(i) = saved;
      const double numeric = (up - down) / (2 * opts.step);
      const double a = analytic[k](i);
      const double abs_err = std::abs(a - numeric);
      const double rel = abs_err / std::max({std::abs(a), std::abs(numeric), opts.floor});
      entry.max_abs_error = std::max(entry.max_abs_error, abs_err);
      entry.max_relative_error = std::max(entry.max_relative_error, rel);
    }
    report.max_relative_error = std::max(report.max_relative_error, entry.max_relative_error);
    report.entries.push_back(std::move(entry));
    ++k;
  }
  report.passed = report.max_relative_error < tolerance;
  return report;
}

}  // namespace intent::ad
