#pragma once

#include <functional>
#include <string>
#include <vector>

#include "intent/autodiff/tape.hpp"

namespace intent::ad {

/// Builds a scalar loss on the given tape from the parameters in the set.
/// Must be deterministic.
using LossClosure = std::function<Var(Tape&, ParamSet&)>;

struct GradientCheckEntry {
  std::string name;
  double max_relative_error = 0;
  double max_abs_error = 0;
};

struct GradientCheckReport {
  std::vector<GradientCheckEntry> entries;
  double max_relative_error = 0;
  double tolerance = 0;
  bool passed = false;
};

struct GradientCheckOptions {
  double step = 1e-5;
  /// Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor),
  /// so gradients near zero are compared absolutely.
  double floor = 1e-4;
};

/// Compares tape gradients with central finite differences for every element
/// of every parameter. Parameter values are restored afterwards.
GradientCheckReport gradient_check(const LossClosure& closure, ParamSet& params, double tolerance,
                                   const GradientCheckOptions& opts = {});

}  // namespace intent::ad
