// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <functional>
#include <span>
#include <string>

#include "tss/tape.h"

namespace tss {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_variable;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

// Builds a scalar loss on the given tape. Must be deterministic.
using LossBuilder = std::function<Value(Tape&)>;

// Compares taped gradients against central differences
// (f(p + step) - f(p - step)) / (2 step) for every element of every
// variable. Relative error uses max(|analytic|, |numeric|, floor) as the
// denominator. Variable grads are left holding the analytic gradient.
GradCheckResult finite_difference_check(const LossBuilder& build_loss,
                                        std::span<Variable* const> params, double step = 1e-5,
                                        double floor = 1e-8);

}  // namespace tss
