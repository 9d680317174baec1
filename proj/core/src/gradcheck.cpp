// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tss/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "tss/errors.h"

namespace tss {
namespace {

double evaluate(const LossBuilder& build_loss) {
  Tape tape;
  Value loss = build_loss(tape);
  if (tape.value(loss).size() != 1) throw PreconditionError("gradient check needs a scalar loss");
  return tape.value(loss)[0];
}

}  // namespace

GradCheckResult finite_difference_check(const LossBuilder& build_loss,
                                        std::span<Variable* const> params, double step,
                                        double floor) {
  if (!(step > 0.0)) throw PreconditionError("finite_difference_check: step must be positive");
  if (!(floor > 0.0)) throw PreconditionError("finite_difference_check: floor must be positive");
  for (Variable* v : params) v->zero_grad();
  double base = 0.0;
  {
    Tape tape;
    Value loss = build_loss(tape);
    base = tape.value(loss)[0];
    tape.reverse_pass(loss);
  }
  if (evaluate(build_loss) != base) {
    throw PreconditionError("finite_difference_check: loss is not deterministic");
  }
  GradCheckResult result;
  for (Variable* v : params) {
    for (std::size_t i = 0; i < v->value.size(); ++i) {
      const double saved = v->value[i];
      v->value[i] = saved + step;
      const double up = evaluate(build_loss);
      v->value[i] = saved - step;
      const double down = evaluate(build_loss);
      v->value[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = v->grad[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
      const double rel = std::abs(analytic - numeric) / denom;
      ++result.checked;
      if (result.worst_variable.empty() || rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_variable = v->name;
        result.worst_index = i;
        result.analytic = analytic;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace tss
