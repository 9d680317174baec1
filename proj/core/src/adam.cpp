// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tss/adam.h"

#include <cmath>

#include "tss/errors.h"

namespace tss {

void adam_step(std::span<Variable* const> params, AdamState& state, double lr) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    throw PreconditionError("learning rate must be finite and non-negative");
  }
  for (const Variable* p : params) {
    if (!p->trainable) continue;
    if (!p->grad.same_shape(p->value)) {
      throw DimensionError("gradient of " + p->name + " has shape " + p->grad.shape_string() +
                           ", value " + p->value.shape_string());
    }
    if (!p->grad.all_finite()) {
      throw NumericalError("non-finite gradient in variable " + p->name);
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, double(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, double(state.step));
  for (Variable* p : params) {
    if (p->trainable) {
      auto [mit, fresh_m] = state.m.try_emplace(p->name, p->value.zeros_like());
      auto [vit, fresh_v] = state.v.try_emplace(p->name, p->value.zeros_like());
      Tensor& m = mit->second;
      Tensor& v = vit->second;
      if (!m.same_shape(p->value) || !v.same_shape(p->value)) {
        throw DimensionError("Adam moments of " + p->name + " do not match its shape");
      }
      const double* g = p->grad.data();
      double* x = p->value.data();
      for (std::size_t i = 0; i < p->value.size(); ++i) {
        m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
        v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
        x[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + state.eps);
      }
    }
    p->zero_grad();
  }
}

}  // namespace tss
