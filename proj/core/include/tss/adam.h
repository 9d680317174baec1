// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "tss/tensor.h"

namespace tss {

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::map<std::string, Tensor> m;  // keyed by Variable name
  std::map<std::string, Tensor> v;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

// Bias-corrected Adam update of every trainable variable, then zeroes all
// gradients. A non-finite gradient aborts before any parameter changes.
void adam_step(std::span<Variable* const> params, AdamState& state, double lr);

}  // namespace tss
