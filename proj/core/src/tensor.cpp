// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tss/tensor.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "tss/errors.h"

namespace tss {
namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
  if (shape.empty() || shape.size() > 2) {
    throw DimensionError("tensor rank must be 1 or 2, got shape " + shape_string(shape));
  }
  for (auto d : shape) {
    if (d == 0) throw DimensionError("tensor dimensions must be positive: " + shape_string(shape));
  }
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), values_(element_count(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(values.begin(), values.end()) {
  if (element_count(shape_) != values_.size()) {
    throw DimensionError("shape " + tss::shape_string(shape_) + " does not match " +
                         std::to_string(values_.size()) + " values");
  }
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n_rows = rows.size();
  const std::size_t n_cols = n_rows ? rows.begin()->size() : 0;
  std::vector<double> values;
  values.reserve(n_rows * n_cols);
  for (const auto& r : rows) {
    if (r.size() != n_cols) throw DimensionError("ragged matrix literal");
    values.insert(values.end(), r.begin(), r.end());
  }
  return Tensor({n_rows, n_cols}, std::move(values));
}

std::string Tensor::shape_string() const { return tss::shape_string(shape_); }

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

Variable::Variable(std::string name_, Tensor value_, bool trainable_)
    : name(std::move(name_)), value(std::move(value_)), grad(value.zeros_like()),
      trainable(trainable_) {}

}  // namespace tss
