// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <span>

#include "tss/tape.h"

namespace tss {

// out[t, j] = sum_i x[t, i] * w[i, j] + b[j]. x: T x Din, w: Din x Dout, b: Dout.
Value linear(Tape& tape, Value x, Value w, Value b);

// Per-row normalization over the feature dimension:
// gamma * (x - mean) / sqrt(var + eps) + beta.
Value layer_norm(Tape& tape, Value x, Value gamma, Value beta, double eps = 1e-5);

// Unidirectional LSTM, gate column layout [input, forget, cell, output].
// wx: Din x 4H, wh: H x 4H, b: 4H. Returns the hidden state of every frame.
struct LstmWeights {
  Value wx;
  Value wh;
  Value b;
};
Value lstm(Tape& tape, Value x, const LstmWeights& weights, const Tensor& h0, const Tensor& c0);
// Zero initial state.
Value lstm(Tape& tape, Value x, const LstmWeights& weights);

Value relu(Tape& tape, Value x);
Value sigmoid(Tape& tape, Value x);
Value add(Tape& tape, Value a, Value b);
Value mul(Tape& tape, Value a, Value b);
// Concatenates along the feature (column) dimension; row counts must agree.
Value concat_cols(Tape& tape, Value a, Value b);
// Sum of all elements, as a scalar.
Value sum(Tape& tape, Value x);
// Mean of scalar nodes.
Value mean_of(Tape& tape, std::span<const Value> scalars);

}  // namespace tss
