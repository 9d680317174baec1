// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "tss/tensor.h"

namespace tss {

// Handle to a node recorded on a Tape.
struct Value {
  std::size_t id = 0;
};

class Tape;

// Local backward rule of one node. It reads the node's output gradient and
// accumulates into the gradients of its inputs through Tape::grad().
using BackwardFn = std::function<void(Tape&, const Tensor& out_grad)>;

// Define-by-run record of a computation. One tape per forward pass; one
// tape per thread.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  // Leaf holding a detached tensor (never receives gradient).
  Value constant(Tensor t);
  // Leaf bound to a parameter. Gradient lands directly in var.grad when the
  // variable is trainable. The variable must outlive the tape.
  Value parameter(Variable& var);

  // Records an op output. `inputs` decide whether the node needs a gradient.
  Value record(Tensor out, std::span<const Value> inputs, BackwardFn backward);
  Value record(Tensor out, std::initializer_list<Value> inputs, BackwardFn backward) {
    return record(std::move(out), std::span<const Value>(inputs.begin(), inputs.size()),
                  std::move(backward));
  }

  const Tensor& value(Value v) const;
  // Gradient buffer of a node; only valid during reverse_pass for nodes that
  // require a gradient.
  Tensor& grad(Value v);
  bool requires_grad(Value v) const { return nodes_[v.id].requires_grad; }

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  // Back-propagates d(loss)/d(node) scaled by `seed` and accumulates into
  // the grad of every trainable Variable reachable from `loss`.
  void reverse_pass(Value loss, double seed = 1.0);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    Variable* var = nullptr;
    BackwardFn backward;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

}  // namespace tss
