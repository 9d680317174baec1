// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tss/tape.h"

#include "tss/errors.h"

namespace tss {

Value Tape::constant(Tensor t) {
  nodes_.push_back(Node{std::move(t), {}, nullptr, {}, false});
  return Value{nodes_.size() - 1};
}

Value Tape::parameter(Variable& var) {
  nodes_.push_back(Node{{}, {}, &var, {}, var.trainable});
  return Value{nodes_.size() - 1};
}

Value Tape::record(Tensor out, std::span<const Value> inputs, BackwardFn backward) {
  bool needs = false;
  for (Value in : inputs) needs = needs || nodes_.at(in.id).requires_grad;
  nodes_.push_back(Node{std::move(out), {}, nullptr, needs ? std::move(backward) : BackwardFn{},
                        needs});
  return Value{nodes_.size() - 1};
}

const Tensor& Tape::value(Value v) const {
  const Node& n = nodes_.at(v.id);
  return n.var ? n.var->value : n.value;
}

Tensor& Tape::grad(Value v) {
  Node& n = nodes_.at(v.id);
  return n.var ? n.var->grad : n.grad;
}

void Tape::reverse_pass(Value loss, double seed) {
  if (nodes_.empty()) throw PreconditionError("reverse_pass on an empty tape");
  if (loss.id >= nodes_.size()) throw PreconditionError("loss is not recorded on this tape");
  if (value(loss).size() != 1) {
    throw PreconditionError("reverse_pass needs a scalar loss, got shape " +
                            value(loss).shape_string());
  }
  for (std::size_t i = 0; i <= loss.id; ++i) {
    Node& n = nodes_[i];
    if (n.requires_grad && !n.var) n.grad = n.value.zeros_like();
  }
  if (!nodes_[loss.id].requires_grad) return;
  grad(loss)[0] += seed;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.requires_grad && n.backward) n.backward(*this, n.grad);
  }
  // Intermediate gradients are only needed during the pass.
  for (std::size_t i = 0; i <= loss.id; ++i) {
    if (!nodes_[i].var) nodes_[i].grad = Tensor();
  }
}

}  // namespace tss
