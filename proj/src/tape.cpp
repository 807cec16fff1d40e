/* Copyright 2026 The SGT-PACT Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "sgt/tape.hpp"

#include <algorithm>

namespace sgt {

template <typename Real>
NodeId Tape<Real>::Leaf(BasicTensor<Real> value, bool requires_grad) {
  Node n;
  n.op = "leaf";
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

template <typename Real>
NodeId Tape<Real>::Record(std::string_view op, BasicTensor<Real> value,
                          std::vector<NodeId> inputs,
                          BackwardFn<Real> backward) {
  Node n;
  n.op = std::string(op);
  n.value = std::move(value);
  for (NodeId in : inputs) {
    if (in >= nodes_.size()) {
      throw ContractError("tape: input node " + std::to_string(in) +
                          " does not exist yet");
    }
    n.requires_grad = n.requires_grad || nodes_[in].requires_grad;
  }
  n.inputs = std::move(inputs);
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

template <typename Real>
const BasicTensor<Real>& Gradients<Real>::at(NodeId id) const {
  auto it = grads_.find(id);
  if (it == grads_.end()) {
    throw ContractError("no gradient recorded for node " + std::to_string(id));
  }
  return it->second;
}

template <typename Real>
Gradients<Real> Backward(const Tape<Real>& tape, NodeId loss,
                         std::span<const NodeId> wrt) {
  if (loss >= tape.size()) throw ContractError("backward: unknown loss node");
  if (tape.value(loss).size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " +
                        ShapeToString(tape.value(loss).shape()));
  }

  const std::size_t n = loss + 1;
  // needed[i]: node i requires a gradient and leads to a requested leaf.
  std::vector<char> needed(n, 0);
  std::vector<char> requested(n, wrt.empty() ? 1 : 0);
  for (NodeId id : wrt) {
    if (id < n) requested[id] = 1;
  }
  for (NodeId i = 0; i < n; ++i) {
    if (!tape.requires_grad(i)) continue;
    if (tape.is_leaf(i)) {
      needed[i] = requested[i];
    } else {
      for (NodeId in : tape.inputs(i)) {
        if (needed[in]) {
          needed[i] = 1;
          break;
        }
      }
    }
  }

  Gradients<Real> out;
  if (!needed[loss]) return out;

  std::vector<BasicTensor<Real>> grads(n);
  grads[loss] = BasicTensor<Real>(tape.value(loss).shape(), Real{1});

  std::vector<BasicTensor<Real>*> grad_ptrs;
  for (NodeId i = n; i-- > 0;) {
    if (!needed[i] || grads[i].empty()) continue;
    if (tape.is_leaf(i)) {
      out.Set(i, std::move(grads[i]));
      continue;
    }
    auto ins = tape.inputs(i);
    grad_ptrs.assign(ins.size(), nullptr);
    for (std::size_t k = 0; k < ins.size(); ++k) {
      NodeId in = ins[k];
      if (!needed[in]) continue;
      if (grads[in].empty()) {
        grads[in] = BasicTensor<Real>(tape.value(in).shape(), Real{0});
      }
      grad_ptrs[k] = &grads[in];
    }
    BackwardArgs<Real> args{tape, ins, tape.value(i), grads[i], grad_ptrs};
    tape.backward_fn(i)(args);
    grads[i] = BasicTensor<Real>();
  }
  return out;
}

template class Tape<float>;
template class Tape<double>;
template class Gradients<float>;
template class Gradients<double>;
template Gradients<float> Backward(const Tape<float>&, NodeId,
                                   std::span<const NodeId>);
template Gradients<double> Backward(const Tape<double>&, NodeId,
                                    std::span<const NodeId>);

}  // namespace sgt
