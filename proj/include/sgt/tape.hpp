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

#ifndef SGT_TAPE_HPP_
#define SGT_TAPE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sgt/tensor.hpp"

namespace sgt {

using NodeId = std::size_t;

template <typename Real>
class Tape;

// Everything a node's backward rule may look at. grad_inputs[i] is null when
// input i does not need a gradient; otherwise the rule must add (never
// assign) its contribution into it.
template <typename Real>
struct BackwardArgs {
  const Tape<Real>& tape;
  std::span<const NodeId> inputs;
  const BasicTensor<Real>& output;
  const BasicTensor<Real>& grad_output;
  std::span<BasicTensor<Real>* const> grad_inputs;
};

template <typename Real>
using BackwardFn = std::function<void(const BackwardArgs<Real>&)>;

// Append-only record of a forward computation. Nodes are stored in creation
// order, which is a topological order because inputs must already exist.
template <typename Real>
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) noexcept = default;
  Tape& operator=(Tape&&) noexcept = default;

  NodeId Leaf(BasicTensor<Real> value, bool requires_grad);

  NodeId Record(std::string_view op, BasicTensor<Real> value,
                std::vector<NodeId> inputs, BackwardFn<Real> backward);

  const BasicTensor<Real>& value(NodeId id) const { return nodes_.at(id).value; }
  std::span<const NodeId> inputs(NodeId id) const { return nodes_.at(id).inputs; }
  std::string_view op(NodeId id) const { return nodes_.at(id).op; }
  bool requires_grad(NodeId id) const { return nodes_.at(id).requires_grad; }
  bool is_leaf(NodeId id) const { return nodes_.at(id).inputs.empty(); }
  std::size_t size() const { return nodes_.size(); }
  const BackwardFn<Real>& backward_fn(NodeId id) const {
    return nodes_.at(id).backward;
  }

  // Piecewise-linear ops append one code per element naming the linear piece
  // each input falls in. Gradient checks compare these logs between perturbed
  // evaluations to detect coordinates sitting near a kink.
  void set_region_logging(bool on) { log_regions_ = on; }
  bool region_logging() const { return log_regions_; }
  void LogRegions(std::span<const std::uint8_t> codes) {
    region_log_.insert(region_log_.end(), codes.begin(), codes.end());
  }
  const std::vector<std::uint8_t>& region_log() const { return region_log_; }

 private:
  struct Node {
    std::string op;
    BasicTensor<Real> value;
    std::vector<NodeId> inputs;
    BackwardFn<Real> backward;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  bool log_regions_ = false;
  std::vector<std::uint8_t> region_log_;
};

// Handle to a node; cheap to copy. All ops take and return Vars.
template <typename Real>
struct Var {
  Tape<Real>* tape = nullptr;
  NodeId id = 0;

  const BasicTensor<Real>& value() const { return tape->value(id); }
  const Shape& shape() const { return value().shape(); }
};

template <typename Real>
class Gradients {
 public:
  bool contains(NodeId id) const { return grads_.count(id) != 0; }
  const BasicTensor<Real>& at(NodeId id) const;
  const BasicTensor<Real>& at(Var<Real> v) const { return at(v.id); }
  std::size_t size() const { return grads_.size(); }

  void Set(NodeId id, BasicTensor<Real> g) { grads_[id] = std::move(g); }

 private:
  std::unordered_map<NodeId, BasicTensor<Real>> grads_;
};

// Reverse-mode accumulation from a scalar node. Returns gradients of every
// leaf that requires a gradient and lies upstream of `loss`. When `wrt` is
// non-empty only those leaves are produced, and branches that cannot reach
// them are skipped entirely.
template <typename Real>
Gradients<Real> Backward(const Tape<Real>& tape, NodeId loss,
                         std::span<const NodeId> wrt = {});

template <typename Real>
Gradients<Real> Backward(Var<Real> loss, std::span<const NodeId> wrt = {}) {
  return Backward(*loss.tape, loss.id, wrt);
}

}  // namespace sgt

#endif  // SGT_TAPE_HPP_
