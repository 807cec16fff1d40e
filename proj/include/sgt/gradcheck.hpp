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

#ifndef SGT_GRADCHECK_HPP_
#define SGT_GRADCHECK_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sgt/tape.hpp"
#include "sgt/tensor.hpp"

namespace sgt {

// Builds a scalar from leaves bound to `inputs` (one Var per input tensor, in
// order) on a fresh tape.
using ScalarGraph =
    std::function<Var<double>(Tape<double>&, std::span<const Var<double>>)>;

double EvaluateGraph(const ScalarGraph& graph, std::span<const TensorD> inputs);

// Central differences (f(x + eps) - f(x - eps)) / 2 eps for every coordinate
// of inputs[which].
TensorD FiniteDifferenceGrad(const ScalarGraph& graph,
                             std::span<const TensorD> inputs, std::size_t which,
                             double eps);

struct GradCheckOptions {
  double eps = 1e-3;
  double tolerance = 1e-4;
  // |a - b| / max(|a|, |b|, floor): near-zero entries are judged by absolute
  // error tolerance * floor, since the O(eps^2) truncation of central
  // differences does not shrink with the gradient.
  double floor = 1e-4;
};

struct GradCheckReport {
  std::string name;
  std::size_t checked = 0;
  std::size_t skipped = 0;  // coordinates within eps of a kink
  double max_error = 0.0;
  std::string worst;  // "input i[k]: autodiff a vs numeric b"
  double tolerance = 0.0;

  bool passed() const { return checked > 0 && max_error <= tolerance; }
};

// Compares Backward against central differences for every coordinate of every
// input. A coordinate is skipped when either perturbed evaluation lands any
// piecewise op on a different linear piece than the unperturbed one.
GradCheckReport CheckGradients(const std::string& name, const ScalarGraph& graph,
                               std::span<const TensorD> inputs,
                               const GradCheckOptions& options = {});

// Every differentiable primitive, the losses, five random composite graphs
// and three random small CNNs.
std::vector<GradCheckReport> RunGradientSuite(std::uint64_t seed,
                                              const GradCheckOptions& options = {});

}  // namespace sgt

#endif  // SGT_GRADCHECK_HPP_
