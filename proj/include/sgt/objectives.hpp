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

#ifndef SGT_OBJECTIVES_HPP_
#define SGT_OBJECTIVES_HPP_

#include <optional>
#include <span>

#include "sgt/quantization.hpp"
#include "sgt/tape.hpp"

namespace sgt {

inline constexpr double kKlProbabilityFloor = 1e-12;

// Mean over the batch of -log softmax(logits)[label], via log-sum-exp.
template <typename Real>
Var<Real> CrossEntropy(Var<Real> logits, std::span<const int> labels);

// Mean over rows of sum_x p log(p / max(q, 1e-12)), with 0 log 0 = 0.
// Rows of p and q must be probability vectors (sum 1 +- 1e-5, entries >= 0).
template <typename Real>
Var<Real> KlDivergence(Var<Real> p, Var<Real> q);

struct LossBreakdown {
  double cross_entropy = 0.0;
  double kl_term = 0.0;
  double pact_penalty = 0.0;
  double total = 0.0;
};

template <typename Real>
struct SgtObjective {
  // Differentiable part: CE + lambda * KL. The alpha penalty's gradient
  // 2 * lambda_alpha * alpha is applied by UpdateAlpha.
  Var<Real> objective;
  LossBreakdown breakdown;
};

// CE(logits_orig) + lambda * KL(softmax(logits_orig) || softmax(logits_masked))
// + sum_j lambda_alpha * alpha_j^2. Without masked logits the KL term is 0.
// With lambda == 0 the KL node is left out of the objective entirely.
template <typename Real>
SgtObjective<Real> SgtLoss(Var<Real> logits_orig,
                           std::optional<Var<Real>> logits_masked,
                           std::span<const int> labels, double lambda,
                           std::span<const PactLayerState> pact_states,
                           double lambda_alpha);

}  // namespace sgt

#endif  // SGT_OBJECTIVES_HPP_
