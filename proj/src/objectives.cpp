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

#include "sgt/objectives.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "sgt/ops.hpp"

namespace sgt {

namespace {

void CheckLabels(std::span<const int> labels, std::size_t batch,
                 std::size_t classes) {
  if (labels.size() != batch) {
    throw DimensionError("label count " + std::to_string(labels.size()) +
                         " does not match batch " + std::to_string(batch));
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw ContractError("label " + std::to_string(y) + " outside [0, " +
                          std::to_string(classes) + ")");
    }
  }
}

template <typename Real>
void CheckDistribution(const char* what, const BasicTensor<Real>& t) {
  const std::size_t rows = t.dim(0), cols = t.dim(1);
  for (std::size_t r = 0; r < rows; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = t[r * cols + c];
      if (!(v >= 0.0)) {
        throw ContractError(std::string("kl_divergence: ") + what +
                            " has a negative or NaN entry in row " +
                            std::to_string(r));
      }
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-5) {
      throw ContractError(std::string("kl_divergence: ") + what + " row " +
                          std::to_string(r) + " sums to " +
                          std::to_string(total));
    }
  }
}

}  // namespace

template <typename Real>
Var<Real> CrossEntropy(Var<Real> logits, std::span<const int> labels) {
  const Shape& s = logits.shape();
  if (s.size() != 2) {
    throw DimensionError("cross_entropy: logits must be [batch,classes], got " +
                         ShapeToString(s));
  }
  const std::size_t batch = s[0], classes = s[1];
  CheckLabels(labels, batch, classes);
  std::vector<int> y(labels.begin(), labels.end());

  const Real* z = logits.value().data();
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const Real* row = z + b * classes;
    double mx = row[0];
    for (std::size_t c = 1; c < classes; ++c) mx = std::max<double>(mx, row[c]);
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) sum += std::exp(row[c] - mx);
    total += mx + std::log(sum) - row[y[b]];
  }
  const double mean = total / static_cast<double>(batch);

  const NodeId id = logits.tape->Record(
      "cross_entropy", BasicTensor<Real>::Scalar(static_cast<Real>(mean)),
      {logits.id}, [batch, classes, y](const BackwardArgs<Real>& a) {
        const Real* z = a.tape.value(a.inputs[0]).data();
        const double scale = a.grad_output[0] / static_cast<double>(batch);
        Real* g = a.grad_inputs[0]->data();
        std::vector<double> e(classes);
        for (std::size_t b = 0; b < batch; ++b) {
          const Real* row = z + b * classes;
          double mx = row[0];
          for (std::size_t c = 1; c < classes; ++c) {
            mx = std::max<double>(mx, row[c]);
          }
          double sum = 0.0;
          for (std::size_t c = 0; c < classes; ++c) {
            e[c] = std::exp(row[c] - mx);
            sum += e[c];
          }
          for (std::size_t c = 0; c < classes; ++c) {
            const double p = e[c] / sum - (static_cast<int>(c) == y[b] ? 1.0 : 0.0);
            Real& dst = g[b * classes + c];
            dst = static_cast<Real>(dst + scale * p);
          }
        }
      });
  return {logits.tape, id};
}

template <typename Real>
Var<Real> KlDivergence(Var<Real> p, Var<Real> q) {
  if (p.tape != q.tape) throw ContractError("kl_divergence: operands on different tapes");
  if (p.shape() != q.shape() || p.shape().size() != 2) {
    throw DimensionError("kl_divergence: p " + ShapeToString(p.shape()) +
                         " and q " + ShapeToString(q.shape()) +
                         " must be equal [batch,classes] shapes");
  }
  CheckDistribution("p", p.value());
  CheckDistribution("q", q.value());
  const std::size_t rows = p.shape()[0];
  const Real* pv = p.value().data();
  const Real* qv = q.value().data();
  double total = 0.0;
  for (std::size_t i = 0; i < p.value().size(); ++i) {
    const double pi = pv[i];
    if (pi <= 0.0) continue;
    const double qi = std::max<double>(qv[i], kKlProbabilityFloor);
    total += pi * (std::log(pi) - std::log(qi));
  }
  const double mean = total / static_cast<double>(rows);

  const NodeId id = p.tape->Record(
      "kl_divergence", BasicTensor<Real>::Scalar(static_cast<Real>(mean)),
      {p.id, q.id}, [rows](const BackwardArgs<Real>& a) {
        const Real* pv = a.tape.value(a.inputs[0]).data();
        const Real* qv = a.tape.value(a.inputs[1]).data();
        const double scale = a.grad_output[0] / static_cast<double>(rows);
        const std::size_t n = a.tape.value(a.inputs[0]).size();
        if (BasicTensor<Real>* gp = a.grad_inputs[0]) {
          for (std::size_t i = 0; i < n; ++i) {
            const double pi = pv[i];
            if (pi <= 0.0) continue;
            const double qi = std::max<double>(qv[i], kKlProbabilityFloor);
            (*gp)[i] = static_cast<Real>(
                (*gp)[i] + scale * (std::log(pi) - std::log(qi) + 1.0));
          }
        }
        if (BasicTensor<Real>* gq = a.grad_inputs[1]) {
          for (std::size_t i = 0; i < n; ++i) {
            const double qi = qv[i];
            if (qi < kKlProbabilityFloor) continue;
            (*gq)[i] = static_cast<Real>((*gq)[i] - scale * pv[i] / qi);
          }
        }
      });
  return {p.tape, id};
}

template <typename Real>
SgtObjective<Real> SgtLoss(Var<Real> logits_orig,
                           std::optional<Var<Real>> logits_masked,
                           std::span<const int> labels, double lambda,
                           std::span<const PactLayerState> pact_states,
                           double lambda_alpha) {
  if (lambda < 0.0) throw ContractError("sgt_loss: lambda must be >= 0");
  SgtObjective<Real> out;
  Var<Real> ce = CrossEntropy(logits_orig, labels);
  out.objective = ce;
  out.breakdown.cross_entropy = ce.value()[0];
  if (logits_masked) {
    if (logits_masked->shape() != logits_orig.shape()) {
      throw DimensionError("sgt_loss: original logits " +
                           ShapeToString(logits_orig.shape()) +
                           " vs masked logits " +
                           ShapeToString(logits_masked->shape()));
    }
    Var<Real> kl = KlDivergence(ops::Softmax(logits_orig),
                                ops::Softmax(*logits_masked));
    out.breakdown.kl_term = kl.value()[0];
    if (lambda != 0.0) out.objective = ops::Add(ce, ops::Scale(kl, lambda));
  }
  for (const PactLayerState& s : pact_states) {
    const double a = s.alpha;
    out.breakdown.pact_penalty += lambda_alpha * a * a;
  }
  out.breakdown.total = out.breakdown.cross_entropy +
                        lambda * out.breakdown.kl_term +
                        out.breakdown.pact_penalty;
  return out;
}

#define SGT_INSTANTIATE_OBJECTIVES(Real)                                      \
  template Var<Real> CrossEntropy(Var<Real>, std::span<const int>);           \
  template Var<Real> KlDivergence(Var<Real>, Var<Real>);                      \
  template SgtObjective<Real> SgtLoss(Var<Real>, std::optional<Var<Real>>,    \
                                      std::span<const int>, double,           \
                                      std::span<const PactLayerState>, double);

SGT_INSTANTIATE_OBJECTIVES(float)
SGT_INSTANTIATE_OBJECTIVES(double)

}  // namespace sgt
