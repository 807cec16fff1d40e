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

#ifndef SGT_QUANTIZATION_HPP_
#define SGT_QUANTIZATION_HPP_

#include <cstdint>

#include "sgt/tape.hpp"
#include "sgt/tensor.hpp"

namespace sgt {

inline constexpr float kDefaultAlpha = 10.0f;
inline constexpr float kAlphaFloor = 1e-3f;
inline constexpr double kDefaultLambdaAlpha = 0.0002;

// Learnable clipping level of one PACT activation layer.
struct PactLayerState {
  float alpha = kDefaultAlpha;
  int bits = 8;
  float alpha_grad_accum = 0.0f;
};

// Rounding used by every quantizer in the project: half away from zero.
double RoundHalfAway(double v);

// Clip to [0, alpha), saturate at alpha. With quantize set, the clipped value
// is then snapped onto the 2^bits - 1 step grid spanning [0, alpha].
template <typename Real>
BasicTensor<Real> PactForward(const BasicTensor<Real>& x, double alpha,
                              int bits, bool quantize = true);

template <typename Real>
struct PactGradient {
  BasicTensor<Real> dx;
  double dalpha = 0.0;
};

// Straight-through backward of PactForward: upstream passes where
// 0 <= x < alpha, and the saturated region's upstream sums into dalpha.
template <typename Real>
PactGradient<Real> PactBackward(const BasicTensor<Real>& upstream,
                                const BasicTensor<Real>& x, double alpha);

// Tape op; alpha is a one-element node so its gradient comes out of Backward.
template <typename Real>
Var<Real> Pact(Var<Real> x, Var<Real> alpha, int bits, bool quantize);

// Per-tensor affine grid for fake weight quantization. step == 0 marks a
// constant tensor, which passes through unchanged.
struct WeightQuantConfig {
  int bits = 8;
  double step = 0.0;
  std::int64_t zero_point = 0;
  double w_min = 0.0;
  double w_max = 0.0;

  std::int64_t levels() const { return std::int64_t{1} << bits; }
  bool degenerate() const { return step <= 0.0; }
};

template <typename Real>
WeightQuantConfig DeriveWeightQuant(const BasicTensor<Real>& w, int bits);

// q = clamp(round(w / step) + zero_point, 0, levels - 1);
// w_out = (q - zero_point) * step.
template <typename Real>
BasicTensor<Real> QuantizeWeights(const BasicTensor<Real>& w,
                                  const WeightQuantConfig& cfg);

// Tape op deriving the grid from w's current range. Backward passes the
// gradient only where w_min < w < w_max.
template <typename Real>
Var<Real> FakeQuantizeWeights(Var<Real> w, int bits);

// alpha <- max(alpha - lr * (dalpha + 2 * lambda_alpha * alpha), 1e-3)
PactLayerState UpdateAlpha(PactLayerState state, double dalpha, double lr,
                           double lambda_alpha);

}  // namespace sgt

#endif  // SGT_QUANTIZATION_HPP_
