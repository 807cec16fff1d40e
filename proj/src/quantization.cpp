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

#include "sgt/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace sgt {

namespace {

void CheckAlpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ContractError("pact: alpha must be a positive finite value, got " +
                        std::to_string(alpha));
  }
}

void CheckBits(int bits) {
  if (bits < 1 || bits > 24) {
    throw ContractError("quantizer bit width must be in [1, 24], got " +
                        std::to_string(bits));
  }
}

double ClipPact(double x, double alpha) {
  if (x < 0.0) return 0.0;
  return x < alpha ? x : alpha;
}

std::uint8_t PactRegion(double x, double alpha) {
  if (x < 0.0) return 0;
  return x < alpha ? 1 : 2;
}

}  // namespace

double RoundHalfAway(double v) { return std::round(v); }

template <typename Real>
BasicTensor<Real> PactForward(const BasicTensor<Real>& x, double alpha,
                              int bits, bool quantize) {
  CheckAlpha(alpha);
  CheckBits(bits);
  const double levels = std::ldexp(1.0, bits) - 1.0;
  BasicTensor<Real> y(x.shape());
  const Real* in = x.data();
  Real* out = y.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    double v = ClipPact(in[i], alpha);
    if (quantize) v = RoundHalfAway(v * levels / alpha) * alpha / levels;
    out[i] = static_cast<Real>(v);
  }
  return y;
}

template <typename Real>
PactGradient<Real> PactBackward(const BasicTensor<Real>& upstream,
                                const BasicTensor<Real>& x, double alpha) {
  if (upstream.shape() != x.shape()) {
    throw DimensionError("pact backward: upstream " +
                         ShapeToString(upstream.shape()) + " vs input " +
                         ShapeToString(x.shape()));
  }
  PactGradient<Real> g{BasicTensor<Real>(x.shape()), 0.0};
  const Real* xv = x.data();
  const Real* up = upstream.data();
  Real* dx = g.dx.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = xv[i];
    if (v >= alpha) {
      g.dalpha += up[i];
    } else if (v >= 0.0) {
      dx[i] = up[i];
    }
  }
  return g;
}

template <typename Real>
Var<Real> Pact(Var<Real> x, Var<Real> alpha, int bits, bool quantize) {
  if (x.tape != alpha.tape) throw ContractError("pact: operands on different tapes");
  if (alpha.value().size() != 1) {
    throw DimensionError("pact: alpha must hold one element, got " +
                         ShapeToString(alpha.shape()));
  }
  const double a = alpha.value()[0];
  BasicTensor<Real> y = PactForward(x.value(), a, bits, quantize);
  if (x.tape->region_logging()) {
    std::vector<std::uint8_t> codes(x.value().size());
    for (std::size_t i = 0; i < codes.size(); ++i) {
      codes[i] = PactRegion(x.value()[i], a);
    }
    x.tape->LogRegions(codes);
  }
  const NodeId id = x.tape->Record(
      quantize ? "pact_quant" : "pact_clip", std::move(y), {x.id, alpha.id},
      [](const BackwardArgs<Real>& args) {
        const double a = args.tape.value(args.inputs[1])[0];
        PactGradient<Real> g = PactBackward(
            args.grad_output, args.tape.value(args.inputs[0]), a);
        if (BasicTensor<Real>* gx = args.grad_inputs[0]) {
          for (std::size_t i = 0; i < gx->size(); ++i) (*gx)[i] += g.dx[i];
        }
        if (BasicTensor<Real>* ga = args.grad_inputs[1]) {
          (*ga)[0] = static_cast<Real>(static_cast<double>((*ga)[0]) + g.dalpha);
        }
      });
  return {x.tape, id};
}

template <typename Real>
WeightQuantConfig DeriveWeightQuant(const BasicTensor<Real>& w, int bits) {
  CheckBits(bits);
  WeightQuantConfig cfg;
  cfg.bits = bits;
  const auto [lo, hi] = std::minmax_element(w.values().begin(), w.values().end());
  cfg.w_min = *lo;
  cfg.w_max = *hi;
  if (cfg.w_max > cfg.w_min) {
    cfg.step = (cfg.w_max - cfg.w_min) / static_cast<double>(cfg.levels() - 1);
    cfg.zero_point = static_cast<std::int64_t>(RoundHalfAway(-cfg.w_min / cfg.step));
  }
  return cfg;
}

template <typename Real>
BasicTensor<Real> QuantizeWeights(const BasicTensor<Real>& w,
                                  const WeightQuantConfig& cfg) {
  if (cfg.degenerate()) return w;
  const double top = static_cast<double>(cfg.levels() - 1);
  const double z = static_cast<double>(cfg.zero_point);
  BasicTensor<Real> out(w.shape());
  const Real* in = w.data();
  Real* dst = out.data();
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double q = std::clamp(RoundHalfAway(in[i] / cfg.step) + z, 0.0, top);
    dst[i] = static_cast<Real>((q - z) * cfg.step);
  }
  return out;
}

template <typename Real>
Var<Real> FakeQuantizeWeights(Var<Real> w, int bits) {
  const WeightQuantConfig cfg = DeriveWeightQuant(w.value(), bits);
  BasicTensor<Real> q = QuantizeWeights(w.value(), cfg);
  const NodeId id = w.tape->Record(
      "fake_quant_weights", std::move(q), {w.id},
      [cfg](const BackwardArgs<Real>& args) {
        const Real* wv = args.tape.value(args.inputs[0]).data();
        const Real* g = args.grad_output.data();
        Real* gw = args.grad_inputs[0]->data();
        for (std::size_t i = 0; i < args.grad_output.size(); ++i) {
          const double v = wv[i];
          if (cfg.degenerate() || (v > cfg.w_min && v < cfg.w_max)) gw[i] += g[i];
        }
      });
  return {w.tape, id};
}

PactLayerState UpdateAlpha(PactLayerState state, double dalpha, double lr,
                           double lambda_alpha) {
  if (lr < 0.0) throw ContractError("update_alpha: learning rate must be >= 0");
  const double a = state.alpha;
  const double next = a - lr * (dalpha + 2.0 * lambda_alpha * a);
  state.alpha = static_cast<float>(std::max<double>(next, kAlphaFloor));
  state.alpha_grad_accum = static_cast<float>(dalpha);
  return state;
}

#define SGT_INSTANTIATE_QUANT(Real)                                           \
  template BasicTensor<Real> PactForward(const BasicTensor<Real>&, double,    \
                                         int, bool);                          \
  template PactGradient<Real> PactBackward(const BasicTensor<Real>&,          \
                                           const BasicTensor<Real>&, double); \
  template Var<Real> Pact(Var<Real>, Var<Real>, int, bool);                   \
  template WeightQuantConfig DeriveWeightQuant(const BasicTensor<Real>&, int);\
  template BasicTensor<Real> QuantizeWeights(const BasicTensor<Real>&,        \
                                             const WeightQuantConfig&);       \
  template Var<Real> FakeQuantizeWeights(Var<Real>, int);

SGT_INSTANTIATE_QUANT(float)
SGT_INSTANTIATE_QUANT(double)

}  // namespace sgt
