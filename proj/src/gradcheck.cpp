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

#include "sgt/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "sgt/errors.hpp"
#include "sgt/model.hpp"
#include "sgt/objectives.hpp"
#include "sgt/ops.hpp"
#include "sgt/quantization.hpp"
#include "sgt/rng.hpp"

namespace sgt {

namespace {

struct Evaluation {
  double value = 0.0;
  std::vector<std::uint8_t> regions;
};

Evaluation Evaluate(const ScalarGraph& graph, std::span<const TensorD> inputs) {
  Tape<double> tape;
  tape.set_region_logging(true);
  std::vector<Var<double>> vars;
  vars.reserve(inputs.size());
  for (const TensorD& t : inputs) vars.push_back(ops::Constant(tape, t));
  const Var<double> out = graph(tape, vars);
  if (out.value().size() != 1) {
    throw ContractError("gradcheck: graph output must be a scalar, got " +
                        ShapeToString(out.shape()));
  }
  return {out.value()[0], tape.region_log()};
}

std::string Describe(std::size_t input, std::size_t k, double a, double n) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "input %zu[%zu]: autodiff %.9g vs numeric %.9g",
                input, k, a, n);
  return buf;
}

// ---- random inputs -------------------------------------------------------

class Sampler {
 public:
  Sampler(std::uint64_t seed, std::uint64_t case_id)
      : rng_(MakeStream(seed, "gradcheck", {case_id})) {}

  TensorD Normal(Shape shape, double stddev = 1.0) {
    std::normal_distribution<double> d(0.0, stddev);
    TensorD t(std::move(shape));
    for (double& v : t.values()) v = d(rng_);
    return t;
  }

  TensorD Uniform(Shape shape, double lo, double hi) {
    TensorD t(std::move(shape));
    for (double& v : t.values()) v = lo + (hi - lo) * Uniform01(rng_);
    return t;
  }

  std::vector<int> Labels(std::size_t n, std::size_t classes) {
    std::vector<int> out(n);
    for (int& v : out) v = static_cast<int>(UniformIndex(rng_, classes));
    return out;
  }

  std::size_t Pick(std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(UniformIndex(rng_, hi - lo + 1));
  }

  Rng& rng() { return rng_; }

 private:
  Rng rng_;
};

// Scalar probe of a tensor-valued op: sum(out * r) with fixed random r, so
// every output coordinate contributes a distinct weight.
Var<double> Project(Var<double> out, const TensorD& r) {
  return ops::Sum(ops::Mul(out, ops::Constant(*out.tape, r)));
}

struct Case {
  std::string name;
  ScalarGraph graph;
  std::vector<TensorD> inputs;
};

Case UnaryCase(const std::string& name, Sampler& s, TensorD x,
               std::function<Var<double>(Var<double>)> op) {
  Tape<double> probe;
  const Shape out_shape = op(ops::Constant(probe, x)).shape();
  TensorD r = s.Normal(out_shape);
  return {name,
          [op, r](Tape<double>&, std::span<const Var<double>> v) {
            return Project(op(v[0]), r);
          },
          {std::move(x)}};
}

std::vector<Case> PrimitiveCases(std::uint64_t seed) {
  std::vector<Case> cases;
  std::uint64_t id = 0;

  {
    Sampler s(seed, id++);
    TensorD x = s.Normal({3, 5}), w = s.Normal({5, 4}), b = s.Normal({4});
    TensorD r = s.Normal({3, 4});
    cases.push_back({"dense",
                     [r](Tape<double>&, std::span<const Var<double>> v) {
                       return Project(ops::Dense(v[0], v[1], v[2]), r);
                     },
                     {x, w, b}});
  }
  for (auto [stride, pad] : {std::pair<std::size_t, std::size_t>{1, 0}, {1, 1}, {2, 1}}) {
    Sampler s(seed, id++);
    TensorD x = s.Normal({2, 2, 6, 5}), k = s.Normal({3, 2, 3, 3});
    Tape<double> probe;
    const Shape out = ops::Conv2d(ops::Constant(probe, x),
                                  ops::Constant(probe, k), stride, pad)
                          .shape();
    TensorD r = s.Normal(out);
    cases.push_back({"conv2d stride " + std::to_string(stride) + " pad " +
                         std::to_string(pad),
                     [r, stride, pad](Tape<double>&, std::span<const Var<double>> v) {
                       return Project(ops::Conv2d(v[0], v[1], stride, pad), r);
                     },
                     {x, k}});
  }
  {
    Sampler s(seed, id++);
    TensorD x = s.Normal({2, 3, 4, 4}), b = s.Normal({3});
    TensorD r = s.Normal({2, 3, 4, 4});
    cases.push_back({"add_channel_bias",
                     [r](Tape<double>&, std::span<const Var<double>> v) {
                       return Project(ops::AddChannelBias(v[0], v[1]), r);
                     },
                     {x, b}});
  }
  {
    Sampler s(seed, id++);
    cases.push_back(UnaryCase("relu", s, s.Normal({4, 6}),
                              [](Var<double> x) { return ops::Relu(x); }));
  }
  {
    Sampler s(seed, id++);
    cases.push_back(UnaryCase("avgpool2d", s, s.Normal({2, 2, 5, 4}),
                              [](Var<double> x) { return ops::AvgPool2d(x, 2); }));
  }
  {
    Sampler s(seed, id++);
    cases.push_back(UnaryCase("flatten", s, s.Normal({2, 3, 2, 2}),
                              [](Var<double> x) { return ops::Flatten(x); }));
  }
  {
    Sampler s(seed, id++);
    cases.push_back(UnaryCase("softmax", s, s.Normal({3, 5}),
                              [](Var<double> x) { return ops::Softmax(x); }));
  }
  {
    Sampler s(seed, id++);
    cases.push_back(UnaryCase("log", s, s.Uniform({3, 4}, 0.2, 3.0),
                              [](Var<double> x) { return ops::Log(x); }));
  }
  {
    Sampler s(seed, id++);
    cases.push_back(UnaryCase("scale", s, s.Normal({3, 4}),
                              [](Var<double> x) { return ops::Scale(x, -1.7); }));
  }
  {
    Sampler s(seed, id++);
    cases.push_back({"sum",
                     [](Tape<double>&, std::span<const Var<double>> v) {
                       return ops::Sum(v[0]);
                     },
                     {s.Normal({3, 4})}});
  }
  {
    Sampler s(seed, id++);
    TensorD r = s.Normal({1});
    cases.push_back({"mean",
                     [r](Tape<double>&, std::span<const Var<double>> v) {
                       return Project(ops::Mean(v[0]), r);
                     },
                     {s.Normal({3, 4})}});
  }
  {
    Sampler s(seed, id++);
    TensorD a = s.Normal({3, 4}), b = s.Normal({3, 4}), r = s.Normal({3, 4});
    cases.push_back({"add",
                     [r](Tape<double>&, std::span<const Var<double>> v) {
                       return Project(ops::Add(v[0], v[1]), r);
                     },
                     {a, b}});
  }
  {
    Sampler s(seed, id++);
    TensorD a = s.Normal({3, 4}), b = s.Normal({3, 4}), r = s.Normal({3, 4});
    cases.push_back({"mul",
                     [r](Tape<double>&, std::span<const Var<double>> v) {
                       return Project(ops::Mul(v[0], v[1]), r);
                     },
                     {a, b}});
  }
  {
    // alpha = 1 with inputs over [-1, 2] exercises all three pieces.
    Sampler s(seed, id++);
    TensorD x = s.Uniform({4, 6}, -1.0, 2.0), r = s.Normal({4, 6});
    cases.push_back({"pact_clip",
                     [r](Tape<double>&, std::span<const Var<double>> v) {
                       return Project(Pact(v[0], v[1], 8, false), r);
                     },
                     {x, TensorD({1}, 1.0)}});
  }
  {
    Sampler s(seed, id++);
    TensorD logits = s.Normal({4, 10}, 2.0);
    std::vector<int> labels = s.Labels(4, 10);
    cases.push_back({"cross_entropy",
                     [labels](Tape<double>&, std::span<const Var<double>> v) {
                       return CrossEntropy(v[0], labels);
                     },
                     {logits}});
  }
  {
    Sampler s(seed, id++);
    // Perturbing a probability row directly would leave the simplex that
    // KlDivergence insists on, so both sides come out of a softmax.
    cases.push_back({"kl_divergence",
                     [](Tape<double>&, std::span<const Var<double>> v) {
                       return KlDivergence(ops::Softmax(v[0]),
                                           ops::Softmax(v[1]));
                     },
                     {s.Normal({3, 6}), s.Normal({3, 6})}});
  }
  {
    Sampler s(seed, id++);
    TensorD orig = s.Normal({4, 10}), masked = s.Normal({4, 10});
    std::vector<int> labels = s.Labels(4, 10);
    cases.push_back({"sgt_loss",
                     [labels](Tape<double>&, std::span<const Var<double>> v) {
                       const PactLayerState states[] = {{1.5f, 8, 0.0f}};
                       return SgtLoss(v[0], std::optional<Var<double>>(v[1]),
                                      labels, 0.3, states, kDefaultLambdaAlpha)
                           .objective;
                     },
                     {orig, masked}});
  }
  return cases;
}

// Random chains of dense layers with random activations and a random loss;
// at most a few hundred parameters.
Case CompositeCase(std::uint64_t seed, std::uint64_t index) {
  Sampler s(seed, 1000 + index);
  const std::size_t batch = s.Pick(2, 4);
  const std::size_t depth = s.Pick(2, 3);
  std::vector<std::size_t> widths{s.Pick(3, 8)};
  for (std::size_t d = 0; d < depth; ++d) widths.push_back(s.Pick(3, 8));

  // Moderate scales keep third derivatives, and with them the O(eps^2)
  // truncation error of central differences, well below the tolerance.
  std::vector<TensorD> inputs{s.Normal({batch, widths[0]}, 0.5)};
  std::vector<int> acts;
  for (std::size_t d = 0; d < depth; ++d) {
    inputs.push_back(s.Normal({widths[d], widths[d + 1]},
                              0.5 / std::sqrt(static_cast<double>(widths[d]))));
    inputs.push_back(s.Normal({widths[d + 1]}, 0.1));
    acts.push_back(static_cast<int>(s.Pick(0, 2)));
  }
  inputs.push_back(TensorD({1}, 0.8));  // pact alpha, shared
  const int loss_kind = static_cast<int>(s.Pick(0, 2));
  const std::vector<int> labels = s.Labels(batch, widths.back());
  const TensorD r = s.Normal({batch, widths.back()});

  ScalarGraph graph = [=](Tape<double>& tape, std::span<const Var<double>> v) {
    Var<double> h = v[0];
    const Var<double> alpha = v.back();
    for (std::size_t d = 0; d < depth; ++d) {
      h = ops::Dense(h, v[1 + 2 * d], v[2 + 2 * d]);
      const bool last = d + 1 == depth;
      if (last) break;
      switch (acts[d]) {
        case 0: h = ops::Relu(h); break;
        case 1: h = Pact(h, alpha, 8, false); break;
        default: h = ops::Mul(h, ops::Softmax(h)); break;
      }
    }
    switch (loss_kind) {
      case 0: return CrossEntropy(h, labels);
      case 1: {
        Var<double> other = ops::Add(h, ops::Constant(tape, r));
        Var<double> kl = KlDivergence(ops::Softmax(h), ops::Softmax(other));
        // alpha must reach the loss even if no Pact was drawn.
        return ops::Add(kl, ops::Mul(alpha, alpha));
      }
      default:
        return ops::Add(ops::Mean(ops::Mul(h, ops::Constant(tape, r))),
                        ops::Mul(alpha, alpha));
    }
  };
  return {"composite #" + std::to_string(index), std::move(graph),
          std::move(inputs)};
}

// SmallCNN-family network with PACT clip layers at random alphas (so
// saturation is exercised) or ReLU, through CE. Instance 0 has the full
// SmallCNN-MNIST geometry; the others are random narrower variants.
Case CnnCase(std::uint64_t seed, std::uint64_t index) {
  Sampler s(seed, 2000 + index);
  const bool full = index == 0;
  const std::size_t channels = full ? 1 : s.Pick(1, 3);
  const std::size_t side = full ? 28 : 12 + 4 * s.Pick(0, 3);
  const bool pact = index % 2 == 0;
  ModelConfig cfg;
  cfg.input_shape = {channels, side, side};
  cfg.activation_bits = pact ? 8 : 0;
  const std::size_t widths[] = {full ? 16 : s.Pick(4, 12),
                                full ? 32 : s.Pick(8, 24)};
  for (std::size_t w : widths) {
    cfg.layers.push_back(layer::Conv{w, 3, 1, 1});
    if (pact) {
      cfg.layers.push_back(layer::Pact{});
    } else {
      cfg.layers.push_back(layer::Relu{});
    }
    cfg.layers.push_back(layer::AvgPool{2});
  }
  cfg.layers.push_back(layer::Flatten{});
  cfg.layers.push_back(layer::Dense{cfg.num_classes});

  const BasicModel<double> model = BuildModel(cfg, seed + index).Cast<double>();
  const std::size_t batch = 2;
  std::vector<TensorD> inputs{s.Normal({batch, channels, side, side})};
  for (const auto& p : model.params) {
    TensorD v = p.value;
    // Zero biases would put every dead unit exactly on a kink.
    if (v.rank() == 1) v = s.Normal(v.shape(), 0.1);
    inputs.push_back(std::move(v));
  }
  for (std::size_t j = 0; j < model.pact_states.size(); ++j) {
    inputs.push_back(TensorD({1}, 0.5 + Uniform01(s.rng())));
  }
  const std::vector<int> labels = s.Labels(batch, cfg.num_classes);
  const std::size_t n_params = model.params.size();

  ScalarGraph graph = [model, labels, n_params](Tape<double>&,
                                                std::span<const Var<double>> v) {
    ModelBinding<double> binding;
    binding.params.assign(v.begin() + 1, v.begin() + 1 + n_params);
    binding.alphas.assign(v.begin() + 1 + n_params, v.end());
    return CrossEntropy(Forward(model, binding, v[0], ForwardMode::kFloat),
                        labels);
  };
  return {"small_cnn #" + std::to_string(index) + " (" +
              std::to_string(model.ParameterCount()) + " params, " +
              (pact ? "pact" : "relu") + ")",
          std::move(graph), std::move(inputs)};
}

}  // namespace

double EvaluateGraph(const ScalarGraph& graph, std::span<const TensorD> inputs) {
  return Evaluate(graph, inputs).value;
}

TensorD FiniteDifferenceGrad(const ScalarGraph& graph,
                             std::span<const TensorD> inputs, std::size_t which,
                             double eps) {
  if (which >= inputs.size()) {
    throw ContractError("gradcheck: no input " + std::to_string(which));
  }
  if (!(eps > 0.0)) throw ContractError("gradcheck: eps must be positive");
  std::vector<TensorD> work(inputs.begin(), inputs.end());
  TensorD grad(inputs[which].shape());
  for (std::size_t k = 0; k < grad.size(); ++k) {
    const double x0 = work[which][k];
    work[which][k] = x0 + eps;
    const double up = EvaluateGraph(graph, work);
    work[which][k] = x0 - eps;
    const double down = EvaluateGraph(graph, work);
    work[which][k] = x0;
    grad[k] = (up - down) / (2.0 * eps);
  }
  return grad;
}

GradCheckReport CheckGradients(const std::string& name, const ScalarGraph& graph,
                               std::span<const TensorD> inputs,
                               const GradCheckOptions& options) {
  GradCheckReport report;
  report.name = name;
  report.tolerance = options.tolerance;

  Tape<double> tape;
  tape.set_region_logging(true);
  std::vector<Var<double>> vars;
  for (const TensorD& t : inputs) vars.push_back(ops::Parameter(tape, t));
  const Var<double> out = graph(tape, vars);
  const std::vector<std::uint8_t> base_regions = tape.region_log();
  const Gradients<double> grads = Backward(out);

  std::vector<TensorD> work(inputs.begin(), inputs.end());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const bool has = grads.contains(vars[i].id);
    for (std::size_t k = 0; k < inputs[i].size(); ++k) {
      const double x0 = work[i][k];
      work[i][k] = x0 + options.eps;
      const Evaluation up = Evaluate(graph, work);
      work[i][k] = x0 - options.eps;
      const Evaluation down = Evaluate(graph, work);
      work[i][k] = x0;
      if (up.regions != base_regions || down.regions != base_regions) {
        ++report.skipped;
        continue;
      }
      const double numeric = (up.value - down.value) / (2.0 * options.eps);
      const double analytic = has ? grads.at(vars[i].id)[k] : 0.0;
      const double denom =
          std::max({std::abs(analytic), std::abs(numeric), options.floor});
      const double err = std::abs(analytic - numeric) / denom;
      ++report.checked;
      if (report.worst.empty() || err > report.max_error) {
        report.max_error = err;
        report.worst = Describe(i, k, analytic, numeric);
      }
    }
  }
  return report;
}

std::vector<GradCheckReport> RunGradientSuite(std::uint64_t seed,
                                              const GradCheckOptions& options) {
  std::vector<Case> cases = PrimitiveCases(seed);
  for (std::uint64_t i = 0; i < 5; ++i) cases.push_back(CompositeCase(seed, i));
  for (std::uint64_t i = 0; i < 3; ++i) cases.push_back(CnnCase(seed, i));
  std::vector<GradCheckReport> reports;
  reports.reserve(cases.size());
  for (const Case& c : cases) {
    reports.push_back(CheckGradients(c.name, c.graph, c.inputs, options));
  }
  return reports;
}

}  // namespace sgt
