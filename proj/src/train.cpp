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

#include "sgt/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>

#include "sgt/errors.hpp"
#include "sgt/ops.hpp"
#include "sgt/rng.hpp"
#include "sgt/saliency.hpp"
#include "sgt/tape.hpp"

namespace sgt {

namespace {

std::string Fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string FormatBreakdown(const LossBreakdown& b) {
  return "ce=" + Fixed6(b.cross_entropy) + " kl=" + Fixed6(b.kl_term) +
         " pact_penalty=" + Fixed6(b.pact_penalty) + " total=" + Fixed6(b.total);
}

std::vector<float> Alphas(const Model& model) {
  std::vector<float> out;
  out.reserve(model.pact_states.size());
  for (const auto& s : model.pact_states) out.push_back(s.alpha);
  return out;
}

// Row b of a [batch, ...] tensor as a flat span.
template <typename T>
std::span<T> Row(std::span<T> all, std::size_t row, std::size_t width) {
  return all.subspan(row * width, width);
}

std::size_t CountCorrect(const Tensor& logits, std::span<const int> labels) {
  const std::size_t classes = logits.dim(1);
  std::size_t correct = 0;
  for (std::size_t b = 0; b < labels.size(); ++b) {
    if (static_cast<int>(ArgMax(Row(logits.values(), b, classes))) ==
        labels[b]) {
      ++correct;
    }
  }
  return correct;
}

}  // namespace

std::string_view ToString(TrainMode mode) {
  switch (mode) {
    case TrainMode::kBaselineCe: return "baseline_ce";
    case TrainMode::kSgtFloat: return "sgt_float";
    case TrainMode::kPactOnly: return "pact_only";
    case TrainMode::kSgtPact: return "sgt_pact";
  }
  return "?";
}

TrainMode ParseTrainMode(std::string_view text) {
  for (TrainMode m : {TrainMode::kBaselineCe, TrainMode::kSgtFloat,
                      TrainMode::kPactOnly, TrainMode::kSgtPact}) {
    if (ToString(m) == text) return m;
  }
  throw ConfigError("unknown mode '" + std::string(text) +
                    "' (expected baseline_ce, sgt_float, pact_only or "
                    "sgt_pact)");
}

bool UsesSaliency(TrainMode mode) {
  return mode == TrainMode::kSgtFloat || mode == TrainMode::kSgtPact;
}

bool UsesQuantization(TrainMode mode) {
  return mode == TrainMode::kPactOnly || mode == TrainMode::kSgtPact;
}

ForwardMode ForwardModeFor(TrainMode mode) {
  return UsesQuantization(mode) ? ForwardMode::kQuantized : ForwardMode::kFloat;
}

void TrainConfig::Validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (!(lr > 0.0) || !std::isfinite(lr)) fail("lr must be positive");
  if (epochs < 1) fail("epochs must be >= 1");
  if (batch_size < 1) fail("batch size must be >= 1");
  if (activation_bits < 1 || activation_bits > 24) {
    fail("activation bits must be in [1, 24], got " +
         std::to_string(activation_bits));
  }
  if (weight_bits < 1 || weight_bits > 24) {
    fail("weight bits must be in [1, 24], got " + std::to_string(weight_bits));
  }
  if (!(masking_ratio >= 0.0 && masking_ratio <= 1.0)) {
    fail("masking ratio must be in [0, 1]");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be >= 0");
  if (!(lambda_alpha >= 0.0) || !std::isfinite(lambda_alpha)) {
    fail("lambda_alpha must be >= 0");
  }
}

TrainConfig MnistDefaults() {
  TrainConfig c;
  c.lr = 0.1;
  c.epochs = 50;
  c.batch_size = 128;
  c.activation_bits = 8;
  c.weight_bits = 8;
  c.masking_ratio = 0.5;
  c.lambda = 0.1;
  return c;
}

TrainConfig CifarDefaults() {
  TrainConfig c;
  c.lr = 0.01;
  c.epochs = 50;
  c.batch_size = 64;
  c.activation_bits = 4;
  c.weight_bits = 4;
  c.masking_ratio = 0.5;
  c.lambda = 0.05;
  return c;
}

ModelConfig ModelConfigFor(const Shape& sample_shape, const TrainConfig& cfg) {
  const bool quant = UsesQuantization(cfg.mode);
  const int act_bits = quant ? cfg.activation_bits : 0;
  if (sample_shape == Shape{1, 28, 28}) {
    return SmallCnnMnist(act_bits, quant, cfg.weight_bits);
  }
  if (sample_shape == Shape{3, 32, 32}) {
    return SmallCnnCifar(act_bits, quant, cfg.weight_bits);
  }
  throw ConfigError("no model preset for input shape " +
                    ShapeToString(sample_shape));
}

void SgdStep(std::span<NamedTensor<float>> params,
             std::span<const Tensor* const> grads, double lr) {
  if (grads.size() != params.size()) {
    throw ContractError("sgd: " + std::to_string(grads.size()) +
                        " gradients for " + std::to_string(params.size()) +
                        " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor* g = grads[i];
    Tensor& w = params[i].value;
    if (g == nullptr) {
      throw ContractError("sgd: missing gradient for " + params[i].name);
    }
    if (g->shape() != w.shape()) {
      throw ContractError("sgd: gradient shape " + ShapeToString(g->shape()) +
                          " does not match " + params[i].name + " " +
                          ShapeToString(w.shape()));
    }
    float* wp = w.data();
    const float* gp = g->data();
    for (std::size_t k = 0; k < w.size(); ++k) {
      wp[k] = static_cast<float>(static_cast<double>(wp[k]) -
                                 lr * static_cast<double>(gp[k]));
    }
  }
}

LossBreakdown TrainStep(Model& model, const Batch& batch,
                        const TrainConfig& cfg, std::uint64_t epoch,
                        std::uint64_t batch_index) {
  const ForwardMode mode = ForwardModeFor(cfg.mode);
  const bool sgt = UsesSaliency(cfg.mode);

  Tape<float> tape;
  const ModelBinding<float> binding = Bind(model, tape, true);
  Var<float> x = sgt ? ops::Parameter(tape, batch.x)
                     : ops::Constant(tape, batch.x);
  Var<float> logits = Forward(model, binding, x, mode);

  std::optional<Var<float>> masked_logits;
  if (sgt) {
    const Tensor saliency = LogitGradient(x, logits, batch.y);
    const std::size_t n = batch.y.size();
    const std::size_t width = batch.x.size() / n;
    const std::size_t k = MaskCount(cfg.masking_ratio, width);
    Tensor masked = batch.x;
    for (std::size_t b = 0; b < n; ++b) {
      std::span<const float> sal = Row(saliency.values(), b, width);
      const std::vector<std::size_t> ranking = RankFeatures(sal);
      Rng rng = MakeStream(cfg.seed, "mask", {epoch, batch_index, b});
      MaskFeatures(Row(masked.values(), b, width),
                   std::span<const std::size_t>(ranking).first(k), rng);
    }
    masked_logits = Forward(model, binding, ops::Constant(tape, std::move(masked)), mode);
  }

  const SgtObjective<float> obj =
      SgtLoss(logits, masked_logits, batch.y, sgt ? cfg.lambda : 0.0,
              model.pact_states, cfg.lambda_alpha);
  if (!std::isfinite(obj.breakdown.total)) {
    throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) +
                         " batch " + std::to_string(batch_index) + ": " +
                         FormatBreakdown(obj.breakdown));
  }

  const std::vector<NodeId> wrt = binding.TrainableIds();
  const Gradients<float> grads = Backward(obj.objective, wrt);

  std::vector<const Tensor*> param_grads;
  param_grads.reserve(binding.params.size());
  for (const Var<float>& p : binding.params) {
    param_grads.push_back(grads.contains(p.id) ? &grads.at(p.id) : nullptr);
  }
  SgdStep(model.params, param_grads, cfg.lr);

  for (std::size_t j = 0; j < binding.alphas.size(); ++j) {
    const NodeId id = binding.alphas[j].id;
    const double dalpha = grads.contains(id) ? grads.at(id)[0] : 0.0;
    model.pact_states[j] =
        UpdateAlpha(model.pact_states[j], dalpha, cfg.lr, cfg.lambda_alpha);
  }
  return obj.breakdown;
}

TrainResult Train(Model model, const Dataset& train, const Dataset& test,
                  const TrainConfig& cfg, const EpochObserver& observer) {
  cfg.Validate();
  if (train.size() == 0) throw ContractError("train: empty training set");
  if (train.sample_shape() != model.config.input_shape) {
    throw DimensionError("train: dataset samples are " +
                         ShapeToString(train.sample_shape()) +
                         " but the model expects " +
                         ShapeToString(model.config.input_shape));
  }
  const ForwardMode mode = ForwardModeFor(cfg.mode);
  TrainResult result;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const auto e = static_cast<std::uint64_t>(epoch);
    Rng shuffle = MakeStream(cfg.seed, "shuffle", {e});
    const auto plan = BatchPlan(train.size(), cfg.batch_size, shuffle, true);
    LossBreakdown sum;
    for (std::size_t bi = 0; bi < plan.size(); ++bi) {
      const Batch batch = MakeBatch(train, plan[bi]);
      const LossBreakdown b = TrainStep(model, batch, cfg, e, bi);
      sum.cross_entropy += b.cross_entropy;
      sum.kl_term += b.kl_term;
      sum.pact_penalty += b.pact_penalty;
      sum.total += b.total;
    }
    const double nb = static_cast<double>(plan.size());
    MetricsRecord rec;
    rec.epoch = epoch;
    rec.loss = {sum.cross_entropy / nb, sum.kl_term / nb,
                sum.pact_penalty / nb, sum.total / nb};
    rec.test_accuracy = test.size() > 0 ? EvaluateAccuracy(model, test, mode) : 0.0;
    rec.alphas = Alphas(model);
    rec.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    if (observer) observer(rec);
    result.history.push_back(std::move(rec));
  }
  result.model = std::move(model);
  return result;
}

std::size_t ArgMax(std::span<const float> row) {
  if (row.empty()) throw ContractError("argmax of an empty row");
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i) {
    if (row[i] > row[best]) best = i;
  }
  return best;
}

double EvaluateAccuracy(const Model& model, const Dataset& dataset,
                        ForwardMode mode) {
  if (dataset.size() == 0) throw ContractError("evaluate: empty dataset");
  Rng unused = MakeStream(0, "eval");
  const auto plan = BatchPlan(dataset.size(), kEvalBatchSize, unused, false);
  std::size_t correct = 0;
  for (const auto& rows : plan) {
    const Batch batch = MakeBatch(dataset, rows);
    correct += CountCorrect(Predict(model, batch.x, mode), batch.y);
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

std::vector<SweepPoint> MaskingSweep(const Model& model, const Dataset& dataset,
                                     std::span<const double> percentages,
                                     std::uint64_t seed, ForwardMode mode) {
  if (dataset.size() == 0) throw ContractError("sweep: empty dataset");
  for (double p : percentages) {
    if (!(p >= 0.0 && p <= 100.0)) {
      throw ContractError("sweep: percentage " + std::to_string(p) +
                          " outside [0, 100]");
    }
  }
  const std::size_t width = dataset.features();
  std::vector<std::size_t> correct(percentages.size(), 0);
  Rng unused = MakeStream(0, "eval");
  const auto plan = BatchPlan(dataset.size(), kEvalBatchSize, unused, false);
  for (const auto& rows : plan) {
    const Batch batch = MakeBatch(dataset, rows);
    const std::size_t n = rows.size();

    Tape<float> tape;
    const ModelBinding<float> binding = Bind(model, tape, false);
    Var<float> x = ops::Parameter(tape, batch.x);
    Var<float> logits = Forward(model, binding, x, mode);
    const Tensor clean = logits.value();
    std::vector<int> predicted(n);
    for (std::size_t b = 0; b < n; ++b) {
      predicted[b] = static_cast<int>(ArgMax(Row(clean.values(), b, clean.dim(1))));
    }
    const Tensor saliency = LogitGradient(x, logits, predicted);
    std::vector<std::vector<std::size_t>> rankings(n);
    for (std::size_t b = 0; b < n; ++b) {
      rankings[b] = RankFeatures(Row(saliency.values(), b, width));
    }

    for (std::size_t pi = 0; pi < percentages.size(); ++pi) {
      const std::size_t k = MaskCount(percentages[pi] / 100.0, width);
      if (k == 0) {
        correct[pi] += CountCorrect(clean, batch.y);
        continue;
      }
      Tensor masked = batch.x;
      for (std::size_t b = 0; b < n; ++b) {
        Rng rng = MakeStream(seed, "sweep", {rows[b], pi});
        // Most salient features sit at the end of the ascending ranking.
        MaskFeatures(Row(masked.values(), b, width),
                     std::span<const std::size_t>(rankings[b]).last(k), rng);
      }
      correct[pi] += CountCorrect(Predict(model, masked, mode), batch.y);
    }
  }
  std::vector<SweepPoint> out;
  for (std::size_t pi = 0; pi < percentages.size(); ++pi) {
    out.push_back({percentages[pi], static_cast<double>(correct[pi]) /
                                        static_cast<double>(dataset.size())});
  }
  return out;
}

void WriteMetricsCsv(std::ostream& out, std::span<const MetricsRecord> history,
                     bool include_seconds) {
  const std::size_t alphas = history.empty() ? 0 : history.front().alphas.size();
  out << "epoch,ce,kl,pact_penalty,total,test_acc";
  for (std::size_t j = 0; j < alphas; ++j) out << ",alpha_" << j;
  out << ",seconds\n";
  for (const MetricsRecord& r : history) {
    if (r.alphas.size() != alphas) {
      throw ContractError("metrics: inconsistent alpha count across epochs");
    }
    out << r.epoch << ',' << Fixed6(r.loss.cross_entropy) << ','
        << Fixed6(r.loss.kl_term) << ',' << Fixed6(r.loss.pact_penalty) << ','
        << Fixed6(r.loss.total) << ',' << Fixed6(r.test_accuracy);
    for (float a : r.alphas) out << ',' << Fixed6(a);
    out << ',' << Fixed6(include_seconds ? r.seconds : 0.0) << '\n';
  }
}

void WriteSweepCsv(std::ostream& out, std::span<const SweepPoint> points) {
  out << "mask_pct,accuracy\n";
  for (const SweepPoint& p : points) {
    out << Fixed6(p.percentage) << ',' << Fixed6(p.accuracy) << '\n';
  }
}

namespace {

std::ofstream OpenScript(const std::filesystem::path& script) {
  std::ofstream out(script);
  if (!out) throw IoError("cannot write " + script.string());
  return out;
}

}  // namespace

void WriteMetricsPlotScript(const std::filesystem::path& script,
                            const std::string& csv_name, std::size_t alphas) {
  std::ofstream out = OpenScript(script);
  const std::string stem = std::filesystem::path(csv_name).stem().string();
  out << "# gnuplot " << script.filename().string() << "\n"
      << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "set terminal pngcairo size 900,600\n"
      << "set xlabel 'epoch'\n";
  if (alphas > 0) {
    out << "set output '" << stem << "_alpha.png'\n"
        << "set ylabel 'alpha'\n"
        << "plot for [j=0:" << alphas - 1 << "] '" << csv_name
        << "' using 1:(column(7+j)) with linespoints title sprintf('alpha_%d', j)\n";
  }
  out << "set output '" << stem << "_accuracy.png'\n"
      << "set ylabel 'test accuracy'\n"
      << "plot '" << csv_name << "' using 1:6 with linespoints title 'test_acc'\n"
      << "set output '" << stem << "_loss.png'\n"
      << "set ylabel 'loss'\n"
      << "plot '" << csv_name << "' using 1:2 with lines title 'ce', '' using 1:3 "
      << "with lines title 'kl', '' using 1:5 with lines title 'total'\n";
  if (!out) throw IoError("cannot write " + script.string());
}

void WriteSweepPlotScript(const std::filesystem::path& script,
                          const std::string& csv_name) {
  std::ofstream out = OpenScript(script);
  const std::string stem = std::filesystem::path(csv_name).stem().string();
  out << "# gnuplot " << script.filename().string() << "\n"
      << "set datafile separator ','\n"
      << "set terminal pngcairo size 900,600\n"
      << "set output '" << stem << ".png'\n"
      << "set xlabel 'masked features (%)'\n"
      << "set ylabel 'accuracy'\n"
      << "set yrange [0:1]\n"
      << "plot '" << csv_name << "' using 1:2 skip 1 with linespoints title 'accuracy'\n";
  if (!out) throw IoError("cannot write " + script.string());
}

}  // namespace sgt
