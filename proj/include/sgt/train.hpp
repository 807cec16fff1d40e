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

#ifndef SGT_TRAIN_HPP_
#define SGT_TRAIN_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sgt/data_io.hpp"
#include "sgt/model.hpp"
#include "sgt/objectives.hpp"

namespace sgt {

// baseline_ce: float ReLU network, cross-entropy only.
// sgt_float:   float ReLU network with saliency masking and the KL term.
// pact_only:   PACT activations and fake-quantized weights, cross-entropy only.
// sgt_pact:    both.
enum class TrainMode { kBaselineCe, kSgtFloat, kPactOnly, kSgtPact };

std::string_view ToString(TrainMode mode);
TrainMode ParseTrainMode(std::string_view text);
bool UsesSaliency(TrainMode mode);
bool UsesQuantization(TrainMode mode);
ForwardMode ForwardModeFor(TrainMode mode);

struct TrainConfig {
  double lr = 0.1;
  int epochs = 50;
  std::size_t batch_size = 128;
  int activation_bits = 8;
  int weight_bits = 8;
  double masking_ratio = 0.5;
  double lambda = 0.1;
  double lambda_alpha = kDefaultLambdaAlpha;
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::kSgtPact;

  void Validate() const;  // throws ConfigError
};

// Published per-dataset hyperparameters.
TrainConfig MnistDefaults();
TrainConfig CifarDefaults();

// SmallCNN preset for the dataset's input shape, with PACT layers and weight
// quantization exactly when the mode quantizes.
ModelConfig ModelConfigFor(const Shape& sample_shape, const TrainConfig& cfg);

struct MetricsRecord {
  int epoch = 0;
  LossBreakdown loss;  // mean over the epoch's batches
  double test_accuracy = 0.0;
  std::vector<float> alphas;
  double seconds = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<MetricsRecord> history;
};

using EpochObserver = std::function<void(const MetricsRecord&)>;

// theta <- theta - lr * g. grads[i] belongs to params[i]; a null entry or a
// shape mismatch is a contract error.
void SgdStep(std::span<NamedTensor<float>> params,
             std::span<const Tensor* const> grads, double lr);

// One optimisation step on one batch; mutates the model's parameters and
// clipping levels. (epoch, batch_index) key the masking random streams.
LossBreakdown TrainStep(Model& model, const Batch& batch,
                        const TrainConfig& cfg, std::uint64_t epoch,
                        std::uint64_t batch_index);

// Runs cfg.epochs epochs over shuffled batches of `train`, evaluating on
// `test` after every epoch. Throws NumericalError on a non-finite loss.
TrainResult Train(Model model, const Dataset& train, const Dataset& test,
                  const TrainConfig& cfg, const EpochObserver& observer = {});

inline constexpr std::size_t kEvalBatchSize = 250;

std::size_t ArgMax(std::span<const float> row);

// Fraction of samples whose arg-max logit (lowest index on ties) is the label.
double EvaluateAccuracy(const Model& model, const Dataset& dataset,
                        ForwardMode mode);

struct SweepPoint {
  double percentage = 0.0;
  double accuracy = 0.0;
};

// Masks each sample's top p% most salient features (saliency of the
// predicted-class logit) and measures accuracy, for every p given.
std::vector<SweepPoint> MaskingSweep(const Model& model, const Dataset& dataset,
                                     std::span<const double> percentages,
                                     std::uint64_t seed, ForwardMode mode);

void WriteMetricsCsv(std::ostream& out, std::span<const MetricsRecord> history,
                     bool include_seconds);
void WriteSweepCsv(std::ostream& out, std::span<const SweepPoint> points);

// gnuplot scripts drawing alpha per epoch, test accuracy per epoch, and the
// accuracy-vs-masking curve from the CSVs above.
void WriteMetricsPlotScript(const std::filesystem::path& script,
                            const std::string& csv_name, std::size_t alphas);
void WriteSweepPlotScript(const std::filesystem::path& script,
                          const std::string& csv_name);

}  // namespace sgt

#endif  // SGT_TRAIN_HPP_
