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

#ifndef SGT_MODEL_HPP_
#define SGT_MODEL_HPP_

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "sgt/quantization.hpp"
#include "sgt/tape.hpp"
#include "sgt/tensor.hpp"

namespace sgt {

namespace layer {
struct Conv {
  std::size_t out_channels = 0;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t pad = 0;
  friend bool operator==(const Conv&, const Conv&) = default;
};
struct Dense {
  std::size_t out_dim = 0;
  friend bool operator==(const Dense&, const Dense&) = default;
};
struct Pact {
  friend bool operator==(const Pact&, const Pact&) = default;
};
struct Relu {
  friend bool operator==(const Relu&, const Relu&) = default;
};
struct AvgPool {
  std::size_t size = 2;
  friend bool operator==(const AvgPool&, const AvgPool&) = default;
};
struct Flatten {
  friend bool operator==(const Flatten&, const Flatten&) = default;
};
}  // namespace layer

using LayerSpec = std::variant<layer::Conv, layer::Dense, layer::Pact,
                               layer::Relu, layer::AvgPool, layer::Flatten>;

// Layer chain plus quantization settings. activation_bits == 0 means
// activation quantization is off, in which case no Pact layer may appear;
// with activation_bits > 0 at least one must.
struct ModelConfig {
  Shape input_shape;  // [channels, height, width]
  std::vector<LayerSpec> layers;
  std::size_t num_classes = 10;
  bool quantize_weights = false;
  int activation_bits = 0;
  int weight_bits = 8;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// conv(16) -> act -> avgpool2 -> conv(32) -> act -> avgpool2 -> flatten ->
// dense(10); act is Pact when activation_bits > 0, otherwise Relu.
ModelConfig SmallCnnMnist(int activation_bits, bool quantize_weights,
                          int weight_bits);

// Same family for 3x32x32 inputs: conv widths 32/64/64, three pooled blocks.
ModelConfig SmallCnnCifar(int activation_bits, bool quantize_weights,
                          int weight_bits);

// One-line textual form, e.g. "conv:16:3:1:1 pact avgpool:2 flatten dense:10".
std::string LayersToString(const std::vector<LayerSpec>& layers);
std::vector<LayerSpec> LayersFromString(const std::string& text);

// Shape after every layer for a batch of one; throws ConfigError naming the
// first offending layer index.
std::vector<Shape> ValidateConfig(const ModelConfig& config);

template <typename Real>
struct NamedTensor {
  std::string name;
  BasicTensor<Real> value;
};

enum class ForwardMode { kFloat, kQuantized };

template <typename Real>
struct BasicModel {
  ModelConfig config;
  std::vector<NamedTensor<Real>> params;
  std::vector<PactLayerState> pact_states;

  std::size_t ParameterCount() const;
  const BasicTensor<Real>& param(const std::string& name) const;

  template <typename Other>
  BasicModel<Other> Cast() const {
    BasicModel<Other> m;
    m.config = config;
    m.pact_states = pact_states;
    for (const auto& p : params) {
      m.params.push_back({p.name, p.value.template Cast<Other>()});
    }
    return m;
  }
};

using Model = BasicModel<float>;

// He-normal weights (std = sqrt(2 / fan_in)) from the seed's "init" stream,
// zero biases, every alpha at 10.0.
Model BuildModel(const ModelConfig& config, std::uint64_t seed);

// Tape leaves for one forward/backward pass. alphas[j] belongs to
// model.pact_states[j].
template <typename Real>
struct ModelBinding {
  std::vector<Var<Real>> params;
  std::vector<Var<Real>> alphas;

  std::vector<NodeId> TrainableIds() const;
};

template <typename Real>
ModelBinding<Real> Bind(const BasicModel<Real>& model, Tape<Real>& tape,
                        bool trainable);

// Quantized mode fake-quantizes weights (when the config asks for it) and
// runs Pact layers through the k-bit quantizer; float mode keeps Pact as a
// plain clip to [0, alpha].
template <typename Real>
Var<Real> Forward(const BasicModel<Real>& model,
                  const ModelBinding<Real>& binding, Var<Real> x,
                  ForwardMode mode);

// Logits on a throwaway tape.
template <typename Real>
BasicTensor<Real> Predict(const BasicModel<Real>& model,
                          const BasicTensor<Real>& x, ForwardMode mode);

}  // namespace sgt

#endif  // SGT_MODEL_HPP_
