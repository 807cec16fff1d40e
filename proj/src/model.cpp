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

#include "sgt/model.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "sgt/ops.hpp"
#include "sgt/rng.hpp"

namespace sgt {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

std::string LayerName(const LayerSpec& spec) {
  return std::visit(
      Overloaded{
          [](const layer::Conv& c) {
            return "conv:" + std::to_string(c.out_channels) + ":" +
                   std::to_string(c.kernel) + ":" + std::to_string(c.stride) +
                   ":" + std::to_string(c.pad);
          },
          [](const layer::Dense& d) {
            return "dense:" + std::to_string(d.out_dim);
          },
          [](const layer::Pact&) { return std::string("pact"); },
          [](const layer::Relu&) { return std::string("relu"); },
          [](const layer::AvgPool& p) {
            return "avgpool:" + std::to_string(p.size);
          },
          [](const layer::Flatten&) { return std::string("flatten"); },
      },
      spec);
}

[[noreturn]] void BadLayer(std::size_t index, const std::string& why) {
  throw ConfigError("layer " + std::to_string(index) + ": " + why);
}

ModelConfig Family(Shape input, std::vector<std::size_t> widths,
                   int activation_bits, bool quantize_weights,
                   int weight_bits) {
  ModelConfig cfg;
  cfg.input_shape = std::move(input);
  cfg.activation_bits = activation_bits;
  cfg.quantize_weights = quantize_weights;
  cfg.weight_bits = weight_bits;
  for (std::size_t w : widths) {
    cfg.layers.push_back(layer::Conv{w, 3, 1, 1});
    if (activation_bits > 0) {
      cfg.layers.push_back(layer::Pact{});
    } else {
      cfg.layers.push_back(layer::Relu{});
    }
    cfg.layers.push_back(layer::AvgPool{2});
  }
  cfg.layers.push_back(layer::Flatten{});
  cfg.layers.push_back(layer::Dense{cfg.num_classes});
  return cfg;
}

}  // namespace

ModelConfig SmallCnnMnist(int activation_bits, bool quantize_weights,
                          int weight_bits) {
  return Family({1, 28, 28}, {16, 32}, activation_bits, quantize_weights,
                weight_bits);
}

ModelConfig SmallCnnCifar(int activation_bits, bool quantize_weights,
                          int weight_bits) {
  return Family({3, 32, 32}, {32, 64, 64}, activation_bits, quantize_weights,
                weight_bits);
}

std::string LayersToString(const std::vector<LayerSpec>& layers) {
  std::string out;
  for (const LayerSpec& l : layers) {
    if (!out.empty()) out += ' ';
    out += LayerName(l);
  }
  return out;
}

std::vector<LayerSpec> LayersFromString(const std::string& text) {
  std::vector<LayerSpec> layers;
  std::istringstream words(text);
  std::string word;
  while (words >> word) {
    std::vector<std::string> parts;
    std::istringstream fields(word);
    std::string f;
    while (std::getline(fields, f, ':')) parts.push_back(f);
    const std::string& kind = parts.front();
    auto num = [&](std::size_t i) -> std::size_t {
      if (i >= parts.size()) {
        throw ConfigError("layer '" + word + "' is missing fields");
      }
      try {
        return static_cast<std::size_t>(std::stoull(parts[i]));
      } catch (const std::exception&) {
        throw ConfigError("layer '" + word + "' has a non-numeric field");
      }
    };
    auto expect = [&](std::size_t n) {
      if (parts.size() != n) {
        throw ConfigError("layer '" + word + "' has " +
                          std::to_string(parts.size() - 1) + " fields");
      }
    };
    if (kind == "conv") {
      expect(5);
      layers.push_back(layer::Conv{num(1), num(2), num(3), num(4)});
    } else if (kind == "dense") {
      expect(2);
      layers.push_back(layer::Dense{num(1)});
    } else if (kind == "avgpool") {
      expect(2);
      layers.push_back(layer::AvgPool{num(1)});
    } else if (kind == "pact") {
      expect(1);
      layers.push_back(layer::Pact{});
    } else if (kind == "relu") {
      expect(1);
      layers.push_back(layer::Relu{});
    } else if (kind == "flatten") {
      expect(1);
      layers.push_back(layer::Flatten{});
    } else {
      throw ConfigError("unknown layer kind '" + kind + "'");
    }
  }
  return layers;
}

std::vector<Shape> ValidateConfig(const ModelConfig& config) {
  if (config.input_shape.size() != 3) {
    throw ConfigError("input shape must be [channels,height,width], got " +
                      ShapeToString(config.input_shape));
  }
  for (std::size_t d : config.input_shape) {
    if (d == 0) throw ConfigError("input shape has a zero dimension");
  }
  if (config.layers.empty()) throw ConfigError("model has no layers");
  if (config.activation_bits < 0 || config.activation_bits > 24) {
    throw ConfigError("activation bits must be in [0, 24]");
  }
  if (config.quantize_weights &&
      (config.weight_bits < 1 || config.weight_bits > 24)) {
    throw ConfigError("weight bits must be in [1, 24]");
  }

  std::vector<Shape> shapes;
  Shape cur = config.input_shape;
  bool has_pact = false;
  for (std::size_t i = 0; i < config.layers.size(); ++i) {
    std::visit(
        Overloaded{
            [&](const layer::Conv& c) {
              if (cur.size() != 3) BadLayer(i, "conv needs a [c,h,w] input");
              if (c.out_channels == 0 || c.kernel == 0 || c.stride == 0) {
                BadLayer(i, "conv channels, kernel and stride must be >= 1");
              }
              if (c.kernel > cur[1] + 2 * c.pad || c.kernel > cur[2] + 2 * c.pad) {
                BadLayer(i, "conv kernel larger than padded input " +
                                ShapeToString(cur));
              }
              cur = {c.out_channels, (cur[1] + 2 * c.pad - c.kernel) / c.stride + 1,
                     (cur[2] + 2 * c.pad - c.kernel) / c.stride + 1};
            },
            [&](const layer::Dense& d) {
              if (cur.size() != 1) {
                BadLayer(i, "dense needs a flat input, got " + ShapeToString(cur));
              }
              if (d.out_dim == 0) BadLayer(i, "dense output must be >= 1");
              cur = {d.out_dim};
            },
            [&](const layer::Pact&) { has_pact = true; },
            [&](const layer::Relu&) {},
            [&](const layer::AvgPool& p) {
              if (cur.size() != 3) BadLayer(i, "avgpool needs a [c,h,w] input");
              if (p.size == 0 || p.size > cur[1] || p.size > cur[2]) {
                BadLayer(i, "avgpool window does not fit " + ShapeToString(cur));
              }
              cur = {cur[0], cur[1] / p.size, cur[2] / p.size};
            },
            [&](const layer::Flatten&) { cur = {NumElements(cur)}; },
        },
        config.layers[i]);
    shapes.push_back(cur);
  }
  if (cur.size() != 1 || cur[0] != config.num_classes) {
    BadLayer(config.layers.size() - 1,
             "last layer must output " + std::to_string(config.num_classes) +
                 " logits, got " + ShapeToString(cur));
  }
  if (has_pact != (config.activation_bits > 0)) {
    throw ConfigError(
        has_pact ? "pact layers present but activation bits is 0"
                 : "activation quantization enabled but no pact layer present");
  }
  return shapes;
}

template <typename Real>
std::size_t BasicModel<Real>::ParameterCount() const {
  std::size_t n = 0;
  for (const auto& p : params) n += p.value.size();
  return n + pact_states.size();
}

template <typename Real>
const BasicTensor<Real>& BasicModel<Real>::param(const std::string& name) const {
  for (const auto& p : params) {
    if (p.name == name) return p.value;
  }
  throw ContractError("model has no parameter named '" + name + "'");
}

Model BuildModel(const ModelConfig& config, std::uint64_t seed) {
  ValidateConfig(config);
  Model model;
  model.config = config;
  Rng rng = MakeStream(seed, "init");
  Shape cur = config.input_shape;
  auto he_normal = [&](Shape shape, std::size_t fan_in) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
    Tensor t(std::move(shape));
    for (float& v : t.values()) v = static_cast<float>(dist(rng));
    return t;
  };
  for (std::size_t i = 0; i < config.layers.size(); ++i) {
    const std::string idx = std::to_string(i);
    std::visit(
        Overloaded{
            [&](const layer::Conv& c) {
              const std::size_t fan_in = cur[0] * c.kernel * c.kernel;
              model.params.push_back(
                  {"conv" + idx + ".weight",
                   he_normal({c.out_channels, cur[0], c.kernel, c.kernel}, fan_in)});
              model.params.push_back({"conv" + idx + ".bias", Tensor({c.out_channels})});
              cur = {c.out_channels, (cur[1] + 2 * c.pad - c.kernel) / c.stride + 1,
                     (cur[2] + 2 * c.pad - c.kernel) / c.stride + 1};
            },
            [&](const layer::Dense& d) {
              model.params.push_back(
                  {"dense" + idx + ".weight", he_normal({cur[0], d.out_dim}, cur[0])});
              model.params.push_back({"dense" + idx + ".bias", Tensor({d.out_dim})});
              cur = {d.out_dim};
            },
            [&](const layer::Pact&) {
              PactLayerState s;
              s.bits = config.activation_bits;
              model.pact_states.push_back(s);
            },
            [&](const layer::Relu&) {},
            [&](const layer::AvgPool& p) {
              cur = {cur[0], cur[1] / p.size, cur[2] / p.size};
            },
            [&](const layer::Flatten&) { cur = {NumElements(cur)}; },
        },
        config.layers[i]);
  }
  return model;
}

template <typename Real>
std::vector<NodeId> ModelBinding<Real>::TrainableIds() const {
  std::vector<NodeId> ids;
  for (const auto& v : params) ids.push_back(v.id);
  for (const auto& v : alphas) ids.push_back(v.id);
  return ids;
}

template <typename Real>
ModelBinding<Real> Bind(const BasicModel<Real>& model, Tape<Real>& tape,
                        bool trainable) {
  ModelBinding<Real> b;
  for (const auto& p : model.params) {
    b.params.push_back({&tape, tape.Leaf(p.value, trainable)});
  }
  for (const auto& s : model.pact_states) {
    b.alphas.push_back(
        {&tape, tape.Leaf(BasicTensor<Real>::Scalar(static_cast<Real>(s.alpha)),
                          trainable)});
  }
  return b;
}

template <typename Real>
Var<Real> Forward(const BasicModel<Real>& model,
                  const ModelBinding<Real>& binding, Var<Real> x,
                  ForwardMode mode) {
  const ModelConfig& cfg = model.config;
  const Shape& xs = x.shape();
  if (xs.size() != 4 || xs[1] != cfg.input_shape[0] ||
      xs[2] != cfg.input_shape[1] || xs[3] != cfg.input_shape[2]) {
    throw DimensionError("model expects input [batch," +
                         ShapeToString(cfg.input_shape).substr(1) + ", got " +
                         ShapeToString(xs));
  }
  const bool quantized = mode == ForwardMode::kQuantized;
  const bool quantize_weights = quantized && cfg.quantize_weights;
  std::size_t next_param = 0;
  std::size_t next_alpha = 0;
  auto weight = [&]() {
    Var<Real> w = binding.params.at(next_param++);
    return quantize_weights ? FakeQuantizeWeights(w, cfg.weight_bits) : w;
  };
  auto bias = [&]() { return binding.params.at(next_param++); };

  Var<Real> h = x;
  for (const LayerSpec& spec : cfg.layers) {
    std::visit(
        Overloaded{
            [&](const layer::Conv& c) {
              Var<Real> w = weight();
              h = ops::AddChannelBias(ops::Conv2d(h, w, c.stride, c.pad), bias());
            },
            [&](const layer::Dense&) {
              Var<Real> w = weight();
              h = ops::Dense(h, w, bias());
            },
            [&](const layer::Pact&) {
              const PactLayerState& s = model.pact_states.at(next_alpha);
              h = Pact(h, binding.alphas.at(next_alpha), s.bits, quantized);
              ++next_alpha;
            },
            [&](const layer::Relu&) { h = ops::Relu(h); },
            [&](const layer::AvgPool& p) { h = ops::AvgPool2d(h, p.size); },
            [&](const layer::Flatten&) { h = ops::Flatten(h); },
        },
        spec);
  }
  return h;
}

template <typename Real>
BasicTensor<Real> Predict(const BasicModel<Real>& model,
                          const BasicTensor<Real>& x, ForwardMode mode) {
  Tape<Real> tape;
  ModelBinding<Real> b = Bind(model, tape, false);
  Var<Real> in = ops::Constant(tape, x);
  return Forward(model, b, in, mode).value();
}

#define SGT_INSTANTIATE_MODEL(Real)                                           \
  template struct BasicModel<Real>;                                           \
  template struct ModelBinding<Real>;                                         \
  template ModelBinding<Real> Bind(const BasicModel<Real>&, Tape<Real>&,      \
                                   bool);                                     \
  template Var<Real> Forward(const BasicModel<Real>&,                         \
                             const ModelBinding<Real>&, Var<Real>,            \
                             ForwardMode);                                    \
  template BasicTensor<Real> Predict(const BasicModel<Real>&,                 \
                                     const BasicTensor<Real>&, ForwardMode);

SGT_INSTANTIATE_MODEL(float)
SGT_INSTANTIATE_MODEL(double)

}  // namespace sgt
