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

#include "sgt/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sgt/ops.hpp"

namespace sgt {

template <typename Real>
BasicTensor<Real> LogitGradient(Var<Real> x, Var<Real> logits,
                                std::span<const int> targets) {
  const Shape& ls = logits.shape();
  if (ls.size() != 2 || ls[0] != targets.size()) {
    throw DimensionError("saliency: logits " + ShapeToString(ls) + " vs " +
                         std::to_string(targets.size()) + " targets");
  }
  const std::size_t classes = ls[1];
  BasicTensor<Real> onehot(ls);
  for (std::size_t b = 0; b < targets.size(); ++b) {
    const int t = targets[b];
    if (t < 0 || static_cast<std::size_t>(t) >= classes) {
      throw ContractError("saliency: target class " + std::to_string(t) +
                          " outside [0, " + std::to_string(classes) + ")");
    }
    onehot[b * classes + static_cast<std::size_t>(t)] = Real{1};
  }
  if (!x.tape->requires_grad(x.id)) {
    throw ContractError("saliency: input node must be created with requires_grad");
  }
  Var<Real> picked = ops::Sum(ops::Mul(logits, ops::Constant(*x.tape, std::move(onehot))));
  const NodeId wrt[] = {x.id};
  Gradients<Real> g = Backward(picked, wrt);
  if (!g.contains(x.id)) return BasicTensor<Real>(x.shape());
  return g.at(x.id);
}

template <typename Real>
BasicTensor<Real> InputGradient(const LogitFn<Real>& model,
                                const BasicTensor<Real>& x,
                                std::span<const int> targets) {
  Tape<Real> tape;
  Var<Real> in = ops::Parameter(tape, x);
  Var<Real> logits = model(tape, in);
  return LogitGradient(in, logits, targets);
}

template <typename Real>
BasicTensor<Real> InputGradient(const BasicModel<Real>& model,
                                const BasicTensor<Real>& x,
                                std::span<const int> targets, ForwardMode mode) {
  Tape<Real> tape;
  ModelBinding<Real> binding = Bind(model, tape, false);
  Var<Real> in = ops::Parameter(tape, x);
  Var<Real> logits = Forward(model, binding, in, mode);
  return LogitGradient(in, logits, targets);
}

template <typename Real>
std::vector<std::size_t> RankFeatures(std::span<const Real> grad) {
  std::vector<std::size_t> order(grad.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(grad[a]) < std::abs(grad[b]);
  });
  return order;
}

template <typename Real>
void MaskFeatures(std::span<Real> sample, std::span<const std::size_t> indices,
                  Rng& rng) {
  if (sample.empty() || indices.empty()) return;
  const auto [lo_it, hi_it] = std::minmax_element(sample.begin(), sample.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  for (std::size_t idx : indices) {
    if (idx >= sample.size()) {
      throw ContractError("mask: feature index " + std::to_string(idx) +
                          " out of range");
    }
    double v = lo + (hi - lo) * Uniform01(rng);
    v = std::clamp(v, lo, hi);
    sample[idx] = static_cast<Real>(v);
  }
}

namespace {

void CheckK(std::size_t k, std::size_t n, std::size_t ranking) {
  if (k > n) {
    throw ContractError("mask: k = " + std::to_string(k) + " exceeds " +
                        std::to_string(n) + " features");
  }
  if (ranking != n) {
    throw DimensionError("mask: ranking has " + std::to_string(ranking) +
                         " entries for " + std::to_string(n) + " features");
  }
}

}  // namespace

template <typename Real>
std::vector<Real> MaskBottomK(std::span<const Real> sample,
                              std::span<const std::size_t> ranking,
                              std::size_t k, Rng& rng) {
  CheckK(k, sample.size(), ranking.size());
  std::vector<Real> out(sample.begin(), sample.end());
  MaskFeatures<Real>(out, ranking.first(k), rng);
  return out;
}

template <typename Real>
std::vector<Real> MaskTopK(std::span<const Real> sample,
                           std::span<const std::size_t> ranking, std::size_t k,
                           Rng& rng) {
  CheckK(k, sample.size(), ranking.size());
  std::vector<Real> out(sample.begin(), sample.end());
  MaskFeatures<Real>(out, ranking.last(k), rng);
  return out;
}

std::size_t MaskCount(double ratio, std::size_t n_features) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw ContractError("masking ratio must be in [0, 1]");
  }
  return static_cast<std::size_t>(std::round(ratio * static_cast<double>(n_features)));
}

template <typename Real>
GrayImage SaliencyImage(const BasicTensor<Real>& grad) {
  Shape s = grad.shape();
  if (s.size() == 4 && s[0] == 1) s.erase(s.begin());
  if (s.size() == 2) s.insert(s.begin(), 1);
  if (s.size() != 3) {
    throw DimensionError("saliency map needs a spatial gradient, got " +
                         ShapeToString(grad.shape()));
  }
  const std::size_t c = s[0], h = s[1], w = s[2];
  std::vector<double> mag(h * w, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < h * w; ++i) {
      mag[i] = std::max(mag[i], std::abs(static_cast<double>(grad[ch * h * w + i])));
    }
  }
  const auto [lo, hi] = std::minmax_element(mag.begin(), mag.end());
  const double min = *lo, range = *hi - *lo;
  GrayImage img{w, h, std::vector<unsigned char>(h * w, 0)};
  if (range > 0.0) {
    for (std::size_t i = 0; i < mag.size(); ++i) {
      img.pixels[i] = static_cast<unsigned char>(
          std::lround(255.0 * (mag[i] - min) / range));
    }
  }
  return img;
}

void WritePgm(const GrayImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

GrayImage ReadPgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  GrayImage img;
  int maxval = 0;
  in >> magic >> img.width >> img.height >> maxval;
  if (magic != "P5" || maxval != 255 || !in) {
    throw FormatError(path.string() + " is not an 8-bit binary PGM");
  }
  in.get();
  img.pixels.resize(img.width * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw LengthError(path.string() + " pixel data is truncated");
  }
  return img;
}

#define SGT_INSTANTIATE_SALIENCY(Real)                                        \
  template BasicTensor<Real> LogitGradient(Var<Real>, Var<Real>,              \
                                           std::span<const int>);             \
  template BasicTensor<Real> InputGradient(const LogitFn<Real>&,              \
                                           const BasicTensor<Real>&,          \
                                           std::span<const int>);             \
  template BasicTensor<Real> InputGradient(const BasicModel<Real>&,           \
                                           const BasicTensor<Real>&,          \
                                           std::span<const int>, ForwardMode);\
  template std::vector<std::size_t> RankFeatures(std::span<const Real>);      \
  template void MaskFeatures(std::span<Real>, std::span<const std::size_t>,   \
                             Rng&);                                           \
  template std::vector<Real> MaskBottomK(std::span<const Real>,               \
                                         std::span<const std::size_t>,        \
                                         std::size_t, Rng&);                  \
  template std::vector<Real> MaskTopK(std::span<const Real>,                  \
                                      std::span<const std::size_t>,           \
                                      std::size_t, Rng&);                     \
  template GrayImage SaliencyImage(const BasicTensor<Real>&);

SGT_INSTANTIATE_SALIENCY(float)
SGT_INSTANTIATE_SALIENCY(double)

}  // namespace sgt
