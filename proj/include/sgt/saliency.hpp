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

#ifndef SGT_SALIENCY_HPP_
#define SGT_SALIENCY_HPP_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "sgt/model.hpp"
#include "sgt/rng.hpp"
#include "sgt/tape.hpp"

namespace sgt {

// Gradient of sum_b logits[b, targets[b]] with respect to the input node x.
// Samples do not interact in the supported layers, so row b of the result is
// the saliency of sample b alone. Adds nodes to the tape; parameter leaves
// are not differentiated.
template <typename Real>
BasicTensor<Real> LogitGradient(Var<Real> x, Var<Real> logits,
                                std::span<const int> targets);

template <typename Real>
using LogitFn = std::function<Var<Real>(Tape<Real>&, Var<Real>)>;

// Saliency of an arbitrary differentiable model given as a logit builder.
template <typename Real>
BasicTensor<Real> InputGradient(const LogitFn<Real>& model,
                                const BasicTensor<Real>& x,
                                std::span<const int> targets);

template <typename Real>
BasicTensor<Real> InputGradient(const BasicModel<Real>& model,
                                const BasicTensor<Real>& x,
                                std::span<const int> targets, ForwardMode mode);

// Feature indices ordered by ascending |grad|, ties by ascending index.
template <typename Real>
std::vector<std::size_t> RankFeatures(std::span<const Real> grad);

// Replaces x[indices[i]] with draws from U[min(x), max(x)] taken over the
// unmasked sample. All other coordinates are left untouched.
template <typename Real>
void MaskFeatures(std::span<Real> sample, std::span<const std::size_t> indices,
                  Rng& rng);

// Copy of one sample with its k least important features (ranking[0..k)) masked.
template <typename Real>
std::vector<Real> MaskBottomK(std::span<const Real> sample,
                              std::span<const std::size_t> ranking,
                              std::size_t k, Rng& rng);

// Copy of one sample with its k most important features masked.
template <typename Real>
std::vector<Real> MaskTopK(std::span<const Real> sample,
                           std::span<const std::size_t> ranking, std::size_t k,
                           Rng& rng);

// round(ratio * n_features), ratio in [0, 1].
std::size_t MaskCount(double ratio, std::size_t n_features);

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<unsigned char> pixels;  // row-major
};

// |grad| maxed over channels, min-max scaled to 0..255 (a constant map is
// all zero). Accepts [h,w], [c,h,w] or [1,c,h,w].
template <typename Real>
GrayImage SaliencyImage(const BasicTensor<Real>& grad);

// Binary PGM: "P5\n<w> <h>\n255\n" then w*h bytes.
void WritePgm(const GrayImage& image, const std::filesystem::path& path);
GrayImage ReadPgm(const std::filesystem::path& path);

template <typename Real>
void ExportSaliencyMap(const BasicTensor<Real>& grad,
                       const std::filesystem::path& path) {
  WritePgm(SaliencyImage(grad), path);
}

}  // namespace sgt

#endif  // SGT_SALIENCY_HPP_
