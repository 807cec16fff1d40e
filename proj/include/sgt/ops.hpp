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

#ifndef SGT_OPS_HPP_
#define SGT_OPS_HPP_

#include <cstddef>

#include "sgt/tape.hpp"
#include "sgt/tensor.hpp"

// Differentiable primitives. Each op computes its value eagerly, records a
// node on the input's tape and returns a handle to it. Reductions and matrix
// products accumulate in double and round once to the element type.
namespace sgt::ops {

template <typename Real>
Var<Real> Constant(Tape<Real>& tape, BasicTensor<Real> value) {
  return {&tape, tape.Leaf(std::move(value), false)};
}

template <typename Real>
Var<Real> Parameter(Tape<Real>& tape, BasicTensor<Real> value) {
  return {&tape, tape.Leaf(std::move(value), true)};
}

// x[batch,in] * w[in,out] + b[out]
template <typename Real>
Var<Real> Dense(Var<Real> x, Var<Real> w, Var<Real> b);

// Cross-correlation of x[batch,c_in,h,w] with kernel[c_out,c_in,kh,kw].
// Output spatial size is floor((h + 2*padding - kh) / stride) + 1.
template <typename Real>
Var<Real> Conv2d(Var<Real> x, Var<Real> kernel, std::size_t stride,
                 std::size_t padding);

// x[batch,c,h,w] + bias[c] broadcast over batch and space.
template <typename Real>
Var<Real> AddChannelBias(Var<Real> x, Var<Real> bias);

template <typename Real>
Var<Real> Relu(Var<Real> x);

// Non-overlapping size x size mean pooling over x[batch,c,h,w]; trailing rows
// and columns that do not fill a window are dropped.
template <typename Real>
Var<Real> AvgPool2d(Var<Real> x, std::size_t size);

// [batch, ...] -> [batch, prod(...)]
template <typename Real>
Var<Real> Flatten(Var<Real> x);

// Row-wise softmax of x[batch,classes].
template <typename Real>
Var<Real> Softmax(Var<Real> x);

// Natural log; every input element must be > 0.
template <typename Real>
Var<Real> Log(Var<Real> x);

template <typename Real>
Var<Real> Add(Var<Real> a, Var<Real> b);

template <typename Real>
Var<Real> Mul(Var<Real> a, Var<Real> b);

template <typename Real>
Var<Real> Scale(Var<Real> x, double factor);

// Scalar reductions; result shape is [1].
template <typename Real>
Var<Real> Sum(Var<Real> x);

template <typename Real>
Var<Real> Mean(Var<Real> x);

}  // namespace sgt::ops

#endif  // SGT_OPS_HPP_
