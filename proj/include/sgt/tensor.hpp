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

#ifndef SGT_TENSOR_HPP_
#define SGT_TENSOR_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sgt/errors.hpp"

namespace sgt {

using Shape = std::vector<std::size_t>;

std::size_t NumElements(const Shape& shape);
std::string ShapeToString(const Shape& shape);

// Dense row-major n-dimensional array. Every dimension is >= 1 and
// size() == NumElements(shape()) always holds.
//
// The engine is written once over the element type: float is what training
// uses, double exists so finite-difference checks are not swamped by
// rounding noise.
template <typename Real>
class BasicTensor {
 public:
  using value_type = Real;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape, Real fill = Real{0})
      : shape_(std::move(shape)) {
    Validate(shape_);
    data_.assign(NumElements(shape_), fill);
  }

  BasicTensor(Shape shape, std::vector<Real> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    Validate(shape_);
    if (data_.size() != NumElements(shape_)) {
      throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                           " does not match shape " + ShapeToString(shape_));
    }
  }

  BasicTensor(Shape shape, std::initializer_list<Real> values)
      : BasicTensor(std::move(shape), std::vector<Real>(values)) {}

  static BasicTensor Scalar(Real v) { return BasicTensor(Shape{1}, {v}); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<Real> values() { return data_; }
  std::span<const Real> values() const { return data_; }
  Real* data() { return data_.data(); }
  const Real* data() const { return data_.data(); }
  const std::vector<Real>& storage() const { return data_; }

  Real& operator[](std::size_t i) { return data_[i]; }
  const Real& operator[](std::size_t i) const { return data_[i]; }

  // Same data viewed under a different shape with equal element count.
  BasicTensor Reshaped(Shape shape) const {
    if (NumElements(shape) != data_.size()) {
      throw DimensionError("cannot reshape " + ShapeToString(shape_) + " to " +
                           ShapeToString(shape));
    }
    return BasicTensor(std::move(shape), data_);
  }

  template <typename Other>
  BasicTensor<Other> Cast() const {
    std::vector<Other> out(data_.begin(), data_.end());
    return BasicTensor<Other>(shape_, std::move(out));
  }

  void Fill(Real v) { data_.assign(data_.size(), v); }

  friend bool operator==(const BasicTensor& a, const BasicTensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  static void Validate(const Shape& shape) {
    if (shape.empty()) throw DimensionError("tensor shape must have rank >= 1");
    for (std::size_t d : shape) {
      if (d == 0) {
        throw DimensionError("tensor dimensions must be positive, got " +
                             ShapeToString(shape));
      }
    }
  }

  Shape shape_;
  std::vector<Real> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

}  // namespace sgt

#endif  // SGT_TENSOR_HPP_
