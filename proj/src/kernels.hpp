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

#ifndef SGT_SRC_KERNELS_HPP_
#define SGT_SRC_KERNELS_HPP_

#include <Eigen/Core>
#include <cstddef>
#include <type_traits>

// Internal numeric kernels shared by the op implementations. Matrix products
// run through Eigen in double regardless of the tensor element type.
namespace sgt::detail {

using MatD =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Real>
MatD ToMat(const Real* p, Eigen::Index rows, Eigen::Index cols) {
  if constexpr (std::is_same_v<Real, double>) {
    return Eigen::Map<const MatD>(p, rows, cols);
  } else {
    using MatR =
        Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    return Eigen::Map<const MatR>(p, rows, cols).template cast<double>();
  }
}

// out (+)= m, rounding each element once.
template <typename Real>
void StoreMat(const MatD& m, Real* out, bool accumulate) {
  const Eigen::Index n = m.size();
  const double* src = m.data();
  if (accumulate) {
    for (Eigen::Index i = 0; i < n; ++i) {
      out[i] = static_cast<Real>(static_cast<double>(out[i]) + src[i]);
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) out[i] = static_cast<Real>(src[i]);
  }
}

struct ConvGeometry {
  std::size_t batch, in_c, in_h, in_w;
  std::size_t out_c, k_h, k_w;
  std::size_t stride, pad;
  std::size_t out_h, out_w;

  std::size_t patch() const { return in_c * k_h * k_w; }
  std::size_t plane() const { return out_h * out_w; }
};

// cols[(c,kh,kw), b*plane + oh*out_w + ow]; out-of-image taps read zero.
template <typename Real>
void Im2Col(const Real* x, const ConvGeometry& g, double* cols) {
  const std::size_t width = g.batch * g.plane();
  for (std::size_t c = 0; c < g.in_c; ++c) {
    for (std::size_t kh = 0; kh < g.k_h; ++kh) {
      for (std::size_t kw = 0; kw < g.k_w; ++kw) {
        double* row = cols + ((c * g.k_h + kh) * g.k_w + kw) * width;
        for (std::size_t b = 0; b < g.batch; ++b) {
          const Real* img = x + (b * g.in_c + c) * g.in_h * g.in_w;
          double* dst = row + b * g.plane();
          for (std::size_t oh = 0; oh < g.out_h; ++oh) {
            const std::ptrdiff_t ih =
                static_cast<std::ptrdiff_t>(oh * g.stride + kh) -
                static_cast<std::ptrdiff_t>(g.pad);
            for (std::size_t ow = 0; ow < g.out_w; ++ow) {
              const std::ptrdiff_t iw =
                  static_cast<std::ptrdiff_t>(ow * g.stride + kw) -
                  static_cast<std::ptrdiff_t>(g.pad);
              const bool inside = ih >= 0 && iw >= 0 &&
                                  ih < static_cast<std::ptrdiff_t>(g.in_h) &&
                                  iw < static_cast<std::ptrdiff_t>(g.in_w);
              dst[oh * g.out_w + ow] =
                  inside ? static_cast<double>(img[ih * g.in_w + iw]) : 0.0;
            }
          }
        }
      }
    }
  }
}

// Scatter-add of Im2Col's layout back into an image gradient (in double).
inline void Col2ImAdd(const double* cols, const ConvGeometry& g, double* dx) {
  const std::size_t width = g.batch * g.plane();
  for (std::size_t c = 0; c < g.in_c; ++c) {
    for (std::size_t kh = 0; kh < g.k_h; ++kh) {
      for (std::size_t kw = 0; kw < g.k_w; ++kw) {
        const double* row = cols + ((c * g.k_h + kh) * g.k_w + kw) * width;
        for (std::size_t b = 0; b < g.batch; ++b) {
          double* img = dx + (b * g.in_c + c) * g.in_h * g.in_w;
          const double* src = row + b * g.plane();
          for (std::size_t oh = 0; oh < g.out_h; ++oh) {
            const std::ptrdiff_t ih =
                static_cast<std::ptrdiff_t>(oh * g.stride + kh) -
                static_cast<std::ptrdiff_t>(g.pad);
            if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
            for (std::size_t ow = 0; ow < g.out_w; ++ow) {
              const std::ptrdiff_t iw =
                  static_cast<std::ptrdiff_t>(ow * g.stride + kw) -
                  static_cast<std::ptrdiff_t>(g.pad);
              if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(g.in_w)) continue;
              img[ih * g.in_w + iw] += src[oh * g.out_w + ow];
            }
          }
        }
      }
    }
  }
}

}  // namespace sgt::detail

#endif  // SGT_SRC_KERNELS_HPP_
