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

#include "sgt/ops.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "kernels.hpp"

namespace sgt::ops {

namespace {

using detail::ConvGeometry;
using detail::MatD;
using detail::StoreMat;
using detail::ToMat;

void RequireSameShape(const char* op, const Shape& a, const Shape& b) {
  if (a != b) {
    throw DimensionError(std::string(op) + ": shapes " + ShapeToString(a) +
                         " and " + ShapeToString(b) + " differ");
  }
}

void RequireRank(const char* op, const Shape& s, std::size_t rank) {
  if (s.size() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " +
                         std::to_string(rank) + ", got " + ShapeToString(s));
  }
}

template <typename Real>
Var<Real> Emit(Var<Real> like, std::string_view op, BasicTensor<Real> value,
               std::vector<NodeId> inputs, BackwardFn<Real> fn) {
  return {like.tape, like.tape->Record(op, std::move(value), std::move(inputs),
                                       std::move(fn))};
}

template <typename Real>
void RequireSameTape(Var<Real> a, Var<Real> b) {
  if (a.tape != b.tape) throw ContractError("operands live on different tapes");
}

}  // namespace

template <typename Real>
Var<Real> Dense(Var<Real> x, Var<Real> w, Var<Real> b) {
  RequireSameTape(x, w);
  RequireSameTape(x, b);
  const Shape& xs = x.shape();
  const Shape& ws = w.shape();
  const Shape& bs = b.shape();
  if (xs.size() != 2 || ws.size() != 2 || bs.size() != 1 || xs[1] != ws[0] ||
      bs[0] != ws[1]) {
    throw DimensionError("dense: input " + ShapeToString(xs) +
                         " does not conform to weight " + ShapeToString(ws) +
                         " and bias " + ShapeToString(bs));
  }
  const auto batch = static_cast<Eigen::Index>(xs[0]);
  const auto in = static_cast<Eigen::Index>(xs[1]);
  const auto out = static_cast<Eigen::Index>(ws[1]);

  MatD y = ToMat(x.value().data(), batch, in) * ToMat(w.value().data(), in, out);
  const MatD bias = ToMat(b.value().data(), 1, out);
  y.rowwise() += bias.row(0);
  BasicTensor<Real> value(Shape{xs[0], ws[1]});
  StoreMat(y, value.data(), false);

  return Emit<Real>(
      x, "dense", std::move(value), {x.id, w.id, b.id},
      [batch, in, out](const BackwardArgs<Real>& a) {
        const MatD g = ToMat(a.grad_output.data(), batch, out);
        if (a.grad_inputs[0]) {
          const MatD wm = ToMat(a.tape.value(a.inputs[1]).data(), in, out);
          StoreMat<Real>(g * wm.transpose(), a.grad_inputs[0]->data(), true);
        }
        if (a.grad_inputs[1]) {
          const MatD xm = ToMat(a.tape.value(a.inputs[0]).data(), batch, in);
          StoreMat<Real>(xm.transpose() * g, a.grad_inputs[1]->data(), true);
        }
        if (a.grad_inputs[2]) {
          StoreMat<Real>(g.colwise().sum(), a.grad_inputs[2]->data(), true);
        }
      });
}

template <typename Real>
Var<Real> Conv2d(Var<Real> x, Var<Real> kernel, std::size_t stride,
                 std::size_t padding) {
  RequireSameTape(x, kernel);
  const Shape& xs = x.shape();
  const Shape& ks = kernel.shape();
  RequireRank("conv2d input", xs, 4);
  RequireRank("conv2d kernel", ks, 4);
  if (ks[1] != xs[1]) {
    throw DimensionError("conv2d: input " + ShapeToString(xs) + " has " +
                         std::to_string(xs[1]) + " channels but kernel " +
                         ShapeToString(ks) + " expects " +
                         std::to_string(ks[1]));
  }
  if (stride == 0) throw ContractError("conv2d: stride must be >= 1");
  if (ks[2] > xs[2] + 2 * padding || ks[3] > xs[3] + 2 * padding) {
    throw DimensionError("conv2d: kernel " + ShapeToString(ks) +
                         " larger than padded input " + ShapeToString(xs));
  }
  ConvGeometry g{};
  g.batch = xs[0];
  g.in_c = xs[1];
  g.in_h = xs[2];
  g.in_w = xs[3];
  g.out_c = ks[0];
  g.k_h = ks[2];
  g.k_w = ks[3];
  g.stride = stride;
  g.pad = padding;
  g.out_h = (g.in_h + 2 * padding - g.k_h) / stride + 1;
  g.out_w = (g.in_w + 2 * padding - g.k_w) / stride + 1;

  const auto patch = static_cast<Eigen::Index>(g.patch());
  const auto width = static_cast<Eigen::Index>(g.batch * g.plane());
  const auto oc = static_cast<Eigen::Index>(g.out_c);

  MatD cols(patch, width);
  detail::Im2Col(x.value().data(), g, cols.data());
  const MatD y = ToMat(kernel.value().data(), oc, patch) * cols;

  BasicTensor<Real> value(Shape{g.batch, g.out_c, g.out_h, g.out_w});
  Real* dst = value.data();
  const std::size_t plane = g.plane();
  for (std::size_t b = 0; b < g.batch; ++b) {
    for (std::size_t c = 0; c < g.out_c; ++c) {
      const double* src = y.data() + c * width + b * plane;
      Real* o = dst + (b * g.out_c + c) * plane;
      for (std::size_t p = 0; p < plane; ++p) o[p] = static_cast<Real>(src[p]);
    }
  }

  return Emit<Real>(
      x, "conv2d", std::move(value), {x.id, kernel.id},
      [g, patch, width, oc](const BackwardArgs<Real>& a) {
        const std::size_t plane = g.plane();
        MatD grad(oc, width);
        const Real* go = a.grad_output.data();
        for (std::size_t b = 0; b < g.batch; ++b) {
          for (std::size_t c = 0; c < g.out_c; ++c) {
            const Real* src = go + (b * g.out_c + c) * plane;
            double* d = grad.data() + c * width + b * plane;
            for (std::size_t p = 0; p < plane; ++p) d[p] = src[p];
          }
        }
        if (a.grad_inputs[1]) {
          MatD cols(patch, width);
          detail::Im2Col(a.tape.value(a.inputs[0]).data(), g, cols.data());
          StoreMat<Real>(grad * cols.transpose(), a.grad_inputs[1]->data(),
                         true);
        }
        if (a.grad_inputs[0]) {
          const MatD km = ToMat(a.tape.value(a.inputs[1]).data(), oc, patch);
          const MatD dcols = km.transpose() * grad;
          std::vector<double> dx(g.batch * g.in_c * g.in_h * g.in_w, 0.0);
          detail::Col2ImAdd(dcols.data(), g, dx.data());
          Real* gi = a.grad_inputs[0]->data();
          for (std::size_t i = 0; i < dx.size(); ++i) {
            gi[i] = static_cast<Real>(static_cast<double>(gi[i]) + dx[i]);
          }
        }
      });
}

template <typename Real>
Var<Real> AddChannelBias(Var<Real> x, Var<Real> bias) {
  RequireSameTape(x, bias);
  const Shape& xs = x.shape();
  if (xs.size() < 2 || bias.shape().size() != 1 || bias.shape()[0] != xs[1]) {
    throw DimensionError("add_channel_bias: input " + ShapeToString(xs) +
                         " and bias " + ShapeToString(bias.shape()));
  }
  const std::size_t batch = xs[0];
  const std::size_t channels = xs[1];
  const std::size_t inner = x.value().size() / (batch * channels);
  BasicTensor<Real> value = x.value();
  const Real* bv = bias.value().data();
  Real* v = value.data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < channels; ++c) {
      Real* row = v + (b * channels + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) row[i] += bv[c];
    }
  }
  return Emit<Real>(
      x, "add_channel_bias", std::move(value), {x.id, bias.id},
      [batch, channels, inner](const BackwardArgs<Real>& a) {
        const Real* g = a.grad_output.data();
        if (a.grad_inputs[0]) {
          Real* gx = a.grad_inputs[0]->data();
          for (std::size_t i = 0; i < a.grad_output.size(); ++i) gx[i] += g[i];
        }
        if (a.grad_inputs[1]) {
          Real* gb = a.grad_inputs[1]->data();
          for (std::size_t c = 0; c < channels; ++c) {
            double acc = 0.0;
            for (std::size_t b = 0; b < batch; ++b) {
              const Real* row = g + (b * channels + c) * inner;
              for (std::size_t i = 0; i < inner; ++i) acc += row[i];
            }
            gb[c] = static_cast<Real>(static_cast<double>(gb[c]) + acc);
          }
        }
      });
}

template <typename Real>
Var<Real> Relu(Var<Real> x) {
  BasicTensor<Real> value = x.value();
  for (Real& v : value.values()) v = v > Real{0} ? v : Real{0};
  if (x.tape->region_logging()) {
    std::vector<std::uint8_t> codes(value.size());
    const Real* xv = x.value().data();
    for (std::size_t i = 0; i < codes.size(); ++i) codes[i] = xv[i] > Real{0};
    x.tape->LogRegions(codes);
  }
  return Emit<Real>(x, "relu", std::move(value), {x.id},
                    [](const BackwardArgs<Real>& a) {
                      const Real* xv = a.tape.value(a.inputs[0]).data();
                      const Real* g = a.grad_output.data();
                      Real* gx = a.grad_inputs[0]->data();
                      for (std::size_t i = 0; i < a.grad_output.size(); ++i) {
                        if (xv[i] > Real{0}) gx[i] += g[i];
                      }
                    });
}

template <typename Real>
Var<Real> AvgPool2d(Var<Real> x, std::size_t size) {
  const Shape& xs = x.shape();
  RequireRank("avgpool2d", xs, 4);
  if (size == 0) throw ContractError("avgpool2d: window size must be >= 1");
  if (xs[2] < size || xs[3] < size) {
    throw DimensionError("avgpool2d: window " + std::to_string(size) +
                         " larger than input " + ShapeToString(xs));
  }
  const std::size_t planes = xs[0] * xs[1];
  const std::size_t h = xs[2], w = xs[3];
  const std::size_t oh = h / size, ow = w / size;
  const double inv = 1.0 / static_cast<double>(size * size);
  BasicTensor<Real> value(Shape{xs[0], xs[1], oh, ow});
  const Real* in = x.value().data();
  Real* out = value.data();
  for (std::size_t p = 0; p < planes; ++p) {
    const Real* src = in + p * h * w;
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        double acc = 0.0;
        for (std::size_t di = 0; di < size; ++di) {
          for (std::size_t dj = 0; dj < size; ++dj) {
            acc += src[(i * size + di) * w + j * size + dj];
          }
        }
        out[(p * oh + i) * ow + j] = static_cast<Real>(acc * inv);
      }
    }
  }
  return Emit<Real>(
      x, "avgpool2d", std::move(value), {x.id},
      [planes, h, w, oh, ow, size, inv](const BackwardArgs<Real>& a) {
        const Real* g = a.grad_output.data();
        Real* gx = a.grad_inputs[0]->data();
        for (std::size_t p = 0; p < planes; ++p) {
          for (std::size_t i = 0; i < oh; ++i) {
            for (std::size_t j = 0; j < ow; ++j) {
              const double share = g[(p * oh + i) * ow + j] * inv;
              for (std::size_t di = 0; di < size; ++di) {
                for (std::size_t dj = 0; dj < size; ++dj) {
                  Real& dst = gx[p * h * w + (i * size + di) * w + j * size + dj];
                  dst = static_cast<Real>(static_cast<double>(dst) + share);
                }
              }
            }
          }
        }
      });
}

template <typename Real>
Var<Real> Flatten(Var<Real> x) {
  const Shape& xs = x.shape();
  const std::size_t batch = xs[0];
  BasicTensor<Real> value = x.value().Reshaped(Shape{batch, x.value().size() / batch});
  return Emit<Real>(x, "flatten", std::move(value), {x.id},
                    [](const BackwardArgs<Real>& a) {
                      const Real* g = a.grad_output.data();
                      Real* gx = a.grad_inputs[0]->data();
                      for (std::size_t i = 0; i < a.grad_output.size(); ++i) {
                        gx[i] += g[i];
                      }
                    });
}

template <typename Real>
Var<Real> Softmax(Var<Real> x) {
  const Shape& xs = x.shape();
  RequireRank("softmax", xs, 2);
  const std::size_t rows = xs[0], cols = xs[1];
  BasicTensor<Real> value(xs);
  const Real* in = x.value().data();
  Real* out = value.data();
  std::vector<double> e(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* row = in + r * cols;
    double mx = row[0];
    for (std::size_t c = 1; c < cols; ++c) mx = std::max<double>(mx, row[c]);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      e[c] = std::exp(static_cast<double>(row[c]) - mx);
      total += e[c];
    }
    for (std::size_t c = 0; c < cols; ++c) {
      out[r * cols + c] = static_cast<Real>(e[c] / total);
    }
  }
  return Emit<Real>(x, "softmax", std::move(value), {x.id},
                    [rows, cols](const BackwardArgs<Real>& a) {
                      const Real* y = a.output.data();
                      const Real* g = a.grad_output.data();
                      Real* gx = a.grad_inputs[0]->data();
                      for (std::size_t r = 0; r < rows; ++r) {
                        double dot = 0.0;
                        for (std::size_t c = 0; c < cols; ++c) {
                          dot += static_cast<double>(y[r * cols + c]) *
                                 g[r * cols + c];
                        }
                        for (std::size_t c = 0; c < cols; ++c) {
                          const std::size_t i = r * cols + c;
                          gx[i] = static_cast<Real>(
                              static_cast<double>(gx[i]) +
                              static_cast<double>(y[i]) * (g[i] - dot));
                        }
                      }
                    });
}

template <typename Real>
Var<Real> Log(Var<Real> x) {
  BasicTensor<Real> value = x.value();
  for (Real& v : value.values()) {
    if (!(v > Real{0})) {
      throw ContractError("log: input must be strictly positive");
    }
    v = static_cast<Real>(std::log(static_cast<double>(v)));
  }
  return Emit<Real>(x, "log", std::move(value), {x.id},
                    [](const BackwardArgs<Real>& a) {
                      const Real* xv = a.tape.value(a.inputs[0]).data();
                      const Real* g = a.grad_output.data();
                      Real* gx = a.grad_inputs[0]->data();
                      for (std::size_t i = 0; i < a.grad_output.size(); ++i) {
                        gx[i] = static_cast<Real>(
                            gx[i] + static_cast<double>(g[i]) / xv[i]);
                      }
                    });
}

template <typename Real>
Var<Real> Add(Var<Real> a, Var<Real> b) {
  RequireSameTape(a, b);
  RequireSameShape("add", a.shape(), b.shape());
  BasicTensor<Real> value = a.value();
  const Real* bv = b.value().data();
  for (std::size_t i = 0; i < value.size(); ++i) value[i] += bv[i];
  return Emit<Real>(a, "add", std::move(value), {a.id, b.id},
                    [](const BackwardArgs<Real>& args) {
                      const Real* g = args.grad_output.data();
                      for (BasicTensor<Real>* gi : args.grad_inputs) {
                        if (!gi) continue;
                        Real* d = gi->data();
                        for (std::size_t i = 0; i < gi->size(); ++i) d[i] += g[i];
                      }
                    });
}

template <typename Real>
Var<Real> Mul(Var<Real> a, Var<Real> b) {
  RequireSameTape(a, b);
  RequireSameShape("mul", a.shape(), b.shape());
  BasicTensor<Real> value = a.value();
  const Real* bv = b.value().data();
  for (std::size_t i = 0; i < value.size(); ++i) value[i] *= bv[i];
  return Emit<Real>(a, "mul", std::move(value), {a.id, b.id},
                    [](const BackwardArgs<Real>& args) {
                      const Real* g = args.grad_output.data();
                      const Real* av = args.tape.value(args.inputs[0]).data();
                      const Real* bv = args.tape.value(args.inputs[1]).data();
                      if (BasicTensor<Real>* ga = args.grad_inputs[0]) {
                        for (std::size_t i = 0; i < ga->size(); ++i) {
                          (*ga)[i] += g[i] * bv[i];
                        }
                      }
                      if (BasicTensor<Real>* gb = args.grad_inputs[1]) {
                        for (std::size_t i = 0; i < gb->size(); ++i) {
                          (*gb)[i] += g[i] * av[i];
                        }
                      }
                    });
}

template <typename Real>
Var<Real> Scale(Var<Real> x, double factor) {
  BasicTensor<Real> value = x.value();
  for (Real& v : value.values()) {
    v = static_cast<Real>(static_cast<double>(v) * factor);
  }
  return Emit<Real>(x, "scale", std::move(value), {x.id},
                    [factor](const BackwardArgs<Real>& a) {
                      const Real* g = a.grad_output.data();
                      Real* gx = a.grad_inputs[0]->data();
                      for (std::size_t i = 0; i < a.grad_output.size(); ++i) {
                        gx[i] = static_cast<Real>(gx[i] + g[i] * factor);
                      }
                    });
}

template <typename Real>
Var<Real> Sum(Var<Real> x) {
  double acc = 0.0;
  for (Real v : x.value().values()) acc += v;
  return Emit<Real>(x, "sum", BasicTensor<Real>::Scalar(static_cast<Real>(acc)),
                    {x.id}, [](const BackwardArgs<Real>& a) {
                      const Real g = a.grad_output[0];
                      for (Real& d : a.grad_inputs[0]->values()) d += g;
                    });
}

template <typename Real>
Var<Real> Mean(Var<Real> x) {
  double acc = 0.0;
  for (Real v : x.value().values()) acc += v;
  const double n = static_cast<double>(x.value().size());
  return Emit<Real>(x, "mean",
                    BasicTensor<Real>::Scalar(static_cast<Real>(acc / n)),
                    {x.id}, [n](const BackwardArgs<Real>& a) {
                      const double g = a.grad_output[0] / n;
                      for (Real& d : a.grad_inputs[0]->values()) {
                        d = static_cast<Real>(d + g);
                      }
                    });
}

#define SGT_INSTANTIATE_OPS(Real)                                            \
  template Var<Real> Dense(Var<Real>, Var<Real>, Var<Real>);                 \
  template Var<Real> Conv2d(Var<Real>, Var<Real>, std::size_t, std::size_t); \
  template Var<Real> AddChannelBias(Var<Real>, Var<Real>);                   \
  template Var<Real> Relu(Var<Real>);                                        \
  template Var<Real> AvgPool2d(Var<Real>, std::size_t);                      \
  template Var<Real> Flatten(Var<Real>);                                     \
  template Var<Real> Softmax(Var<Real>);                                     \
  template Var<Real> Log(Var<Real>);                                         \
  template Var<Real> Add(Var<Real>, Var<Real>);                              \
  template Var<Real> Mul(Var<Real>, Var<Real>);                              \
  template Var<Real> Scale(Var<Real>, double);                               \
  template Var<Real> Sum(Var<Real>);                                         \
  template Var<Real> Mean(Var<Real>);

SGT_INSTANTIATE_OPS(float)
SGT_INSTANTIATE_OPS(double)

}  // namespace sgt::ops
