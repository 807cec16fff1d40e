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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "sgt/errors.hpp"
#include "sgt/ops.hpp"
#include "sgt/quantization.hpp"

namespace sgt {
namespace {

Tensor Random(Shape shape, std::uint64_t seed, float lo, float hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> d(lo, hi);
  Tensor t(std::move(shape));
  for (float& v : t.values()) v = d(rng);
  return t;
}

std::size_t Distinct(const Tensor& t) {
  return std::set<float>(t.values().begin(), t.values().end()).size();
}

TEST(RoundHalfAway, Ties) {
  EXPECT_EQ(RoundHalfAway(0.5), 1.0);
  EXPECT_EQ(RoundHalfAway(1.5), 2.0);
  EXPECT_EQ(RoundHalfAway(2.5), 3.0);
  EXPECT_EQ(RoundHalfAway(-0.5), -1.0);
  EXPECT_EQ(RoundHalfAway(-2.5), -3.0);
  EXPECT_EQ(RoundHalfAway(0.49999999), 0.0);
}

TEST(PactForward, WorkedExamples) {
  EXPECT_EQ(PactForward(Tensor::Scalar(-0.5f), 1.0, 4)[0], 0.0f);
  EXPECT_EQ(PactForward(Tensor::Scalar(-0.5f), 7.0, 2)[0], 0.0f);
  EXPECT_EQ(PactForward(Tensor::Scalar(2.0f), 1.0, 4)[0], 1.0f);
  EXPECT_NEAR(PactForward(Tensor::Scalar(0.3f), 1.0, 2)[0], 1.0 / 3.0, 1e-6);
}

TEST(PactForward, ClipOnlyModeDoesNotRound) {
  const Tensor x({4}, {-1.0f, 0.3f, 0.999f, 5.0f});
  EXPECT_EQ(PactForward(x, 1.0, 2, false), Tensor({4}, {0.0f, 0.3f, 0.999f, 1.0f}));
}

TEST(PactForward, RejectsBadAlphaAndBits) {
  const Tensor x({2}, 0.5f);
  EXPECT_THROW(PactForward(x, 0.0, 8), ContractError);
  EXPECT_THROW(PactForward(x, -1.0, 8), ContractError);
  EXPECT_THROW(PactForward(x, 1.0, 0), ContractError);
}

TEST(PactForward, PropertiesOnRandomTensors) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (int bits : {1, 2, 3, 4, 8}) {
      const double alpha = 0.5 + seed;
      const Tensor x = Random({4000}, seed * 31 + bits, -2.0f, 2.0f * alpha);
      const Tensor y = PactForward(x, alpha, bits);
      const double levels = std::pow(2.0, bits) - 1;
      EXPECT_LE(Distinct(y), static_cast<std::size_t>(levels + 1));
      EXPECT_EQ(PactForward(y, alpha, bits), y) << "idempotence";
      for (std::size_t i = 0; i < x.size(); ++i) {
        ASSERT_GE(y[i], 0.0f);
        ASSERT_LE(y[i], static_cast<float>(alpha));
        const double clipped = std::clamp(static_cast<double>(x[i]), 0.0, alpha);
        ASSERT_LE(std::abs(y[i] - clipped), alpha / (2 * levels) + 1e-6);
      }
      // Monotone non-decreasing in x.
      std::vector<std::size_t> order(x.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
      for (std::size_t i = 1; i < order.size(); ++i) {
        ASSERT_LE(y[order[i - 1]], y[order[i]]);
      }
    }
  }
}

TEST(PactBackward, WorkedExamples) {
  const Tensor up({3}, 1.0f);
  const auto mixed = PactBackward(up, Tensor({3}, {-1.0f, 0.5f, 3.0f}), 1.0);
  EXPECT_EQ(mixed.dx, Tensor({3}, {0, 1, 0}));
  EXPECT_EQ(mixed.dalpha, 1.0);

  const Tensor u({3}, {0.25f, -2.0f, 7.0f});
  const auto interior = PactBackward(u, Tensor({3}, {0.1f, 0.5f, 0.9f}), 1.0);
  EXPECT_EQ(interior.dx, u);
  EXPECT_EQ(interior.dalpha, 0.0);

  const auto saturated = PactBackward(u, Tensor({3}, {1.0f, 2.0f, 30.0f}), 1.0);
  EXPECT_EQ(saturated.dx, Tensor({3}, 0.0f));
  EXPECT_EQ(saturated.dalpha, 0.25 - 2.0 + 7.0);

  EXPECT_THROW(PactBackward(u, Tensor({2}), 1.0), DimensionError);
}

// Brute-force enumeration of the STE contract, case by case, against the
// tape op as well as the free function.
TEST(PactBackward, SteContractByEnumeration) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double alpha = 0.75 * seed;
    Tensor x = Random({3, 257}, seed, -1.0f, 2.0f * static_cast<float>(alpha));
    // Plant exact boundary values.
    x[0] = 0.0f;
    x[1] = static_cast<float>(alpha);
    x[2] = -0.0f;
    const Tensor up = Random({3, 257}, seed + 100, -3.0f, 3.0f);
    const auto r = PactBackward(up, x, alpha);
    double expect_dalpha = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const bool pass = x[i] >= 0.0f && static_cast<double>(x[i]) < alpha;
      ASSERT_EQ(r.dx[i], pass ? up[i] : 0.0f) << "coordinate " << i;
      if (static_cast<double>(x[i]) >= alpha) expect_dalpha += up[i];
    }
    EXPECT_EQ(r.dalpha, expect_dalpha);

    for (bool quantize : {true, false}) {
      Tape<float> tape;
      auto xv = ops::Parameter(tape, x);
      auto av = ops::Parameter(tape, Tensor::Scalar(static_cast<float>(alpha)));
      auto y = Pact(xv, av, 4, quantize);
      const auto g = Backward(ops::Sum(ops::Mul(y, ops::Constant(tape, up))));
      EXPECT_EQ(g.at(xv), r.dx);
      EXPECT_EQ(g.at(av)[0], static_cast<float>(expect_dalpha));
    }
  }
}

TEST(PactBackward, DxZeroExactlyWhereForwardIsFlat) {
  const Tensor x = Random({1000}, 9, -2.0f, 4.0f);
  const auto r = PactBackward(Tensor({1000}, 1.0f), x, 2.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool flat = x[i] < 0.0f || x[i] >= 2.0f;
    EXPECT_EQ(r.dx[i] == 0.0f, flat);
  }
}

TEST(WeightQuant, OneBitExamples) {
  const Tensor w({4}, {0.0f, 0.4f, 0.6f, 1.0f});
  const WeightQuantConfig cfg = DeriveWeightQuant(w, 1);
  EXPECT_EQ(cfg.levels(), 2);
  EXPECT_DOUBLE_EQ(cfg.step, 1.0);
  EXPECT_EQ(cfg.zero_point, 0);
  EXPECT_EQ(QuantizeWeights(w, cfg), Tensor({4}, {0.0f, 0.0f, 1.0f, 1.0f}));
}

TEST(WeightQuant, GridValuesUnchangedAndZerosStayZero) {
  const Tensor grid({5}, {-1.0f, -0.5f, 0.0f, 0.5f, 1.0f});
  const WeightQuantConfig cfg = DeriveWeightQuant(grid, 2);  // step 2/3
  const Tensor once = QuantizeWeights(grid, cfg);
  EXPECT_EQ(QuantizeWeights(once, DeriveWeightQuant(once, 2)), once);

  const Tensor zeros({6}, 0.0f);
  const WeightQuantConfig zc = DeriveWeightQuant(zeros, 8);
  EXPECT_TRUE(zc.degenerate());
  EXPECT_EQ(QuantizeWeights(zeros, zc), zeros);
  const Tensor consts({3}, -0.7f);
  EXPECT_EQ(QuantizeWeights(consts, DeriveWeightQuant(consts, 4)), consts);
}

TEST(WeightQuant, SignedRangeKeepsOffset) {
  // step 4/3, zero point round(3 / (4/3)) = 2, so the grid is
  // (q - 2) * 4/3 for q in 0..3. Dropping the zero point on the way back
  // would shift every output up by 8/3.
  const Tensor w({3}, {-3.0f, 0.1f, 1.0f});
  const WeightQuantConfig cfg = DeriveWeightQuant(w, 2);
  EXPECT_DOUBLE_EQ(cfg.step, 4.0 / 3.0);
  EXPECT_EQ(cfg.zero_point, 2);
  const Tensor q = QuantizeWeights(w, cfg);
  EXPECT_NEAR(q[0], -8.0 / 3.0, 1e-6);
  EXPECT_EQ(q[1], 0.0f);
  EXPECT_NEAR(q[2], 4.0 / 3.0, 1e-6);
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_LE(std::abs(q[i] - w[i]), cfg.step + 1e-6);
  }
}

TEST(WeightQuant, PropertiesOnRandomTensors) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (int bits : {1, 2, 4, 8}) {
      const Tensor w = Random({2000}, seed * 7 + bits, -0.8f, 0.3f);
      const WeightQuantConfig cfg = DeriveWeightQuant(w, bits);
      EXPECT_EQ(cfg.levels(), std::int64_t{1} << bits);
      EXPECT_GT(cfg.step, 0.0);
      const Tensor q = QuantizeWeights(w, cfg);
      EXPECT_LE(Distinct(q), static_cast<std::size_t>(cfg.levels()));
      EXPECT_EQ(QuantizeWeights(q, cfg), q) << "idempotent under the same grid";
    }
  }
}

TEST(WeightQuant, SteMasksRangeEndpoints) {
  Tape<float> tape;
  const Tensor wv({5}, {-1.0f, -0.2f, 0.0f, 0.7f, 2.0f});
  auto w = ops::Parameter(tape, wv);
  const auto g = Backward(ops::Sum(FakeQuantizeWeights(w, 3)));
  EXPECT_EQ(g.at(w), Tensor({5}, {0, 1, 1, 1, 0}));

  Tape<float> flat;
  auto c = ops::Parameter(flat, Tensor({3}, 0.5f));
  const auto gc = Backward(ops::Sum(FakeQuantizeWeights(c, 3)));
  EXPECT_EQ(gc.at(c), Tensor({3}, 1.0f));
}

TEST(UpdateAlpha, Examples) {
  PactLayerState s;
  s.alpha = 10.0f;
  EXPECT_EQ(UpdateAlpha(s, 0.0, 0.1, 0.0).alpha, 10.0f);
  EXPECT_EQ(UpdateAlpha(s, 5.0, 0.0, 0.0002).alpha, 10.0f);
  EXPECT_NEAR(UpdateAlpha(s, 1.0, 0.1, 0.0).alpha, 9.9f, 1e-6);
  // Penalty term: 10 - 0.1 * (0 + 2 * 0.5 * 10) = 9
  EXPECT_NEAR(UpdateAlpha(s, 0.0, 0.1, 0.5).alpha, 9.0f, 1e-6);
  // Floor.
  EXPECT_EQ(UpdateAlpha(s, 1e6, 1.0, 0.0).alpha, kAlphaFloor);
  EXPECT_THROW(UpdateAlpha(s, 0.0, -0.1, 0.0), ContractError);
  EXPECT_EQ(UpdateAlpha(s, 0.0, 0.1, 0.0).bits, s.bits);
}

}  // namespace
}  // namespace sgt
