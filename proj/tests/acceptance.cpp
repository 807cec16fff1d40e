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

// Acceptance run: one PASS/FAIL line per criterion. Criteria 5-8 share the
// same trained models. Pass criterion numbers as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "sgt/checkpoint.hpp"
#include "sgt/gradcheck.hpp"
#include "sgt/quantization.hpp"
#include "sgt/train.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#ifndef SGT_TEST_CIFAR_DIR
#define SGT_TEST_CIFAR_DIR ""
#endif

namespace sgt {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double Since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;
  void Require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void Note(const std::string& what) {
    detail += (detail.empty() ? "" : "; ") + what;
  }
};

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string Pct(double v) { return Fmt("%.2f%%", 100.0 * v); }

int Silent(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  return cli::Run(args, out, err);
}

// ---- criterion 1 ----------------------------------------------------------

Verdict GradientOracle() {
  Verdict v;
  const auto t0 = Clock::now();
  const std::vector<GradCheckReport> reports = RunGradientSuite(1);
  const double secs = Since(t0);
  std::size_t cnns = 0, checked = 0, skipped = 0;
  double worst = 0.0;
  for (const GradCheckReport& r : reports) {
    v.Require(r.passed(), r.name + " max rel err " + Fmt("%.3g", r.max_error) +
                              " at " + r.worst);
    if (r.name.rfind("small_cnn", 0) == 0) {
      ++cnns;
      const std::size_t params = std::stoul(r.name.substr(r.name.find('(') + 1));
      v.Require(params <= 50000, r.name + " exceeds 50k params");
    }
    checked += r.checked;
    skipped += r.skipped;
    worst = std::max(worst, r.max_error);
  }
  v.Require(cnns == 3, "expected 3 SmallCNN instances");
  v.Require(secs < 120.0, "runtime " + Fmt("%.1fs", secs) + " >= 120s");
  v.Note(std::to_string(reports.size()) + " cases, " + std::to_string(checked) +
         " coordinates checked, " + std::to_string(skipped) +
         " kink coordinates skipped, max rel err " + Fmt("%.3g", worst) +
         " (tol 1e-4), " + Fmt("%.1fs", secs));
  return v;
}

// ---- criterion 2 ----------------------------------------------------------

Tensor Uniform(Shape shape, std::uint64_t seed, float lo, float hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> d(lo, hi);
  Tensor t(std::move(shape));
  for (float& x : t.values()) x = d(rng);
  return t;
}

std::size_t Distinct(const Tensor& t) {
  return std::set<float>(t.values().begin(), t.values().end()).size();
}

Verdict QuantizerExactness() {
  Verdict v;
  const auto t0 = Clock::now();
  auto near = [&](double got, double want, const std::string& what) {
    v.Require(std::abs(got - want) <= 1e-6, what + " = " + Fmt("%.9g", got));
  };
  near(PactForward(Tensor::Scalar(0.3f), 1.0, 2)[0], 1.0 / 3.0, "pact(0.3, a=1, k=2)");
  near(PactForward(Tensor::Scalar(-0.5f), 1.0, 4)[0], 0.0, "pact(-0.5)");
  near(PactForward(Tensor::Scalar(2.0f), 1.0, 4)[0], 1.0, "pact(2, a=1, k=4)");
  const Tensor w({4}, {0.0f, 0.4f, 0.6f, 1.0f});
  const Tensor q1 = QuantizeWeights(w, DeriveWeightQuant(w, 1));
  near(q1[1], 0.0, "w1bit(0.4)");
  near(q1[2], 1.0, "w1bit(0.6)");
  const Tensor zeros({8}, 0.0f);
  v.Require(QuantizeWeights(zeros, DeriveWeightQuant(zeros, 8)) == zeros, "zeros stay zero");

  std::size_t tensors = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (int k = 1; k <= 8; ++k) {
      const double alpha = 0.3 * seed + 0.1 * k;
      const Tensor x = Uniform({64, 64}, seed * 100 + k, -1.0f, 3.0f * alpha);
      const Tensor y = PactForward(x, alpha, k);
      v.Require(Distinct(y) <= (std::size_t{1} << k), "pact distinct values");
      v.Require(PactForward(y, alpha, k) == y, "pact idempotence");
      const Tensor wt = Uniform({64, 64}, seed * 100 + k + 50, -0.7f, 0.4f);
      const WeightQuantConfig cfg = DeriveWeightQuant(wt, k);
      const Tensor qw = QuantizeWeights(wt, cfg);
      v.Require(Distinct(qw) <= (std::size_t{1} << k), "weight distinct values");
      v.Require(QuantizeWeights(qw, cfg) == qw, "weight idempotence");
      tensors += 2;
    }
  }
  v.Note("worked examples within 1e-6; " + std::to_string(tensors) +
         " random tensors (k=1..8, 5 seeds) with <= 2^k values and bitwise "
         "idempotence; " + Fmt("%.2fs", Since(t0)));
  return v;
}

// ---- criterion 3 ----------------------------------------------------------

Verdict SteContract() {
  Verdict v;
  std::size_t coords = 0, pass_region = 0, saturated = 0, below = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double alpha = 0.5 + 0.6 * seed;
    Tensor x = Uniform({16, 97}, seed, -2.0f, 2.0f * static_cast<float>(alpha));
    x[0] = 0.0f;
    x[1] = static_cast<float>(alpha);
    x[2] = -0.0f;
    x[3] = std::nextafter(static_cast<float>(alpha), 0.0f);
    const Tensor up = Uniform({16, 97}, seed + 1000, -5.0f, 5.0f);
    const PactGradient<float> g = PactBackward(up, x, alpha);
    double dalpha = 0.0;
    bool exact = true;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double xi = x[i];
      float want = 0.0f;
      if (xi >= 0.0 && xi < alpha) {
        want = up[i];
        ++pass_region;
      } else if (xi >= alpha) {
        dalpha += up[i];
        ++saturated;
      } else {
        ++below;
      }
      exact = exact && g.dx[i] == want;
      ++coords;
    }
    v.Require(exact, "dx mismatch at seed " + std::to_string(seed));
    v.Require(g.dalpha == dalpha, "dalpha " + Fmt("%.17g", g.dalpha) + " vs " +
                                      Fmt("%.17g", dalpha) + " at seed " +
                                      std::to_string(seed));
  }
  v.Note(std::to_string(coords) + " coordinates over 5 seeds (" +
         std::to_string(pass_region) + " pass-through, " + std::to_string(saturated) +
         " saturated, " + std::to_string(below) + " below zero), exact equality");
  return v;
}

// ---- data -------------------------------------------------------------------

struct Mnist {
  bool available = false;
  fs::path dir;
  DatasetSplits data;  // normalised
};

Mnist& MnistData() {
  static Mnist m = [] {
    Mnist out;
    out.dir = testing::MnistDir();
    if (!out.dir.empty()) {
      out.data = LoadStandard("mnist", out.dir);
      out.available = true;
    }
    return out;
  }();
  return m;
}

Verdict NeedMnist() {
  Verdict v;
  v.Require(false, "MNIST files not found (set SGT_MNIST_DIR)");
  return v;
}

// ---- criterion 4 ----------------------------------------------------------

Verdict DegenerateMode() {
  const Mnist& m = MnistData();
  if (!m.available) return NeedMnist();
  Verdict v;
  const auto t0 = Clock::now();
  TrainConfig cfg = MnistDefaults();
  cfg.mode = TrainMode::kBaselineCe;
  cfg.epochs = 3;
  cfg.seed = 1;
  const Dataset train = Subset(m.data.train, 1000, cfg.seed);
  const Model init = BuildModel(ModelConfigFor(train.sample_shape(), cfg), cfg.seed);
  Model reference = init;
  const TrainResult r = Train(init, train, m.data.test, cfg);
  const auto expected = testing::ReferenceCeTraining(
      reference, train, m.data.test, cfg.lr, cfg.epochs, cfg.batch_size, cfg.seed);
  for (std::size_t e = 0; e < expected.size(); ++e) {
    const std::string ep = "epoch " + std::to_string(e + 1);
    v.Require(r.history[e].loss.cross_entropy == expected[e].mean_ce, ep + " mean CE");
    v.Require(r.history[e].test_accuracy == expected[e].test_accuracy, ep + " accuracy");
  }
  bool params_equal = true;
  for (std::size_t i = 0; i < reference.params.size(); ++i) {
    params_equal = params_equal && r.model.params[i].value == reference.params[i].value;
  }
  v.Require(params_equal, "final parameters differ");
  v.Note("3 epochs on a 1k subset: per-epoch mean CE, test accuracy and final "
         "parameters bitwise equal to the plain CE loop (final CE " +
         Fmt("%.6f", expected.back().mean_ce) + ", acc " +
         Pct(expected.back().test_accuracy) + "), " + Fmt("%.1fs", Since(t0)));
  return v;
}

// ---- criteria 5-8: shared desk-scale runs ----------------------------------

struct Run {
  TrainMode mode;
  std::uint64_t seed = 0;
  TrainResult result;
  double seconds = 0.0;
  std::vector<SweepPoint> sweep;
  double final_accuracy() const { return result.history.back().test_accuracy; }
};

const std::vector<double> kSweepPercentages{0, 25, 50, 75};

class DeskRuns {
 public:
  Run& Get(TrainMode mode, std::uint64_t seed) {
    const auto key = std::make_pair(static_cast<int>(mode), seed);
    auto it = runs_.find(key);
    if (it != runs_.end()) return it->second;
    const Mnist& m = MnistData();
    TrainConfig cfg = MnistDefaults();
    cfg.mode = mode;
    cfg.epochs = 10;
    cfg.seed = seed;
    const Dataset train = Subset(m.data.train, 10000, seed);
    const Model init = BuildModel(ModelConfigFor(train.sample_shape(), cfg), seed);
    std::fprintf(stderr, "training %s seed %llu (10k subset, 10 epochs)\n",
                 std::string(ToString(mode)).c_str(),
                 static_cast<unsigned long long>(seed));
    Run run;
    run.mode = mode;
    run.seed = seed;
    const auto t0 = Clock::now();
    run.result = Train(init, train, m.data.test, cfg, [](const MetricsRecord& r) {
      std::fprintf(stderr, "  epoch %d ce %.4f kl %.4f acc %.4f", r.epoch,
                   r.loss.cross_entropy, r.loss.kl_term, r.test_accuracy);
      for (float a : r.alphas) std::fprintf(stderr, " alpha %.4f", a);
      std::fprintf(stderr, " %.1fs\n", r.seconds);
    });
    run.seconds = Since(t0);
    return runs_.emplace(key, std::move(run)).first->second;
  }

  Run& Swept(TrainMode mode, std::uint64_t seed) {
    Run& r = Get(mode, seed);
    if (r.sweep.empty()) {
      const auto t0 = Clock::now();
      r.sweep = MaskingSweep(r.result.model, MnistData().data.test, kSweepPercentages,
                             seed, ForwardModeFor(mode));
      std::fprintf(stderr, "sweep %s seed %llu:", std::string(ToString(mode)).c_str(),
                   static_cast<unsigned long long>(seed));
      for (const SweepPoint& p : r.sweep) {
        std::fprintf(stderr, " %g%%:%.4f", p.percentage, p.accuracy);
      }
      std::fprintf(stderr, " (%.1fs)\n", Since(t0));
    }
    return r;
  }

 private:
  std::map<std::pair<int, std::uint64_t>, Run> runs_;
};

DeskRuns& Runs() {
  static DeskRuns runs;
  return runs;
}

Verdict DeskAccuracy() {
  if (!MnistData().available) return NeedMnist();
  Verdict v;
  const Run& q = Runs().Get(TrainMode::kSgtPact, 1);
  const Run& f = Runs().Get(TrainMode::kSgtFloat, 1);
  const double acc = q.final_accuracy();
  const double gap = std::abs(acc - f.final_accuracy());
  v.Require(acc >= 0.97, "sgt_pact test accuracy " + Pct(acc) + " < 97.00%");
  v.Require(q.seconds <= 1200.0, "runtime " + Fmt("%.0fs", q.seconds) + " > 1200s");
  v.Require(gap <= 0.01, "gap to float sgt " + Fmt("%.2f pp", 100 * gap) + " > 1.0 pp");
  v.Note("seed 1: sgt_pact k=8 " + Pct(acc) + " in " + Fmt("%.0fs", q.seconds) +
         "; float sgt " + Pct(f.final_accuracy()) + " (gap " +
         Fmt("%.2f pp", 100 * gap) + ")");
  return v;
}

Verdict SgtVersusPact() {
  if (!MnistData().available) return NeedMnist();
  Verdict v;
  double sgt = 0.0, pact = 0.0;
  std::string per_seed;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    const double a = Runs().Get(TrainMode::kSgtPact, s).final_accuracy();
    const double b = Runs().Get(TrainMode::kPactOnly, s).final_accuracy();
    sgt += a / 3;
    pact += b / 3;
    per_seed += (per_seed.empty() ? "" : ", ") + std::string("seed ") +
                std::to_string(s) + " " + Pct(a) + " vs " + Pct(b);
  }
  v.Require(sgt >= pact - 0.002, "mean sgt_pact " + Pct(sgt) + " < pact_only " +
                                     Pct(pact) + " - 0.2 pp");
  v.Note("mean sgt_pact " + Pct(sgt) + " vs pact_only " + Pct(pact) + " (" +
         per_seed + ")");
  return v;
}

Verdict MaskingTrend() {
  if (!MnistData().available) return NeedMnist();
  Verdict v;
  std::map<double, double> sgt, pact;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    for (TrainMode mode : {TrainMode::kSgtPact, TrainMode::kPactOnly}) {
      const Run& r = Runs().Swept(mode, s);
      auto& mean = mode == TrainMode::kSgtPact ? sgt : pact;
      for (std::size_t i = 0; i < r.sweep.size(); ++i) {
        mean[r.sweep[i].percentage] += r.sweep[i].accuracy / 3;
        if (i > 0) {
          v.Require(r.sweep[i].accuracy <= r.sweep[i - 1].accuracy + 0.02,
                    std::string(ToString(mode)) + " seed " + std::to_string(s) +
                        " rises from " + Fmt("%g%%", r.sweep[i - 1].percentage) +
                        " to " + Fmt("%g%%", r.sweep[i].percentage));
        }
      }
    }
  }
  for (double p : {50.0, 75.0}) {
    v.Require(sgt[p] < pact[p], Fmt("at %g%%: ", p) + "sgt_pact " + Pct(sgt[p]) +
                                    " not below pact_only " + Pct(pact[p]));
  }
  std::string curve;
  for (double p : kSweepPercentages) {
    curve += (curve.empty() ? "" : ", ") + Fmt("%g%%: ", p) + Pct(sgt[p]) + " vs " +
             Pct(pact[p]);
  }
  v.Note("mean top-salient masking accuracy sgt_pact vs pact_only: " + curve);
  return v;
}

Verdict AlphaTrajectories() {
  if (!MnistData().available) return NeedMnist();
  Verdict v;
  std::size_t checked = 0;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    for (TrainMode mode : {TrainMode::kSgtPact, TrainMode::kPactOnly}) {
      const Run& r = Runs().Get(mode, s);
      const std::string name = std::string(ToString(mode)) + " seed " + std::to_string(s);
      v.Require(r.result.history.size() == 10, name + " epoch count");
      std::ostringstream csv;
      WriteMetricsCsv(csv, r.result.history, false);
      v.Require(csv.str().find("alpha_1") != std::string::npos, name + " CSV alpha columns");
      for (const MetricsRecord& rec : r.result.history) {
        v.Require(rec.alphas.size() == r.result.model.pact_states.size() &&
                      !rec.alphas.empty(),
                  name + " alpha count");
        for (float a : rec.alphas) {
          v.Require(std::isfinite(a) && a >= kAlphaFloor, name + " alpha out of range");
          ++checked;
        }
      }
    }
  }
  const Run& c5 = Runs().Get(TrainMode::kSgtPact, 1);
  std::string finals;
  for (float a : c5.result.history.back().alphas) {
    v.Require(std::abs(a - kDefaultAlpha) > 1e-3, "alpha did not move from 10");
    finals += (finals.empty() ? "" : ", ") + Fmt("%.4f", a);
  }
  v.Note(std::to_string(checked) + " per-epoch alpha values finite and >= 1e-3 "
         "across 6 runs; criterion-5 final alphas " + finals);
  return v;
}

// ---- criterion 9 ----------------------------------------------------------

Verdict Determinism() {
  const Mnist& m = MnistData();
  if (!m.available) return NeedMnist();
  Verdict v;
  testing::TempDir dir("acceptance");
  auto train = [&](const std::string& name) {
    std::ostringstream out, err;
    const int code = cli::Run({"train", "--dataset", "mnist", "--data-dir", m.dir.string(),
                               "--subset", "1000", "--test-subset", "2000", "--epochs",
                               "2", "--seed", "4", "--out", (dir / name).string()},
                              out, err);
    v.Require(code == 0, "train exit " + std::to_string(code) + ": " + err.str());
    return out.str();
  };
  const std::string a = train("a");
  train("b");
  const auto csv_a = testing::ReadBytes(dir / "a" / "metrics.csv");
  const auto csv_b = testing::ReadBytes(dir / "b" / "metrics.csv");
  v.Require(!csv_a.empty() && csv_a == csv_b, "metrics CSVs differ");

  std::ostringstream out, err;
  const int code = cli::Run({"eval", "--checkpoint", (dir / "a" / "model.ckpt").string(),
                             "--dataset", "mnist", "--data-dir", m.dir.string(),
                             "--subset", "2000", "--seed", "4"},
                            out, err);
  const auto field = [](const std::string& text, const std::string& key) {
    const auto at = text.find(key + "=");
    if (at == std::string::npos) return std::string("missing");
    const auto start = at + key.size() + 1;
    return text.substr(start, text.find_first_of(" \n", start) - start);
  };
  v.Require(code == 0, "eval exit " + std::to_string(code) + ": " + err.str());
  v.Require(field(out.str(), "accuracy") == field(a, "test_acc"),
            "CLI eval accuracy " + field(out.str(), "accuracy") + " vs train " +
                field(a, "test_acc"));

  // Library round trip on the criterion-5 model: save -> load -> evaluate must
  // reproduce the final test accuracy of the training run bitwise.
  const Run& c5 = Runs().Get(TrainMode::kSgtPact, 1);
  SaveCheckpoint(c5.result.model, dir / "c5.ckpt");
  const Model reloaded = LoadCheckpoint(dir / "c5.ckpt");
  const double acc = EvaluateAccuracy(reloaded, m.data.test, ForwardMode::kQuantized);
  v.Require(acc == c5.final_accuracy(), "reloaded accuracy " + Fmt("%.17g", acc) +
                                            " vs trained " +
                                            Fmt("%.17g", c5.final_accuracy()));
  v.Note("two CLI runs (1k subset, 2 epochs, sgt_pact) wrote identical metrics.csv (" +
         std::to_string(csv_a.size()) + " bytes); CLI eval of the saved checkpoint "
         "reproduces test_acc=" + field(a, "test_acc") +
         "; criterion-5 model save->load->eval gives " + Pct(acc) +
         " bitwise equal to its final epoch");
  return v;
}

// ---- criterion 10 ---------------------------------------------------------

Verdict FormatFidelity() {
  Verdict v;
  testing::TempDir dir("acceptance_fmt");
  const Mnist& m = MnistData();
  if (m.available) {
    const DatasetSplits raw = LoadMnist(m.dir);
    v.Require(raw.train.size() == 60000 && raw.test.size() == 10000,
              "MNIST counts " + std::to_string(raw.train.size()) + "/" +
                  std::to_string(raw.test.size()));
    v.Note("MNIST " + std::to_string(raw.train.size()) + "/" +
           std::to_string(raw.test.size()));
    for (const char* corrupt : {"magic", "length"}) {
      const fs::path copy = dir / (std::string("mnist_") + corrupt);
      fs::create_directories(copy);
      for (const auto& e : fs::directory_iterator(m.dir)) {
        if (e.path().filename().string().find("idx") != std::string::npos) {
          fs::copy_file(e.path(), copy / e.path().filename());
        }
      }
      const fs::path victim = copy / "train-images-idx3-ubyte";
      auto bytes = testing::ReadBytes(victim);
      if (std::string(corrupt) == "magic") {
        bytes[3] = 0x02;
      } else {
        bytes.resize(bytes.size() - 784 * 3 - 17);
      }
      testing::WriteBytes(victim, bytes);
      const int code = Silent({"train", "--dataset", "mnist", "--data-dir", copy.string(),
                               "--out", (dir / "o").string()});
      v.Require(code == cli::kExitData, std::string("MNIST bad ") + corrupt + " exit " +
                                            std::to_string(code));
    }
    v.Note("corrupted MNIST magic/length -> exit 3");
  } else {
    v.Require(false, "MNIST files not found (set SGT_MNIST_DIR)");
  }

  fs::path cifar = SGT_TEST_CIFAR_DIR;
  if (const char* env = std::getenv("SGT_CIFAR_DIR"); env && *env) cifar = env;
  const bool real = !cifar.empty() && fs::exists(cifar / "data_batch_1.bin");
  if (!real) {
    cifar = dir / "cifar_synthetic";
    testing::WriteSyntheticCifar(cifar, 10000, 10000, 1);
  }
  const DatasetSplits c = LoadCifar10(cifar);
  v.Require(c.train.size() == 50000 && c.test.size() == 10000,
            "CIFAR counts " + std::to_string(c.train.size()) + "/" +
                std::to_string(c.test.size()));
  v.Note(std::string(real ? "CIFAR-10 " : "CIFAR-10 layout (synthetic files; real data "
                                          "not present) ") +
         std::to_string(c.train.size()) + "/" + std::to_string(c.test.size()));
  for (const char* corrupt : {"label", "length"}) {
    const fs::path copy = dir / (std::string("cifar_") + corrupt);
    fs::create_directories(copy);
    testing::WriteSyntheticCifar(copy, 50, 50, 2);
    const fs::path victim = copy / "data_batch_2.bin";
    auto bytes = testing::ReadBytes(victim);
    if (std::string(corrupt) == "label") {
      bytes[3073 * 7] = 200;
    } else {
      bytes.resize(bytes.size() - 1000);
    }
    testing::WriteBytes(victim, bytes);
    const int code = Silent({"train", "--dataset", "cifar10", "--data-dir", copy.string(),
                             "--out", (dir / "o").string()});
    v.Require(code == cli::kExitData, std::string("CIFAR bad ") + corrupt + " exit " +
                                          std::to_string(code));
  }
  v.Note("corrupted CIFAR label/length -> exit 3");
  const int missing = Silent({"train", "--dataset", "mnist", "--data-dir",
                              (dir / "nowhere").string()});
  v.Require(missing == cli::kExitUsage, "missing data dir exit " + std::to_string(missing));
  return v;
}

}  // namespace
}  // namespace sgt

int main(int argc, char** argv) {
  using namespace sgt;
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"gradient oracle suite", GradientOracle},
      {"quantizer exactness", QuantizerExactness},
      {"STE contract", SteContract},
      {"baseline_ce equals plain CE loop", DegenerateMode},
      {"desk-scale MNIST accuracy", DeskAccuracy},
      {"sgt_pact vs pact_only (3 seeds)", SgtVersusPact},
      {"top-salient masking trend", MaskingTrend},
      {"alpha trajectories", AlphaTrajectories},
      {"determinism and persistence", Determinism},
      {"format fidelity", FormatFidelity},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.count(n)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.Require(false, std::string("exception: ") + e.what());
    }
    if (!v.pass) ++failed;
    std::printf("CRITERION %d %s: %s -- %s\n", n, v.pass ? "PASS" : "FAIL",
                criteria[i].first.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
