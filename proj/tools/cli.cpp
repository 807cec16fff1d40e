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

#include "cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "sgt/checkpoint.hpp"
#include "sgt/errors.hpp"
#include "sgt/gradcheck.hpp"
#include "sgt/saliency.hpp"

namespace sgt::cli {

namespace fs = std::filesystem;

namespace {

// Shortest text that parses back to the same double.
std::string Exact(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitCommas(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) out.push_back(Trim(item));
  return out;
}

std::vector<double> ParsePercentages(const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : SplitCommas(text)) {
    double v = 0.0;
    const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
    if (r.ec != std::errc() || r.ptr != item.data() + item.size()) {
      throw ConfigError("bad percentage '" + item + "'");
    }
    if (!(v >= 0.0 && v <= 100.0)) {
      throw ConfigError("percentage " + item + " outside [0, 100]");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("no percentages given");
  return out;
}

std::vector<std::size_t> ParseIndices(const std::string& text) {
  std::vector<std::size_t> out;
  for (const std::string& item : SplitCommas(text)) {
    std::size_t v = 0;
    const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
    if (r.ec != std::errc() || r.ptr != item.data() + item.size()) {
      throw ConfigError("bad sample index '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("no sample indices given");
  return out;
}

void RequireDataDir(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw ConfigError("data directory '" + dir + "' does not exist");
  }
}

Dataset PickSplit(Dataset split, std::size_t subset, std::uint64_t seed) {
  return subset == 0 ? split : Subset(split, subset, seed);
}

ForwardMode NaturalMode(const Model& model) {
  return model.config.activation_bits > 0 || model.config.quantize_weights
             ? ForwardMode::kQuantized
             : ForwardMode::kFloat;
}

void RequireCompatible(const Model& model, const Dataset& data) {
  if (model.config.input_shape != data.sample_shape()) {
    throw ConfigError("checkpoint expects inputs " +
                      ShapeToString(model.config.input_shape) + " but " +
                      data.name + " samples are " +
                      ShapeToString(data.sample_shape()));
  }
}

std::ofstream OpenOut(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::string Summary(
    const std::vector<std::pair<std::string, std::string>>& fields) {
  std::string line;
  for (const auto& [k, v] : fields) {
    if (!line.empty()) line += ' ';
    line += k + '=' + v;
  }
  return line;
}

// ---- commands ------------------------------------------------------------

struct TrainFlags {
  std::string dataset;
  std::string data_dir;
  std::string mode = "sgt_pact";
  int epochs = 0;
  double lr = 0.0;
  std::size_t batch_size = 0;
  int act_bits = 0;
  int weight_bits = 0;
  double mask_ratio = 0.0;
  double lambda = 0.0;
  double lambda_alpha = 0.0;
  std::uint64_t seed = 0;
  std::size_t subset = 0;
  std::size_t test_subset = 0;
  std::string out = "run";
  std::string config;
  bool record_time = false;
};

RunManifest ResolveTrain(const TrainFlags& f, const CLI::App& cmd) {
  RunManifest m;
  m.dataset = f.dataset;
  m.data_dir = f.data_dir;
  m.out_dir = f.out;
  m.subset = f.subset;
  m.test_subset = f.test_subset;
  if (f.dataset == "mnist") {
    m.config = MnistDefaults();
  } else if (f.dataset == "cifar10") {
    m.config = CifarDefaults();
  } else {
    throw ConfigError("unknown dataset '" + f.dataset + "'");
  }
  auto given = [&](const char* name) { return cmd.count(name) > 0; };
  TrainConfig& c = m.config;
  c.mode = ParseTrainMode(f.mode);
  if (given("--epochs")) c.epochs = f.epochs;
  if (given("--lr")) c.lr = f.lr;
  if (given("--batch-size")) c.batch_size = f.batch_size;
  if (given("--act-bits")) c.activation_bits = f.act_bits;
  if (given("--weight-bits")) c.weight_bits = f.weight_bits;
  if (given("--mask-ratio")) c.masking_ratio = f.mask_ratio;
  if (given("--lambda")) c.lambda = f.lambda;
  if (given("--lambda-alpha")) c.lambda_alpha = f.lambda_alpha;
  c.seed = f.seed;
  c.Validate();
  return m;
}

int CmdTrain(const TrainFlags& f, const CLI::App& cmd, std::ostream& out,
             std::ostream& err) {
  const RunManifest manifest = ResolveTrain(f, cmd);
  RequireDataDir(f.data_dir);
  const DatasetSplits data = LoadStandard(f.dataset, f.data_dir);
  const Dataset train = PickSplit(data.train, f.subset, f.seed);
  const Dataset test = PickSplit(data.test, f.test_subset, f.seed);
  const TrainConfig& cfg = manifest.config;

  const fs::path dir = f.out;
  fs::create_directories(dir);
  const Model initial =
      BuildModel(ModelConfigFor(train.sample_shape(), cfg), cfg.seed);
  {
    std::ofstream mf = OpenOut(dir / "manifest.json");
    mf << manifest.ToJson() << '\n';
  }

  const TrainResult result =
      Train(initial, train, test, cfg, [&](const MetricsRecord& r) {
        err << "epoch " << r.epoch << " ce=" << r.loss.cross_entropy
            << " kl=" << r.loss.kl_term << " total=" << r.loss.total
            << " test_acc=" << r.test_accuracy;
        for (std::size_t j = 0; j < r.alphas.size(); ++j) {
          err << " alpha_" << j << '=' << r.alphas[j];
        }
        err << '\n';
      });

  {
    std::ofstream csv = OpenOut(dir / "metrics.csv");
    WriteMetricsCsv(csv, result.history, f.record_time);
    if (!csv) throw IoError("cannot write " + (dir / "metrics.csv").string());
  }
  WriteMetricsPlotScript(dir / "metrics.gp", "metrics.csv",
                         result.model.pact_states.size());
  SaveCheckpoint(result.model, dir / "model.ckpt");

  const MetricsRecord& last = result.history.back();
  std::vector<std::pair<std::string, std::string>> fields{
      {"command", "train"},
      {"dataset", f.dataset},
      {"mode", std::string(ToString(cfg.mode))},
      {"epochs", std::to_string(cfg.epochs)},
      {"train_samples", std::to_string(train.size())},
      {"test_samples", std::to_string(test.size())},
      {"test_acc", Exact(last.test_accuracy)},
      {"total_loss", Exact(last.loss.total)}};
  for (std::size_t j = 0; j < last.alphas.size(); ++j) {
    fields.push_back({"alpha_" + std::to_string(j), Exact(last.alphas[j])});
  }
  fields.push_back({"hash", manifest.ContentHash()});
  fields.push_back({"out", dir.string()});
  out << Summary(fields) << '\n';
  return kExitOk;
}

struct EvalFlags {
  std::string checkpoint;
  std::string dataset;
  std::string data_dir;
  std::size_t subset = 0;
  std::uint64_t seed = 0;
  bool float_mode = false;
};

struct Loaded {
  Model model;
  Dataset test;
  ForwardMode mode;
};

Loaded LoadForEval(const EvalFlags& f) {
  RequireDataDir(f.data_dir);
  Model model = LoadCheckpoint(f.checkpoint);
  DatasetSplits data = LoadStandard(f.dataset, f.data_dir);
  Dataset test = PickSplit(std::move(data.test), f.subset, f.seed);
  RequireCompatible(model, test);
  const ForwardMode mode = f.float_mode ? ForwardMode::kFloat : NaturalMode(model);
  return {std::move(model), std::move(test), mode};
}

const char* ModeName(ForwardMode m) {
  return m == ForwardMode::kQuantized ? "quantized" : "float";
}

int CmdEval(const EvalFlags& f, std::ostream& out) {
  const Loaded l = LoadForEval(f);
  const double acc = EvaluateAccuracy(l.model, l.test, l.mode);
  out << Summary({{"command", "eval"},
                  {"dataset", f.dataset},
                  {"forward", ModeName(l.mode)},
                  {"samples", std::to_string(l.test.size())},
                  {"accuracy", Exact(acc)}})
      << '\n';
  return kExitOk;
}

int CmdSweep(const EvalFlags& f, const std::string& percentages,
             const std::string& out_dir, std::ostream& out) {
  const std::vector<double> ps = ParsePercentages(percentages);
  const Loaded l = LoadForEval(f);
  const std::vector<SweepPoint> points =
      MaskingSweep(l.model, l.test, ps, f.seed, l.mode);
  const fs::path dir = out_dir;
  fs::create_directories(dir);
  {
    std::ofstream csv = OpenOut(dir / "sweep.csv");
    WriteSweepCsv(csv, points);
  }
  WriteSweepPlotScript(dir / "sweep.gp", "sweep.csv");
  std::string pct, acc;
  for (const SweepPoint& p : points) {
    pct += (pct.empty() ? "" : ",") + Exact(p.percentage);
    acc += (acc.empty() ? "" : ",") + Exact(p.accuracy);
  }
  out << Summary({{"command", "sweep"},
                  {"forward", ModeName(l.mode)},
                  {"samples", std::to_string(l.test.size())},
                  {"mask_pct", pct},
                  {"accuracy", acc},
                  {"out", dir.string()}})
      << '\n';
  return kExitOk;
}

int CmdSaliency(const EvalFlags& f, const std::string& indices,
                const std::string& target, const std::string& out_dir,
                std::ostream& out) {
  const std::vector<std::size_t> idx = ParseIndices(indices);
  if (target != "label" && target != "predicted") {
    throw ConfigError("--target must be label or predicted");
  }
  const Loaded l = LoadForEval(f);
  const fs::path dir = out_dir;
  fs::create_directories(dir);
  std::size_t written = 0;
  for (std::size_t i : idx) {
    if (i >= l.test.size()) {
      throw ConfigError("sample index " + std::to_string(i) + " outside [0, " +
                        std::to_string(l.test.size()) + ")");
    }
    const std::size_t rows[] = {i};
    const Batch one = MakeBatch(l.test, rows);
    std::vector<int> t = one.y;
    if (target == "predicted") {
      const Tensor logits = Predict(l.model, one.x, l.mode);
      t[0] = static_cast<int>(ArgMax(logits.values()));
    }
    const Tensor grad = InputGradient(l.model, one.x, t, l.mode);
    ExportSaliencyMap(grad, dir / ("saliency_" + std::to_string(i) + ".pgm"));
    // The raw input next to it, for side-by-side viewing.
    const Dataset raw = Denormalize(
        Dataset{l.test.name, one.x, one.y, l.test.normalization});
    Tensor pixels = raw.images;
    for (float& v : pixels.values()) v = std::clamp(v, 0.0f, 1.0f);
    GrayImage img = SaliencyImage(pixels);
    WritePgm(img, dir / ("input_" + std::to_string(i) + ".pgm"));
    ++written;
  }
  out << Summary({{"command", "saliency"},
                  {"forward", ModeName(l.mode)},
                  {"maps", std::to_string(written)},
                  {"out", dir.string()}})
      << '\n';
  return kExitOk;
}

int CmdGradcheck(std::uint64_t seed, double eps, double tol, std::ostream& out,
                 std::ostream& err) {
  GradCheckOptions opt;
  opt.eps = eps;
  opt.tolerance = tol;
  std::size_t failed = 0, checked = 0, skipped = 0;
  double worst = 0.0;
  for (const GradCheckReport& r : RunGradientSuite(seed, opt)) {
    err << (r.passed() ? "ok   " : "FAIL ") << r.name << " checked=" << r.checked
        << " skipped=" << r.skipped << " max_rel_err=" << r.max_error << " ("
        << r.worst << ")\n";
    failed += r.passed() ? 0 : 1;
    checked += r.checked;
    skipped += r.skipped;
    worst = std::max(worst, r.max_error);
  }
  out << Summary({{"command", "gradcheck"},
                  {"status", failed == 0 ? "ok" : "fail"},
                  {"failed", std::to_string(failed)},
                  {"checked", std::to_string(checked)},
                  {"skipped", std::to_string(skipped)},
                  {"max_rel_err", Exact(worst)}})
      << '\n';
  return failed == 0 ? kExitOk : kExitNumerical;
}

// Turns config-file entries into "--key=value" tokens for every key the
// command line does not already set.
std::vector<std::string> MergeConfig(const std::vector<std::string>& args,
                                     const CLI::App& cmd) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::vector<std::string> merged = args;
  for (const auto& [key, value] : ReadConfigFile(path)) {
    const std::string flag = "--" + key;
    if (key == "config") throw ConfigError(path + ": config files do not nest");
    bool known = false;
    for (const CLI::Option* o : cmd.get_options()) {
      if (o->check_lname(key)) known = true;
    }
    if (!known) throw ConfigError(path + ": unknown key '" + key + "'");
    bool on_command_line = false;
    for (const std::string& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) on_command_line = true;
    }
    if (!on_command_line) merged.push_back(flag + "=" + value);
  }
  return merged;
}

void AddEvalFlags(CLI::App* cmd, EvalFlags& f) {
  cmd->add_option("--checkpoint", f.checkpoint, "Checkpoint written by train")
      ->required();
  cmd->add_option("--dataset", f.dataset, "mnist or cifar10")->required();
  cmd->add_option("--data-dir", f.data_dir, "Directory with the dataset files")
      ->required();
  cmd->add_option("--subset", f.subset,
                  "Stratified test subset size (0 = full test split)");
  cmd->add_option("--seed", f.seed, "Seed for subset selection and masking");
  cmd->add_flag("--float", f.float_mode,
                "Run PACT layers as plain clips with float weights");
}

}  // namespace

std::string RunManifest::CanonicalText() const {
  const TrainConfig& c = config;
  std::ostringstream s;
  s << "dataset = " << dataset << '\n'
    << "mode = " << ToString(c.mode) << '\n'
    << "lr = " << Exact(c.lr) << '\n'
    << "epochs = " << c.epochs << '\n'
    << "batch-size = " << c.batch_size << '\n'
    << "act-bits = " << c.activation_bits << '\n'
    << "weight-bits = " << c.weight_bits << '\n'
    << "mask-ratio = " << Exact(c.masking_ratio) << '\n'
    << "lambda = " << Exact(c.lambda) << '\n'
    << "lambda-alpha = " << Exact(c.lambda_alpha) << '\n'
    << "seed = " << c.seed << '\n'
    << "subset = " << subset << '\n'
    << "test-subset = " << test_subset << '\n';
  return s.str();
}

std::string RunManifest::ContentHash() const {
  const std::string text = CanonicalText();
  const std::string blob = "blob " + std::to_string(text.size()) + '\0' + text;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) !=
      1) {
    throw Error("sha1 digest failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string RunManifest::ToJson() const {
  const TrainConfig& c = config;
  nlohmann::ordered_json j;
  j["config"] = {{"dataset", dataset},
                 {"mode", std::string(ToString(c.mode))},
                 {"lr", c.lr},
                 {"epochs", c.epochs},
                 {"batch_size", c.batch_size},
                 {"activation_bits", c.activation_bits},
                 {"weight_bits", c.weight_bits},
                 {"masking_ratio", c.masking_ratio},
                 {"lambda", c.lambda},
                 {"lambda_alpha", c.lambda_alpha},
                 {"seed", c.seed},
                 {"subset", subset},
                 {"test_subset", test_subset}};
  j["dataset"] = dataset;
  j["data_dir"] = data_dir;
  j["out_dir"] = out_dir;
  j["files"] = {{"metrics", "metrics.csv"},
                {"plot", "metrics.gp"},
                {"checkpoint", "model.ckpt"}};
  j["content_hash"] = ContentHash();
  return j.dump(2);
}

std::vector<std::pair<std::string, std::string>> ReadConfigFile(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string key = eq == std::string::npos ? "" : Trim(line.substr(0, eq));
    const std::string value = eq == std::string::npos ? "" : Trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError(path + ":" + std::to_string(number) +
                        ": expected 'key = value'");
    }
    entries.emplace_back(key, value);
  }
  return entries;
}

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Saliency-guided, PACT-quantized CNN training"};
  app.require_subcommand(1);

  TrainFlags tf;
  CLI::App* train = app.add_subcommand("train", "Train a model and write metrics, checkpoint and manifest");
  train->add_option("--dataset", tf.dataset, "mnist or cifar10")->required();
  train->add_option("--data-dir", tf.data_dir, "Directory with the dataset files")->required();
  train->add_option("--mode", tf.mode, "baseline_ce, sgt_float, pact_only or sgt_pact");
  train->add_option("--epochs", tf.epochs);
  train->add_option("--lr", tf.lr);
  train->add_option("--batch-size", tf.batch_size);
  train->add_option("--act-bits", tf.act_bits);
  train->add_option("--weight-bits", tf.weight_bits);
  train->add_option("--mask-ratio", tf.mask_ratio);
  train->add_option("--lambda", tf.lambda);
  train->add_option("--lambda-alpha", tf.lambda_alpha);
  train->add_option("--seed", tf.seed);
  train->add_option("--subset", tf.subset, "Stratified training subset size (0 = all)");
  train->add_option("--test-subset", tf.test_subset, "Stratified test subset size (0 = all)");
  train->add_option("--out", tf.out, "Output directory");
  train->add_option("--config", tf.config, "File of 'key = value' lines; flags override it");
  train->add_flag("--record-time", tf.record_time,
                  "Write wall-clock seconds into metrics.csv (breaks bitwise reproducibility)");

  EvalFlags ef;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  AddEvalFlags(eval, ef);

  EvalFlags sf;
  std::string percentages = "0,10,20,30,40,50,60,70,80,90";
  std::string sweep_out = "sweep";
  CLI::App* sweep = app.add_subcommand("sweep", "Accuracy while masking the most salient features");
  AddEvalFlags(sweep, sf);
  sweep->add_option("--percentages", percentages, "Comma-separated mask percentages");
  sweep->add_option("--out", sweep_out, "Output directory");

  EvalFlags xf;
  std::string indices = "0";
  std::string target = "predicted";
  std::string saliency_out = "saliency";
  CLI::App* saliency = app.add_subcommand("saliency", "Export saliency maps as PGM images");
  AddEvalFlags(saliency, xf);
  saliency->add_option("--indices", indices, "Comma-separated test-sample indices");
  saliency->add_option("--target", target, "Logit to explain: label or predicted");
  saliency->add_option("--out", saliency_out, "Output directory");

  std::uint64_t gc_seed = 0;
  double gc_eps = 1e-3;
  double gc_tol = 1e-4;
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every backward rule");
  gradcheck->add_option("--seed", gc_seed);
  gradcheck->add_option("--eps", gc_eps);
  gradcheck->add_option("--tol", gc_tol);

  try {
    std::vector<std::string> full = args;
    if (!args.empty() && args[0] == "train") full = MergeConfig(args, *train);
    std::vector<std::string> storage{"sgt"};
    storage.insert(storage.end(), full.begin(), full.end());
    std::vector<char*> argv;
    for (std::string& s : storage) argv.push_back(s.data());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) {
        out << app.help();
        return kExitOk;
      }
      err << "usage error: " << e.what() << '\n';
      return kExitUsage;
    }

    if (train->parsed()) return CmdTrain(tf, *train, out, err);
    if (eval->parsed()) return CmdEval(ef, out);
    if (sweep->parsed()) return CmdSweep(sf, percentages, sweep_out, out);
    if (saliency->parsed()) {
      return CmdSaliency(xf, indices, target, saliency_out, out);
    }
    if (gradcheck->parsed()) return CmdGradcheck(gc_seed, gc_eps, gc_tol, out, err);
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ContractError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DimensionError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const LengthError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const IoError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace sgt::cli
