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

#include "sgt/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace sgt {

namespace {

constexpr std::size_t kNumClasses = 10;

std::vector<unsigned char> ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw IoError("cannot stat " + path.string() + ": " + ec.message());
  std::vector<unsigned char> bytes(static_cast<std::size_t>(size));
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw IoError("short read from " + path.string());
  }
  return bytes;
}

std::uint32_t BigEndian32(const std::vector<unsigned char>& b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

void RequireBytes(const std::vector<unsigned char>& bytes, std::size_t need,
                  const std::filesystem::path& path) {
  if (bytes.size() < need) {
    throw LengthError(path.string() + " holds " + std::to_string(bytes.size()) +
                      " bytes, header promises " + std::to_string(need));
  }
}

}  // namespace

ChannelStats MnistStats() { return {{0.1307}, {0.3081}}; }

ChannelStats CifarStats() {
  return {{0.4914, 0.4822, 0.4465}, {0.2470, 0.2435, 0.2616}};
}

Dataset LoadMnistIdx(const std::filesystem::path& images,
                     const std::filesystem::path& labels) {
  const std::vector<unsigned char> ib = ReadFile(images);
  const std::vector<unsigned char> lb = ReadFile(labels);
  RequireBytes(ib, 16, images);
  RequireBytes(lb, 8, labels);
  const std::uint32_t im = BigEndian32(ib, 0);
  if (im != kIdxImageMagic) {
    throw FormatError(images.string() + ": bad IDX image magic " +
                      std::to_string(im) + " (expected 2051)");
  }
  const std::uint32_t lm = BigEndian32(lb, 0);
  if (lm != kIdxLabelMagic) {
    throw FormatError(labels.string() + ": bad IDX label magic " +
                      std::to_string(lm) + " (expected 2049)");
  }
  const std::size_t n = BigEndian32(ib, 4);
  const std::size_t rows = BigEndian32(ib, 8);
  const std::size_t cols = BigEndian32(ib, 12);
  const std::size_t nl = BigEndian32(lb, 4);
  if (n != nl) {
    throw FormatError("image count " + std::to_string(n) +
                      " does not match label count " + std::to_string(nl));
  }
  if (n == 0 || rows == 0 || cols == 0) {
    throw FormatError(images.string() + ": empty IDX dimensions");
  }
  RequireBytes(ib, 16 + n * rows * cols, images);
  RequireBytes(lb, 8 + n, labels);

  Dataset ds;
  ds.name = "mnist";
  ds.images = Tensor({n, 1, rows, cols});
  float* px = ds.images.data();
  for (std::size_t i = 0; i < n * rows * cols; ++i) {
    px[i] = static_cast<float>(ib[16 + i]) / 255.0f;
  }
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = lb[8 + i];
    if (y >= static_cast<int>(kNumClasses)) {
      throw FormatError(labels.string() + ": label " + std::to_string(y) +
                        " at record " + std::to_string(i) + " outside [0, 10)");
    }
    ds.labels[i] = y;
  }
  return ds;
}

DatasetSplits LoadMnist(const std::filesystem::path& dir) {
  DatasetSplits s;
  s.train = LoadMnistIdx(dir / "train-images-idx3-ubyte",
                         dir / "train-labels-idx1-ubyte");
  s.test = LoadMnistIdx(dir / "t10k-images-idx3-ubyte",
                        dir / "t10k-labels-idx1-ubyte");
  return s;
}

Dataset LoadCifar10Batch(const std::filesystem::path& file) {
  const std::vector<unsigned char> bytes = ReadFile(file);
  if (bytes.empty() || bytes.size() % kCifarRecordBytes != 0) {
    throw FormatError(file.string() + ": size " + std::to_string(bytes.size()) +
                      " is not a positive multiple of 3073");
  }
  const std::size_t n = bytes.size() / kCifarRecordBytes;
  Dataset ds;
  ds.name = "cifar10";
  ds.images = Tensor({n, 3, 32, 32});
  ds.labels.resize(n);
  float* px = ds.images.data();
  for (std::size_t r = 0; r < n; ++r) {
    const unsigned char* rec = bytes.data() + r * kCifarRecordBytes;
    if (rec[0] >= kNumClasses) {
      throw FormatError(file.string() + ": label byte " +
                        std::to_string(rec[0]) + " at record " +
                        std::to_string(r) + " outside [0, 10)");
    }
    ds.labels[r] = rec[0];
    float* dst = px + r * 3072;
    for (std::size_t i = 0; i < 3072; ++i) {
      dst[i] = static_cast<float>(rec[1 + i]) / 255.0f;
    }
  }
  return ds;
}

namespace {

Dataset Concatenate(std::vector<Dataset> parts) {
  std::size_t n = 0;
  for (const Dataset& p : parts) n += p.size();
  Dataset out;
  out.name = parts.front().name;
  Shape shape = parts.front().images.shape();
  shape[0] = n;
  std::vector<float> data;
  data.reserve(NumElements(shape));
  for (const Dataset& p : parts) {
    data.insert(data.end(), p.images.values().begin(), p.images.values().end());
    out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
  }
  out.images = Tensor(shape, std::move(data));
  return out;
}

}  // namespace

DatasetSplits LoadCifar10(const std::filesystem::path& dir) {
  std::filesystem::path root = dir;
  if (!std::filesystem::exists(root / "test_batch.bin") &&
      std::filesystem::exists(root / "cifar-10-batches-bin")) {
    root /= "cifar-10-batches-bin";
  }
  std::vector<Dataset> parts;
  for (int i = 1; i <= 5; ++i) {
    parts.push_back(LoadCifar10Batch(root / ("data_batch_" + std::to_string(i) + ".bin")));
  }
  DatasetSplits s;
  s.train = Concatenate(std::move(parts));
  s.test = LoadCifar10Batch(root / "test_batch.bin");
  return s;
}

ChannelStats ComputeChannelStats(const Dataset& dataset) {
  const std::size_t n = dataset.images.dim(0), c = dataset.images.dim(1);
  const std::size_t plane = dataset.images.dim(2) * dataset.images.dim(3);
  ChannelStats s;
  for (std::size_t ch = 0; ch < c; ++ch) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const float* p = dataset.images.data() + (i * c + ch) * plane;
      for (std::size_t j = 0; j < plane; ++j) {
        sum += p[j];
        sq += static_cast<double>(p[j]) * p[j];
      }
    }
    const double count = static_cast<double>(n * plane);
    const double mean = sum / count;
    s.mean.push_back(mean);
    s.stddev.push_back(std::sqrt(std::max(0.0, sq / count - mean * mean)));
  }
  return s;
}

void CheckChannelStats(const Dataset& dataset, const ChannelStats& expected,
                       double tol) {
  const ChannelStats got = ComputeChannelStats(dataset);
  if (got.mean.size() != expected.mean.size()) {
    throw FormatError(dataset.name + ": channel count mismatch in stats check");
  }
  for (std::size_t c = 0; c < got.mean.size(); ++c) {
    if (std::abs(got.mean[c] - expected.mean[c]) > tol ||
        std::abs(got.stddev[c] - expected.stddev[c]) > tol) {
      throw FormatError(dataset.name + " channel " + std::to_string(c) +
                        ": measured mean/std " + std::to_string(got.mean[c]) +
                        "/" + std::to_string(got.stddev[c]) + " expected " +
                        std::to_string(expected.mean[c]) + "/" +
                        std::to_string(expected.stddev[c]));
    }
  }
}

Dataset Normalize(const Dataset& dataset, const ChannelStats& stats) {
  const std::size_t c = dataset.images.dim(1);
  if (stats.mean.size() != c || stats.stddev.size() != c) {
    throw DimensionError("normalize: expected " + std::to_string(c) +
                         " channel statistics");
  }
  for (double s : stats.stddev) {
    if (s == 0.0) throw ContractError("normalize: standard deviation is zero");
  }
  Dataset out = dataset;
  const std::size_t n = dataset.images.dim(0);
  const std::size_t plane = dataset.images.dim(2) * dataset.images.dim(3);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      float* p = out.images.data() + (i * c + ch) * plane;
      for (std::size_t j = 0; j < plane; ++j) {
        p[j] = static_cast<float>((p[j] - stats.mean[ch]) / stats.stddev[ch]);
      }
    }
  }
  out.normalization = stats;
  return out;
}

DatasetSplits LoadStandard(const std::string& name,
                           const std::filesystem::path& dir) {
  DatasetSplits raw;
  ChannelStats stats;
  if (name == "mnist") {
    raw = LoadMnist(dir);
    stats = MnistStats();
  } else if (name == "cifar10") {
    raw = LoadCifar10(dir);
    stats = CifarStats();
  } else {
    throw ConfigError("unknown dataset '" + name +
                      "' (expected mnist or cifar10)");
  }
  CheckChannelStats(raw.train, stats);
  return {Normalize(raw.train, stats), Normalize(raw.test, stats)};
}

Dataset Denormalize(const Dataset& dataset) {
  if (dataset.normalization.mean.empty()) return dataset;
  const ChannelStats& stats = dataset.normalization;
  Dataset out = dataset;
  const std::size_t n = dataset.images.dim(0), c = dataset.images.dim(1);
  const std::size_t plane = dataset.images.dim(2) * dataset.images.dim(3);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      float* p = out.images.data() + (i * c + ch) * plane;
      for (std::size_t j = 0; j < plane; ++j) {
        p[j] = static_cast<float>(p[j] * stats.stddev[ch] + stats.mean[ch]);
      }
    }
  }
  out.normalization = {};
  return out;
}

std::vector<std::vector<std::size_t>> BatchPlan(std::size_t n,
                                                std::size_t batch_size,
                                                Rng& rng, bool shuffle) {
  if (batch_size == 0) throw ContractError("batch size must be >= 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) {
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = UniformIndex(rng, i);
      std::swap(order[i - 1], order[j]);
    }
  }
  std::vector<std::vector<std::size_t>> plan;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    plan.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                      order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return plan;
}

Batch MakeBatch(const Dataset& dataset, std::span<const std::size_t> rows) {
  const std::size_t per = dataset.features();
  Shape shape = dataset.images.shape();
  shape[0] = rows.size();
  std::vector<float> data(rows.size() * per);
  Batch b;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const float* src = dataset.images.data() + rows[i] * per;
    std::copy(src, src + per, data.begin() + static_cast<std::ptrdiff_t>(i * per));
    b.y.push_back(dataset.labels.at(rows[i]));
  }
  b.x = Tensor(shape, std::move(data));
  b.indices.assign(rows.begin(), rows.end());
  return b;
}

std::vector<Batch> Batches(const Dataset& dataset, std::size_t batch_size,
                           std::uint64_t seed, bool shuffle) {
  Rng rng = MakeStream(seed, "shuffle");
  std::vector<Batch> out;
  for (const auto& rows : BatchPlan(dataset.size(), batch_size, rng, shuffle)) {
    out.push_back(MakeBatch(dataset, rows));
  }
  return out;
}

Dataset Subset(const Dataset& dataset, std::size_t n, std::uint64_t seed) {
  if (n == 0 || n > dataset.size()) {
    throw ContractError("subset: cannot draw " + std::to_string(n) + " of " +
                        std::to_string(dataset.size()) + " samples");
  }
  std::vector<std::vector<std::size_t>> by_class(kNumClasses);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    by_class[static_cast<std::size_t>(dataset.labels[i])].push_back(i);
  }
  Rng rng = MakeStream(seed, "subset");
  std::vector<std::size_t> chosen;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const std::size_t want = n / kNumClasses + (c < n % kNumClasses ? 1 : 0);
    std::vector<std::size_t>& pool = by_class[c];
    if (pool.size() < want) {
      throw ContractError("subset: class " + std::to_string(c) + " has only " +
                          std::to_string(pool.size()) + " samples, need " +
                          std::to_string(want));
    }
    for (std::size_t i = 0; i < want; ++i) {
      const std::size_t j = i + UniformIndex(rng, pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
    chosen.insert(chosen.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(want));
  }
  std::sort(chosen.begin(), chosen.end());
  Batch b = MakeBatch(dataset, chosen);
  Dataset out;
  out.name = dataset.name;
  out.images = std::move(b.x);
  out.labels = std::move(b.y);
  out.normalization = dataset.normalization;
  return out;
}

}  // namespace sgt
