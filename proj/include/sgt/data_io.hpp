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

#ifndef SGT_DATA_IO_HPP_
#define SGT_DATA_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sgt/rng.hpp"
#include "sgt/tensor.hpp"

namespace sgt {

struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

// Images are [n, c, h, w]; pixels lie in [0, 1] until Normalize is applied.
struct Dataset {
  std::string name;
  Tensor images;
  std::vector<int> labels;
  ChannelStats normalization;  // empty while un-normalized

  std::size_t size() const { return labels.size(); }
  std::size_t features() const { return images.size() / images.dim(0); }
  Shape sample_shape() const {
    return {images.dim(1), images.dim(2), images.dim(3)};
  }
};

struct Batch {
  Tensor x;
  std::vector<int> y;
  std::vector<std::size_t> indices;  // rows of the source dataset
};

struct DatasetSplits {
  Dataset train;
  Dataset test;
};

inline constexpr std::uint32_t kIdxImageMagic = 2051;
inline constexpr std::uint32_t kIdxLabelMagic = 2049;
inline constexpr std::size_t kCifarRecordBytes = 3073;

// Reference statistics of the raw training sets.
ChannelStats MnistStats();
ChannelStats CifarStats();

Dataset LoadMnistIdx(const std::filesystem::path& images,
                     const std::filesystem::path& labels);

// train-images-idx3-ubyte etc. under dir.
DatasetSplits LoadMnist(const std::filesystem::path& dir);

// One CIFAR-10 binary batch file of 3073-byte records.
Dataset LoadCifar10Batch(const std::filesystem::path& file);

// data_batch_1..5.bin and test_batch.bin under dir (or dir/cifar-10-batches-bin).
DatasetSplits LoadCifar10(const std::filesystem::path& dir);

// Per-channel mean and population standard deviation over every pixel.
ChannelStats ComputeChannelStats(const Dataset& dataset);

// Throws FormatError when a statistic differs from expected by more than tol.
void CheckChannelStats(const Dataset& dataset, const ChannelStats& expected,
                       double tol = 1e-3);

Dataset Normalize(const Dataset& dataset, const ChannelStats& stats);
Dataset Denormalize(const Dataset& dataset);

// "mnist" or "cifar10" from dir: loads both splits, checks the raw training
// split against the published channel statistics, then normalizes both with
// them. Unknown names are a ConfigError.
DatasetSplits LoadStandard(const std::string& name,
                           const std::filesystem::path& dir);

// Row partition of [0, n): Fisher-Yates shuffled from rng when shuffle is set,
// then cut into consecutive batches; the last may be short.
std::vector<std::vector<std::size_t>> BatchPlan(std::size_t n,
                                                std::size_t batch_size,
                                                Rng& rng, bool shuffle);

Batch MakeBatch(const Dataset& dataset, std::span<const std::size_t> rows);

std::vector<Batch> Batches(const Dataset& dataset, std::size_t batch_size,
                           std::uint64_t seed, bool shuffle);

// Class-stratified sample: n / 10 rows per class (remainder to the lowest
// classes), drawn with the seed's "subset" stream and kept in source order.
Dataset Subset(const Dataset& dataset, std::size_t n, std::uint64_t seed);

}  // namespace sgt

#endif  // SGT_DATA_IO_HPP_
