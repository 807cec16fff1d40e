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

#ifndef SGT_TESTS_SUPPORT_FIXTURES_HPP_
#define SGT_TESTS_SUPPORT_FIXTURES_HPP_

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "sgt/data_io.hpp"

#ifndef SGT_TEST_MNIST_DIR
#define SGT_TEST_MNIST_DIR ""
#endif

namespace sgt::testing {

namespace fs = std::filesystem;

// Directory holding the official MNIST files, or empty when not configured.
inline fs::path MnistDir() {
  const char* env = std::getenv("SGT_MNIST_DIR");
  fs::path dir = env && *env ? fs::path(env) : fs::path(SGT_TEST_MNIST_DIR);
  if (dir.empty() || !fs::exists(dir / "train-images-idx3-ubyte")) return {};
  return dir;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("sgt_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void WriteBytes(const fs::path& path,
                       const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

inline std::vector<unsigned char> ReadBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void PutBigEndian(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

inline std::vector<unsigned char> IdxImages(std::uint32_t n, std::uint32_t rows,
                                            std::uint32_t cols,
                                            const std::vector<unsigned char>& px) {
  std::vector<unsigned char> out;
  PutBigEndian(out, 2051);
  PutBigEndian(out, n);
  PutBigEndian(out, rows);
  PutBigEndian(out, cols);
  out.insert(out.end(), px.begin(), px.end());
  return out;
}

inline std::vector<unsigned char> IdxLabels(const std::vector<unsigned char>& y) {
  std::vector<unsigned char> out;
  PutBigEndian(out, 2049);
  PutBigEndian(out, static_cast<std::uint32_t>(y.size()));
  out.insert(out.end(), y.begin(), y.end());
  return out;
}

// Byte pair (lo, hi) and mixing probability whose two-point distribution
// has the requested mean and standard deviation (both in [0, 1] units).
struct TwoPoint {
  int lo = 0, hi = 0;
  double p_hi = 0.0;
};

inline TwoPoint MatchMoments(double mean, double stddev) {
  const double m = 255.0 * mean, s = 255.0 * stddev;
  TwoPoint best;
  double best_err = 1e300;
  for (int lo = 0; lo < 256; ++lo) {
    for (int hi = lo + 1; hi < 256; ++hi) {
      if (m <= lo || m >= hi) continue;
      const double err = std::abs(std::sqrt((m - lo) * (hi - m)) - s);
      if (err < best_err) {
        best_err = err;
        best = {lo, hi, (m - lo) / (hi - lo)};
      }
    }
  }
  return best;
}

// CIFAR-10 binary batches (data_batch_1..5.bin, test_batch.bin) of random
// records whose per-channel pixel statistics match the published CIFAR-10
// values, so the loader's statistics self-check accepts them.
inline void WriteSyntheticCifar(const fs::path& dir, std::size_t per_batch,
                                std::size_t test_records, std::uint64_t seed) {
  fs::create_directories(dir);
  const ChannelStats stats = CifarStats();
  std::mt19937_64 rng(seed);
  TwoPoint tp[3];
  for (int c = 0; c < 3; ++c) tp[c] = MatchMoments(stats.mean[c], stats.stddev[c]);
  // Every plane holds exactly round(p_hi * 1024) high pixels at shuffled
  // positions, so even small files hit the target moments.
  auto batch = [&](std::size_t records) {
    std::vector<unsigned char> bytes;
    bytes.reserve(records * 3073);
    std::vector<unsigned char> plane(1024);
    for (std::size_t r = 0; r < records; ++r) {
      bytes.push_back(static_cast<unsigned char>(r % 10));
      for (int c = 0; c < 3; ++c) {
        const auto hi = static_cast<std::size_t>(std::lround(tp[c].p_hi * 1024));
        for (std::size_t i = 0; i < 1024; ++i) {
          plane[i] = static_cast<unsigned char>(i < hi ? tp[c].hi : tp[c].lo);
        }
        std::shuffle(plane.begin(), plane.end(), rng);
        bytes.insert(bytes.end(), plane.begin(), plane.end());
      }
    }
    return bytes;
  };
  for (int b = 1; b <= 5; ++b) {
    WriteBytes(dir / ("data_batch_" + std::to_string(b) + ".bin"),
               batch(per_batch));
  }
  WriteBytes(dir / "test_batch.bin", batch(test_records));
}

// Two well-separated Gaussian blobs rendered as 1x28x28 "images": class 0
// lights the left half, class 1 the right half.
inline Dataset ToyTwoClass(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> noise(0.0f, 0.05f);
  Dataset d;
  d.name = "toy";
  d.images = Tensor({n, 1, 28, 28});
  d.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    d.labels[i] = y;
    float* img = d.images.data() + i * 784;
    for (int r = 0; r < 28; ++r) {
      for (int c = 0; c < 28; ++c) {
        const bool lit = (c < 14) == (y == 0);
        img[r * 28 + c] = (lit ? 1.0f : 0.0f) + noise(rng);
      }
    }
  }
  return d;
}

}  // namespace sgt::testing

#endif  // SGT_TESTS_SUPPORT_FIXTURES_HPP_
