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

#ifndef SGT_TOOLS_CLI_HPP_
#define SGT_TOOLS_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "sgt/train.hpp"

namespace sgt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

// Everything needed to reproduce a training run.
struct RunManifest {
  TrainConfig config;
  std::string dataset;
  std::string data_dir;
  std::string out_dir;
  std::size_t subset = 0;       // 0 = full training split
  std::size_t test_subset = 0;  // 0 = full test split

  // Canonical "key = value" rendering of everything that affects results.
  std::string CanonicalText() const;
  // git blob id (SHA-1 of "blob <len>\0" + text) of CanonicalText().
  std::string ContentHash() const;
  std::string ToJson() const;
};

// Reads "key = value" lines ('#' starts a comment) into (key, value) pairs in
// file order. Throws ConfigError on malformed lines.
std::vector<std::pair<std::string, std::string>> ReadConfigFile(
    const std::string& path);

// args excludes the program name. Writes the one-line key=value summary to
// out and diagnostics/progress to err; returns the process exit code.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace sgt::cli

#endif  // SGT_TOOLS_CLI_HPP_
