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

#ifndef SGT_CHECKPOINT_HPP_
#define SGT_CHECKPOINT_HPP_

#include <filesystem>
#include <iosfwd>

#include "sgt/model.hpp"

namespace sgt {

inline constexpr const char* kCheckpointTag = "SGTPACT1";

// Layout:
//   SGTPACT1
//   config input=CxHxW classes=N quantize_weights=0|1 activation_bits=K weight_bits=K
//   layers <LayersToString>
//   tensors <count>
//   then per tensor a line "<name> <d0> <d1> ..." followed by the values as
//   raw little-endian IEEE-754 binary32
//   alphas <count>, then that many little-endian binary32 values.
void WriteCheckpoint(const Model& model, std::ostream& out);
Model ReadCheckpoint(std::istream& in);

void SaveCheckpoint(const Model& model, const std::filesystem::path& path);
Model LoadCheckpoint(const std::filesystem::path& path);

}  // namespace sgt

#endif  // SGT_CHECKPOINT_HPP_
