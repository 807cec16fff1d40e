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

#ifndef SGT_RNG_HPP_
#define SGT_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace sgt {

using Rng = std::mt19937_64;

// Independent generator for one named purpose ("init", "shuffle", "mask", ...)
// under a run seed. Extra keys (epoch, batch, sample index) split the stream
// further so any component can be replayed in isolation.
Rng MakeStream(std::uint64_t seed, std::string_view name,
               std::initializer_list<std::uint64_t> keys = {});

// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double Uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, bound) by rejection; bound must be > 0.
std::uint64_t UniformIndex(Rng& rng, std::uint64_t bound);

}  // namespace sgt

#endif  // SGT_RNG_HPP_
