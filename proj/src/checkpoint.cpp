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

#include "sgt/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>

namespace sgt {

namespace {

void PutFloats(std::ostream& out, std::span<const float> values) {
  std::string bytes(values.size() * 4, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(values[i]);
    for (int b = 0; b < 4; ++b) {
      bytes[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
    }
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void GetFloats(std::istream& in, std::span<float> values, const std::string& what) {
  std::string bytes(values.size() * 4, '\0');
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw LengthError("checkpoint truncated inside " + what);
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= std::uint32_t{static_cast<unsigned char>(bytes[i * 4 + b])} << (8 * b);
    }
    values[i] = std::bit_cast<float>(bits);
  }
}

std::string ReadLine(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) {
    throw LengthError(std::string("checkpoint truncated before ") + what);
  }
  return line;
}

std::string Expect(std::istringstream& words, const std::string& key) {
  std::string token;
  words >> token;
  const std::string prefix = key + "=";
  if (token.rfind(prefix, 0) != 0) {
    throw FormatError("checkpoint config: expected '" + key + "=', got '" + token + "'");
  }
  return token.substr(prefix.size());
}

std::size_t ToSize(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw FormatError(std::string("checkpoint: bad ") + what + " '" + s + "'");
  }
}

}  // namespace

void WriteCheckpoint(const Model& model, std::ostream& out) {
  const ModelConfig& c = model.config;
  out << kCheckpointTag << '\n';
  out << "config input=" << c.input_shape[0] << 'x' << c.input_shape[1] << 'x'
      << c.input_shape[2] << " classes=" << c.num_classes
      << " quantize_weights=" << (c.quantize_weights ? 1 : 0)
      << " activation_bits=" << c.activation_bits
      << " weight_bits=" << c.weight_bits << '\n';
  out << "layers " << LayersToString(c.layers) << '\n';
  out << "tensors " << model.params.size() << '\n';
  for (const auto& p : model.params) {
    out << p.name;
    for (std::size_t d : p.value.shape()) out << ' ' << d;
    out << '\n';
    PutFloats(out, p.value.values());
  }
  out << "alphas " << model.pact_states.size() << '\n';
  std::vector<float> alphas;
  for (const auto& s : model.pact_states) alphas.push_back(s.alpha);
  PutFloats(out, alphas);
}

Model ReadCheckpoint(std::istream& in) {
  const std::string tag = ReadLine(in, "version tag");
  if (tag != kCheckpointTag) {
    throw FormatError("checkpoint version tag '" + tag.substr(0, 32) +
                      "' is not " + kCheckpointTag);
  }
  ModelConfig cfg;
  {
    std::istringstream words(ReadLine(in, "config"));
    std::string head;
    words >> head;
    if (head != "config") throw FormatError("checkpoint: missing config line");
    std::string input = Expect(words, "input");
    std::replace(input.begin(), input.end(), 'x', ' ');
    std::istringstream dims(input);
    std::string d;
    while (dims >> d) cfg.input_shape.push_back(ToSize(d, "input dimension"));
    cfg.num_classes = ToSize(Expect(words, "classes"), "class count");
    cfg.quantize_weights = Expect(words, "quantize_weights") == "1";
    cfg.activation_bits = static_cast<int>(ToSize(Expect(words, "activation_bits"), "bits"));
    cfg.weight_bits = static_cast<int>(ToSize(Expect(words, "weight_bits"), "bits"));
  }
  {
    const std::string line = ReadLine(in, "layers");
    if (line.rfind("layers ", 0) != 0) throw FormatError("checkpoint: missing layers line");
    cfg.layers = LayersFromString(line.substr(7));
  }
  Model model;
  try {
    model = BuildModel(cfg, 0);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint config invalid: ") + e.what());
  }

  std::istringstream count_line(ReadLine(in, "tensor count"));
  std::string head, count;
  count_line >> head >> count;
  if (head != "tensors" || ToSize(count, "tensor count") != model.params.size()) {
    throw FormatError("checkpoint: tensor count does not match the layer chain");
  }
  for (auto& p : model.params) {
    std::istringstream words(ReadLine(in, "tensor header"));
    std::string name;
    words >> name;
    Shape shape;
    std::string d;
    while (words >> d) shape.push_back(ToSize(d, "dimension"));
    if (name != p.name || shape != p.value.shape()) {
      throw FormatError("checkpoint: expected tensor " + p.name + " " +
                        ShapeToString(p.value.shape()) + ", found " + name +
                        " " + ShapeToString(shape));
    }
    GetFloats(in, p.value.values(), p.name);
  }
  std::istringstream alpha_line(ReadLine(in, "alpha list"));
  alpha_line >> head >> count;
  if (head != "alphas" || ToSize(count, "alpha count") != model.pact_states.size()) {
    throw FormatError("checkpoint: alpha count does not match the layer chain");
  }
  std::vector<float> alphas(model.pact_states.size());
  GetFloats(in, alphas, "alpha list");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0f)) throw FormatError("checkpoint: non-positive alpha");
    model.pact_states[i].alpha = alphas[i];
  }
  return model;
}

void SaveCheckpoint(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  WriteCheckpoint(model, out);
  if (!out) throw IoError("failed writing " + path.string());
}

Model LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return ReadCheckpoint(in);
}

}  // namespace sgt
