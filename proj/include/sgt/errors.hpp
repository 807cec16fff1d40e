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

#ifndef SGT_ERRORS_HPP_
#define SGT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace sgt {

// Base class for every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A documented precondition was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents (bad magic, bad version tag, bad record layout).
class FormatError : public Error {
 public:
  using Error::Error;
};

// File shorter than its header promises.
class LengthError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Invalid model or training configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf during training or a failed gradient check.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace sgt

#endif  // SGT_ERRORS_HPP_
