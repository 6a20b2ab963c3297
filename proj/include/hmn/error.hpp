// Copyright 2026 The HMN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <stdexcept>
#include <string>

namespace hmn {

//! Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

//! Bad magic, unknown version or otherwise malformed file layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

//! Payload shorter than the header declares.
class LengthError : public Error {
 public:
  using Error::Error;
};

//! Well-formed data that violates a value invariant (NaN, Inf, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

//! Input on which an operation is mathematically undefined (all-zero memory).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

//! A caller broke an operation precondition, e.g. gold fact not in support.
class ContractError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace hmn
