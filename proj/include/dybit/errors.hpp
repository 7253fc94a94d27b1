// Copyright 2026 The DyBit Toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DYBIT_ERRORS_HPP_
#define DYBIT_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <utility>

namespace dybit {

/// Root of every exception thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed code, field set or format description.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Out-of-domain numeric argument (non-finite input, non-positive scale, ...).
class ValueError : public Error {
 public:
  using Error::Error;
};

/// Unsupported precision mode or datapath width.
class ModeError : public Error {
 public:
  using Error::Error;
};

/// No tiling fits the on-chip buffers.
class CapacityError : public Error {
 public:
  CapacityError(const std::string& what, std::string layer = {})
      : Error(what), layer_(std::move(layer)) {}
  const std::string& layer() const noexcept { return layer_; }

 private:
  std::string layer_;
};

/// The requested constraint cannot be met; carries the best achievable ratio.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, double best_ratio)
      : Error(what), best_ratio_(best_ratio) {}
  double best_ratio() const noexcept { return best_ratio_; }

 private:
  double best_ratio_;
};

/// Missing or inconsistent inputs handed to an algorithm.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Exhaustive enumeration refused because the space is too large.
class GuardError : public Error {
 public:
  using Error::Error;
};

// Model/tensor ingestion errors.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class DanglingReferenceError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class SizeMismatchError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dybit

#endif  // DYBIT_ERRORS_HPP_
