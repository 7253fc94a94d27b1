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

// Per-tensor DyBit quantization and the sigma-normalized RMSE metric.
//
// The functions in namespace dybit are the OpenMP kernels. The serial
// versions in dybit::reference follow the same arithmetic and are kept for
// testing and benchmarking; both return identical bits.

#ifndef DYBIT_TENSOR_HPP_
#define DYBIT_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dybit/format.hpp"

namespace dybit {

struct TensorF32 {
  std::vector<std::int64_t> shape;
  std::vector<float> data;  // row-major

  TensorF32() = default;
  TensorF32(std::vector<std::int64_t> shape, std::vector<float> data);

  std::size_t size() const noexcept { return data.size(); }
  friend bool operator==(const TensorF32&, const TensorF32&) = default;
};

/// Product of the dimensions; throws ValueError on a non-positive dimension.
std::size_t element_count(const std::vector<std::int64_t>& shape);

/// Shape/length agreement and finiteness of every element.
void validate(const TensorF32& t);

struct QuantizedTensor {
  FormatSpec spec;
  double scale = 1.0;
  std::vector<std::int64_t> shape;
  std::vector<DyBitCode> codes;

  friend bool operator==(const QuantizedTensor&, const QuantizedTensor&) = default;
};

struct QuantMetrics {
  double rmse = 0.0;
  double sigma = 0.0;
  std::size_t n_elements = 0;
};

struct TensorStats {
  double mean = 0.0;
  double std = 0.0;  // population
  double max_abs = 0.0;
};

/// max|x| / max_value(spec); 1 for an all-zero tensor.
double compute_scale(const TensorF32& t, const FormatSpec& spec);

QuantizedTensor quantize_tensor(const TensorF32& t, const FormatSpec& spec, double scale);
TensorF32 dequantize_tensor(const QuantizedTensor& q);
TensorF32 fake_quantize(const TensorF32& t, const FormatSpec& spec);

/// sqrt(mean(((x - x_hat) / sigma)^2)) with sigma the population standard
/// deviation of `original`. A constant original yields 0 if the tensors are
/// equal and throws ValueError otherwise.
QuantMetrics rmse(const TensorF32& original, const TensorF32& quantized);

TensorStats tensor_stats(const TensorF32& t);

/// RMSE of fake-quantizing `t` with `spec`; the quantity the search ranks.
double quantization_rmse(const TensorF32& t, const FormatSpec& spec);

namespace reference {

double compute_scale(const TensorF32& t, const FormatSpec& spec);
QuantizedTensor quantize_tensor(const TensorF32& t, const FormatSpec& spec, double scale);
TensorF32 dequantize_tensor(const QuantizedTensor& q);
QuantMetrics rmse(const TensorF32& original, const TensorF32& quantized);
TensorStats tensor_stats(const TensorF32& t);

}  // namespace reference

}  // namespace dybit

#endif  // DYBIT_TENSOR_HPP_
