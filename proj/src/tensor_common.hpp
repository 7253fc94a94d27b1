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

// Element-level arithmetic shared by the OpenMP kernels and the serial
// reference, so the two differ only in loop structure.

#ifndef DYBIT_SRC_TENSOR_COMMON_HPP_
#define DYBIT_SRC_TENSOR_COMMON_HPP_

#include <cmath>
#include <cstdint>

#include "dybit/errors.hpp"
#include "dybit/format.hpp"
#include "dybit/tensor.hpp"

namespace dybit::detail {

inline DyBitCode quantize_element(float x, double scale, const FormatSpec& spec) {
  const double v = static_cast<double>(x) / scale;
  const int m = spec.magnitude_bits();
  if (v < 0.0 && !spec.is_signed) return DyBitCode{0};
  const std::uint32_t magnitude = nearest_magnitude(std::fabs(v), m);
  const bool negative = v < 0.0 && magnitude != 0;
  return DyBitCode{magnitude | (negative ? std::uint32_t{1} << m : 0u)};
}

inline float dequantize_element(DyBitCode code, double scale, const FormatSpec& spec) {
  const int m = spec.magnitude_bits();
  const std::uint32_t magnitude = code.bits & ((std::uint32_t{1} << m) - 1u);
  const double value = decode_magnitude(magnitude, m) * scale;
  if (value == 0.0) return 0.0f;
  const bool negative = spec.is_signed && ((code.bits >> m) & 1u);
  return static_cast<float>(negative ? -value : value);
}

inline void check_scale(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ValueError("quantization scale must be positive and finite");
  }
}

inline void check_codes(const QuantizedTensor& q) {
  validate(q.spec);
  if (!(q.scale > 0.0) || !std::isfinite(q.scale)) {
    throw ValueError("quantized tensor carries a non-positive scale");
  }
  if (element_count(q.shape) != q.codes.size()) {
    throw ValueError("quantized tensor shape does not match its code count");
  }
  for (const DyBitCode c : q.codes) {
    if (c.bits >= q.spec.code_count()) {
      throw FormatError("code " + std::to_string(c.bits) + " does not fit " +
                        to_string(q.spec));
    }
  }
}

inline void check_pair(const TensorF32& original, const TensorF32& quantized) {
  if (original.shape != quantized.shape || original.size() != quantized.size()) {
    throw ValueError("rmse needs tensors of identical shape");
  }
  if (original.size() == 0) throw ValueError("rmse of an empty tensor");
}

}  // namespace dybit::detail

#endif  // DYBIT_SRC_TENSOR_COMMON_HPP_
