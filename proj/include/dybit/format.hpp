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

// DyBit codes: a tapered format whose magnitude field starts with a run of
// 1s (the exponent, read by a leading-one detector) followed by a
// terminating 0 and the mantissa. A magnitude that starts with 0 is a pure
// fraction in [0, 1).
//
//   run_length == 0 : value = x / 2^k,                     k = m - 1
//   run_length == m : value = 2^(m-1)                      (all ones)
//   otherwise       : value = 2^(run-1) * (1 + x / 2^k),   k = m - run - 1
//
// where m is the magnitude width. Signed formats prepend one sign bit
// (sign-magnitude); the negative-zero pattern decodes to 0 and is never
// produced by an encoder.

#ifndef DYBIT_FORMAT_HPP_
#define DYBIT_FORMAT_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace dybit {

inline constexpr int kMaxTotalBits = 16;

struct FormatSpec {
  int total_bits = 4;
  bool is_signed = false;

  /// Width of the run-length/mantissa field (total minus the sign bit).
  constexpr int magnitude_bits() const noexcept {
    return is_signed ? total_bits - 1 : total_bits;
  }
  constexpr std::uint32_t code_count() const noexcept {
    return std::uint32_t{1} << total_bits;
  }

  friend constexpr bool operator==(const FormatSpec&, const FormatSpec&) = default;
};

/// Throws FormatError unless 2 <= total_bits <= 16. A signed 2-bit spec is a
/// sign plus a one-bit magnitude, i.e. ternary {-1, 0, +1}.
void validate(const FormatSpec& spec);

std::string to_string(const FormatSpec& spec);

/// Raw bit pattern of width FormatSpec::total_bits.
struct DyBitCode {
  std::uint32_t bits = 0;
  friend constexpr bool operator==(DyBitCode, DyBitCode) = default;
  friend constexpr auto operator<=>(DyBitCode, DyBitCode) = default;
};

struct DecodedFields {
  int sign = 0;
  int run_length = 0;
  int mantissa_bits = 0;
  std::uint32_t mantissa_value = 0;
  double value = 0.0;  // unsigned magnitude; decode() applies the sign

  friend bool operator==(const DecodedFields&, const DecodedFields&) = default;
};

DecodedFields decode_fields(DyBitCode code, const FormatSpec& spec);

double decode(DyBitCode code, const FormatSpec& spec);

/// Inverse of decode_fields. The `value` member is ignored; widths must be
/// the canonical ones for the run length. Negative zero is emitted as +0.
DyBitCode encode_fields(const DecodedFields& fields, const FormatSpec& spec);

/// Every code of the spec with its value, in code order. For signed specs
/// the negative-zero pattern is included and maps to 0.
std::vector<std::pair<DyBitCode, double>> enumerate_values(const FormatSpec& spec);

/// Nearest representable value; ties go to the smaller magnitude. Unsigned
/// specs clamp negatives to zero; magnitudes beyond the range saturate.
DyBitCode quantize_scalar(double v, const FormatSpec& spec);

double max_value(const FormatSpec& spec);
double min_positive(const FormatSpec& spec);

/// Magnitude-only helpers shared with the hardware model: decoding and
/// nearest-rounding of an m-bit magnitude field.
double decode_magnitude(std::uint32_t magnitude, int magnitude_bits) noexcept;
std::uint32_t nearest_magnitude(double magnitude, int magnitude_bits) noexcept;

/// Number of leading 1s in the low `width` bits of `field`.
int leading_ones(std::uint32_t field, int width) noexcept;

}  // namespace dybit

#endif  // DYBIT_FORMAT_HPP_
