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

// Functional model of the mixed-precision datapath: the shared row/column
// decoder, the write-back encoder, and the fused PE (2-bit-slice mantissa
// multiplier plus exponent adder). Values and bit layouts are exact; timing
// lives in the latency simulator.

#ifndef DYBIT_PE_HPP_
#define DYBIT_PE_HPP_

#include <compare>
#include <cstdint>
#include <string>

namespace dybit::pe {

/// Activation (P1) and weight (P2) widths of a PE configuration.
struct PrecisionMode {
  int a_bits = 8;
  int w_bits = 8;

  friend constexpr bool operator==(const PrecisionMode&, const PrecisionMode&) = default;
  friend constexpr auto operator<=>(const PrecisionMode&, const PrecisionMode&) = default;
};

bool is_supported_width(int bits) noexcept;

/// Throws ModeError unless both widths are 2, 4 or 8.
void validate(const PrecisionMode& mode);

std::string to_string(const PrecisionMode& mode);  // e.g. "4/8" (a/w)

/// Decoder output. `mantissa` is `mantissa_width` bits wide with the hidden
/// 1 in the MSB for normal inputs; value = 2^exponent * mantissa / 2^(width-1).
/// Leading-0 inputs are flagged subnormal and keep the raw fraction, MSB 0.
struct HwDecoded {
  int sign = 0;
  int exponent = 0;  // run length - 1 for normal inputs
  std::uint32_t mantissa = 0;
  int mantissa_width = 8;
  bool is_zero = true;
  bool is_subnormal = false;

  friend bool operator==(const HwDecoded&, const HwDecoded&) = default;
};

/// Width of the exponent register for a datapath width (3 bits at 8-bit).
int exponent_field_bits(int width);

/// Leading-one detector built from 4-bit detectors, as reused for 8-bit input.
int leading_ones_lod4(std::uint32_t field, int width) noexcept;

HwDecoded decode_hw(std::uint32_t code, int width, bool is_signed = false);

/// Inverse of decode_hw. Wider mantissas are normalized and truncated toward
/// zero; magnitudes past the largest code saturate to it.
std::uint32_t encode_hw(const HwDecoded& d, int width, bool is_signed = false);

double reconstruct(const HwDecoded& d);

/// Mantissa product formed from 2-bit x 2-bit partial products shifted by
/// their slice offsets. Throws ValueError when an operand exceeds its width
/// and std::logic_error if the fused sum ever disagrees with a*w.
std::uint32_t fused_mul(std::uint32_t a_mant, std::uint32_t w_mant, const PrecisionMode& mode);

int exp_add(int e_a, int e_w, const PrecisionMode& mode);

/// Decoded product of an activation and a weight, as a wide HwDecoded
/// (mantissa_width = a_bits + w_bits) ready for encode_hw.
HwDecoded multiply(const HwDecoded& a, const HwDecoded& w, const PrecisionMode& mode);

struct Signedness {
  bool activation = false;
  bool weight = false;
};

/// acc + decode(a) * decode(w), through decode_hw -> fused_mul -> exp_add.
double mac(double acc, std::uint32_t a_code, std::uint32_t w_code, const PrecisionMode& mode,
           Signedness signedness = {});

/// Multiplications per PE per cycle: (8 / a_bits) * (8 / w_bits).
int pe_throughput(const PrecisionMode& mode);

}  // namespace dybit::pe

#endif  // DYBIT_PE_HPP_
