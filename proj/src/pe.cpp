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

#include "dybit/pe.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "dybit/errors.hpp"
#include "dybit/format.hpp"

namespace dybit::pe {

namespace {

constexpr std::uint32_t low_mask(int bits) noexcept {
  return bits >= 32 ? ~std::uint32_t{0} : (std::uint32_t{1} << bits) - 1u;
}

void check_width(int width) {
  if (!is_supported_width(width)) {
    throw ModeError("unsupported datapath width " + std::to_string(width) +
                    " (expected 2, 4 or 8)");
  }
}

int magnitude_width(int width, bool is_signed) { return is_signed ? width - 1 : width; }

}  // namespace

bool is_supported_width(int bits) noexcept { return bits == 2 || bits == 4 || bits == 8; }

void validate(const PrecisionMode& mode) {
  check_width(mode.a_bits);
  check_width(mode.w_bits);
}

std::string to_string(const PrecisionMode& mode) {
  return std::to_string(mode.a_bits) + "/" + std::to_string(mode.w_bits);
}

int exponent_field_bits(int width) {
  check_width(width);
  // Largest stored exponent is width - 1.
  return std::bit_width(static_cast<unsigned>(width - 1));
}

int leading_ones_lod4(std::uint32_t field, int width) noexcept {
  if (width <= 4) return leading_ones(field, width);
  const int hi_width = width - 4;
  const int hi = leading_ones(field >> 4, hi_width);
  if (hi < hi_width) return hi;
  return hi + leading_ones(field & 0xFu, 4);
}

HwDecoded decode_hw(std::uint32_t code, int width, bool is_signed) {
  check_width(width);
  if (code > low_mask(width)) {
    throw FormatError("code " + std::to_string(code) + " does not fit " +
                      std::to_string(width) + " bits");
  }
  const int m = magnitude_width(width, is_signed);
  const std::uint32_t magnitude = code & low_mask(m);

  HwDecoded d;
  d.mantissa_width = width;
  d.sign = is_signed ? static_cast<int>((code >> m) & 1u) : 0;
  if (magnitude == 0) {
    d.sign = 0;
    return d;
  }
  d.is_zero = false;

  const int run = leading_ones_lod4(magnitude, m);
  if (run == 0) {
    d.is_subnormal = true;
    d.exponent = 0;
    d.mantissa = magnitude << (width - m);
    return d;
  }
  // Shift out the run and its terminating 0, then insert the hidden 1.
  const int k = run == m ? 0 : m - run - 1;
  const std::uint32_t fraction = magnitude & low_mask(k);
  d.exponent = run - 1;
  d.mantissa = (std::uint32_t{1} << (width - 1)) | (fraction << (width - 1 - k));
  return d;
}

std::uint32_t encode_hw(const HwDecoded& d, int width, bool is_signed) {
  check_width(width);
  if (d.mantissa_width < 1 || d.mantissa_width > 31) {
    throw FormatError("mantissa width out of range");
  }
  const int m = magnitude_width(width, is_signed);
  const std::uint32_t top = low_mask(m);
  if (d.is_zero || d.mantissa == 0) return 0;

  // Normalize so the leading 1 sits in the MSB of the mantissa register.
  const int msb = d.mantissa_width - 1;
  const int lead = std::bit_width(d.mantissa) - 1;
  const int exponent = d.exponent - (msb - lead);
  const std::uint32_t mantissa = d.mantissa << (msb - lead);

  std::uint32_t magnitude = 0;
  if (exponent < 0) {
    // value < 1: leading-0 code with m-1 fraction bits, truncated.
    const int shift = exponent + (m - 1) - msb;
    magnitude = shift >= 0 ? mantissa << shift
                           : (-shift >= 32 ? 0u : mantissa >> -shift);
  } else if (exponent + 1 >= m) {
    magnitude = top;  // all-ones code or saturation
  } else {
    const int run = exponent + 1;
    const int k = m - run - 1;
    const std::uint32_t fraction = mantissa & low_mask(msb);
    const std::uint32_t kept = msb >= k ? fraction >> (msb - k) : fraction << (k - msb);
    magnitude = (low_mask(run) << (m - run)) | kept;
  }
  if (magnitude == 0 || !is_signed || d.sign == 0) return magnitude;
  return magnitude | (std::uint32_t{1} << m);
}

double reconstruct(const HwDecoded& d) {
  if (d.is_zero) return 0.0;
  const double v = std::ldexp(static_cast<double>(d.mantissa), d.exponent - (d.mantissa_width - 1));
  return d.sign ? -v : v;
}

std::uint32_t fused_mul(std::uint32_t a_mant, std::uint32_t w_mant, const PrecisionMode& mode) {
  validate(mode);
  if (a_mant > low_mask(mode.a_bits) || w_mant > low_mask(mode.w_bits)) {
    throw ValueError("mantissa operand exceeds its mode width");
  }
  // One 2x2 brick per slice pair; each partial product is shifted by the sum
  // of its slice offsets before the adder tree.
  std::uint32_t sum = 0;
  for (int i = 0; i < mode.a_bits / 2; ++i) {
    const std::uint32_t a_slice = (a_mant >> (2 * i)) & 0x3u;
    for (int j = 0; j < mode.w_bits / 2; ++j) {
      const std::uint32_t w_slice = (w_mant >> (2 * j)) & 0x3u;
      sum += (a_slice * w_slice) << (2 * (i + j));
    }
  }
  if (sum != a_mant * w_mant) throw std::logic_error("fused multiplier disagrees with a*w");
  return sum;
}

int exp_add(int e_a, int e_w, const PrecisionMode& mode) {
  validate(mode);
  return e_a + e_w;
}

HwDecoded multiply(const HwDecoded& a, const HwDecoded& w, const PrecisionMode& mode) {
  HwDecoded p;
  p.mantissa_width = mode.a_bits + mode.w_bits;
  if (a.is_zero || w.is_zero) return p;
  p.is_zero = false;
  p.sign = a.sign ^ w.sign;
  p.mantissa = fused_mul(a.mantissa, w.mantissa, mode);
  // (ma / 2^(a-1)) * (mw / 2^(w-1)) = 2 * product / 2^(a+w-1)
  p.exponent = exp_add(a.exponent, w.exponent, mode) + 1;
  p.is_subnormal = (p.mantissa >> (p.mantissa_width - 1)) == 0;
  return p;
}

double mac(double acc, std::uint32_t a_code, std::uint32_t w_code, const PrecisionMode& mode,
           Signedness signedness) {
  validate(mode);
  const HwDecoded a = decode_hw(a_code, mode.a_bits, signedness.activation);
  const HwDecoded w = decode_hw(w_code, mode.w_bits, signedness.weight);
  return acc + reconstruct(multiply(a, w, mode));
}

int pe_throughput(const PrecisionMode& mode) {
  validate(mode);
  return (8 / mode.a_bits) * (8 / mode.w_bits);
}

}  // namespace dybit::pe
