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

#include "dybit/format.hpp"

#include <cmath>

#include "dybit/errors.hpp"

namespace dybit {

namespace {

constexpr std::uint32_t low_mask(int bits) noexcept {
  return bits >= 32 ? ~std::uint32_t{0} : (std::uint32_t{1} << bits) - 1u;
}

void check_code(DyBitCode code, const FormatSpec& spec) {
  validate(spec);
  if (code.bits >= spec.code_count()) {
    throw FormatError("code " + std::to_string(code.bits) + " does not fit " +
                      to_string(spec));
  }
}

}  // namespace

void validate(const FormatSpec& spec) {
  if (spec.total_bits < 2 || spec.total_bits > kMaxTotalBits) {
    throw FormatError("unsupported DyBit width " + std::to_string(spec.total_bits) +
                      " (expected 2.." + std::to_string(kMaxTotalBits) + ")");
  }
}

std::string to_string(const FormatSpec& spec) {
  return std::to_string(spec.total_bits) + "-bit " +
         (spec.is_signed ? "signed" : "unsigned") + " DyBit";
}

int leading_ones(std::uint32_t field, int width) noexcept {
  int run = 0;
  for (int bit = width - 1; bit >= 0 && ((field >> bit) & 1u); --bit) ++run;
  return run;
}

double decode_magnitude(std::uint32_t magnitude, int magnitude_bits) noexcept {
  const int run = leading_ones(magnitude, magnitude_bits);
  if (run == magnitude_bits) return std::ldexp(1.0, run - 1);
  if (run == 0) {
    const int k = magnitude_bits - 1;
    return std::ldexp(static_cast<double>(magnitude & low_mask(k)), -k);
  }
  const int k = magnitude_bits - run - 1;
  const double fraction = std::ldexp(static_cast<double>(magnitude & low_mask(k)), -k);
  return std::ldexp(1.0 + fraction, run - 1);
}

std::uint32_t nearest_magnitude(double magnitude, int magnitude_bits) noexcept {
  const std::uint32_t top = low_mask(magnitude_bits);
  if (!(magnitude > 0.0)) return 0;
  if (magnitude >= decode_magnitude(top, magnitude_bits)) return top;
  // Decoded values increase with the code, so bisect for the last code whose
  // value does not exceed the input.
  std::uint32_t lo = 0;
  std::uint32_t hi = top;  // invariant: value(lo) <= magnitude < value(hi)
  while (hi - lo > 1) {
    const std::uint32_t mid = lo + (hi - lo) / 2;
    if (decode_magnitude(mid, magnitude_bits) <= magnitude) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double below = magnitude - decode_magnitude(lo, magnitude_bits);
  const double above = decode_magnitude(hi, magnitude_bits) - magnitude;
  return above < below ? hi : lo;
}

DecodedFields decode_fields(DyBitCode code, const FormatSpec& spec) {
  check_code(code, spec);
  const int m = spec.magnitude_bits();
  const std::uint32_t magnitude = code.bits & low_mask(m);

  DecodedFields f;
  f.sign = spec.is_signed ? static_cast<int>((code.bits >> m) & 1u) : 0;
  f.run_length = leading_ones(magnitude, m);
  if (f.run_length == m) {
    f.mantissa_bits = 0;
  } else if (f.run_length == 0) {
    f.mantissa_bits = m - 1;
  } else {
    f.mantissa_bits = m - f.run_length - 1;
  }
  f.mantissa_value = magnitude & low_mask(f.mantissa_bits);
  f.value = decode_magnitude(magnitude, m);
  return f;
}

double decode(DyBitCode code, const FormatSpec& spec) {
  const DecodedFields f = decode_fields(code, spec);
  if (f.value == 0.0) return 0.0;
  return f.sign ? -f.value : f.value;
}

DyBitCode encode_fields(const DecodedFields& f, const FormatSpec& spec) {
  validate(spec);
  const int m = spec.magnitude_bits();
  if (f.sign != 0 && f.sign != 1) throw FormatError("sign must be 0 or 1");
  if (f.sign == 1 && !spec.is_signed) {
    throw FormatError("negative sign in an unsigned format");
  }
  if (f.run_length < 0 || f.run_length > m) {
    throw FormatError("run length " + std::to_string(f.run_length) +
                      " exceeds magnitude width " + std::to_string(m));
  }
  int expected_k = m - f.run_length - 1;
  if (f.run_length == 0) expected_k = m - 1;
  if (f.run_length == m) expected_k = 0;
  if (f.mantissa_bits != expected_k) {
    throw FormatError("mantissa width " + std::to_string(f.mantissa_bits) +
                      " inconsistent with run length " + std::to_string(f.run_length) +
                      " (expected " + std::to_string(expected_k) + ")");
  }
  if (f.mantissa_value > low_mask(f.mantissa_bits)) {
    throw FormatError("mantissa value does not fit " + std::to_string(f.mantissa_bits) +
                      " bits");
  }

  // Run of 1s at the top, the terminating 0 is implicit in the shift.
  const std::uint32_t run = low_mask(f.run_length) << (m - f.run_length);
  const std::uint32_t magnitude = run | f.mantissa_value;
  const bool negative = f.sign == 1 && magnitude != 0;
  return DyBitCode{magnitude | (negative ? std::uint32_t{1} << m : 0u)};
}

std::vector<std::pair<DyBitCode, double>> enumerate_values(const FormatSpec& spec) {
  validate(spec);
  std::vector<std::pair<DyBitCode, double>> out;
  out.reserve(spec.code_count());
  for (std::uint32_t bits = 0; bits < spec.code_count(); ++bits) {
    out.emplace_back(DyBitCode{bits}, decode(DyBitCode{bits}, spec));
  }
  return out;
}

DyBitCode quantize_scalar(double v, const FormatSpec& spec) {
  validate(spec);
  if (!std::isfinite(v)) throw ValueError("cannot quantize a non-finite value");
  const int m = spec.magnitude_bits();
  if (v < 0.0 && !spec.is_signed) return DyBitCode{0};
  const std::uint32_t magnitude = nearest_magnitude(std::fabs(v), m);
  const bool negative = v < 0.0 && magnitude != 0;
  return DyBitCode{magnitude | (negative ? std::uint32_t{1} << m : 0u)};
}

double max_value(const FormatSpec& spec) {
  validate(spec);
  return std::ldexp(1.0, spec.magnitude_bits() - 1);
}

double min_positive(const FormatSpec& spec) {
  validate(spec);
  return decode_magnitude(1u, spec.magnitude_bits());
}

}  // namespace dybit
