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

// Independent reference computations for the tests. Nothing here calls the
// code under test except where a helper is explicitly a composition check.

#ifndef DYBIT_TESTS_ORACLES_HPP_
#define DYBIT_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dybit/latency.hpp"
#include "dybit/model.hpp"
#include "dybit/tensor.hpp"

namespace oracle {

/// Decodes through a '0'/'1' string: count the leading '1's of the
/// magnitude, skip the terminating '0', read the rest as the fraction.
inline double decode(std::uint32_t code, int n, bool is_signed) {
  std::string s;
  for (int i = n - 1; i >= 0; --i) s += ((code >> i) & 1u) ? '1' : '0';
  double sign = 1.0;
  if (is_signed) {
    sign = s[0] == '1' ? -1.0 : 1.0;
    s = s.substr(1);
  }
  const int m = static_cast<int>(s.size());
  int run = 0;
  while (run < m && s[static_cast<std::size_t>(run)] == '1') ++run;
  double v = 0.0;
  if (run == 0) {
    double x = 0.0;
    for (char c : s) x = 2.0 * x + (c - '0');
    v = x / std::pow(2.0, m - 1);
  } else if (run == m) {
    v = std::pow(2.0, m - 1);
  } else {
    const std::string frac = s.substr(static_cast<std::size_t>(run) + 1);
    double x = 0.0;
    for (char c : frac) x = 2.0 * x + (c - '0');
    v = std::pow(2.0, run - 1) * (1.0 + x / std::pow(2.0, static_cast<double>(frac.size())));
  }
  return v == 0.0 ? 0.0 : sign * v;
}

/// Nearest value by scanning every code; ties to the smaller magnitude.
inline double nearest(double v, int n, bool is_signed) {
  double best = 0.0;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::uint32_t c = 0; c < (1u << n); ++c) {
    const double q = decode(c, n, is_signed);
    const double err = std::abs(v - q);
    if (err < best_err || (err == best_err && std::abs(q) < std::abs(best))) {
      best = q;
      best_err = err;
    }
  }
  return best;
}

/// Population mean/std and Eq-style normalized RMSE, computed in long double
/// with a plain loop.
inline double normalized_rmse(const std::vector<float>& x, const std::vector<double>& xq) {
  long double mean = 0;
  for (float v : x) mean += v;
  mean /= static_cast<long double>(x.size());
  long double var = 0;
  for (float v : x) var += (v - mean) * (v - mean);
  const long double sigma = std::sqrt(var / static_cast<long double>(x.size()));
  long double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long double e = (static_cast<long double>(x[i]) - xq[i]) / sigma;
    ss += e * e;
  }
  return static_cast<double>(std::sqrt(ss / static_cast<long double>(x.size())));
}

/// DyBit fake quantization with max scaling, via the string decoder.
inline std::vector<double> dybit_fake_quant(const std::vector<float>& x, int n, bool is_signed) {
  double max_abs = 0;
  for (float v : x) max_abs = std::max(max_abs, std::abs(static_cast<double>(v)));
  const int m = is_signed ? n - 1 : n;
  const double top = decode((1u << m) - 1u, m, false);
  const double scale = max_abs == 0 ? 1.0 : max_abs / top;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = scale * nearest(x[i] / scale, n, is_signed);
  return out;
}

/// Uniform INT4 with max scaling: zero point 0, levels -8..7, scale =
/// max|x| / 7, round half away from zero, clamp.
inline std::vector<double> int4_fake_quant(const std::vector<float>& x) {
  double max_abs = 0;
  for (float v : x) max_abs = std::max(max_abs, std::abs(static_cast<double>(v)));
  const double scale = max_abs == 0 ? 1.0 : max_abs / 7.0;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double q = std::clamp(std::round(x[i] / scale), -8.0, 7.0);
    out[i] = q * scale;
  }
  return out;
}

/// Layer latency by brute force over every integer tiling, walking every
/// tile of the layer one by one.
struct LatencyOracle {
  dybit::sim::HwConfig hw;
  dybit::pe::PrecisionMode mode;

  std::int64_t rows() const { return (8 / mode.a_bits) * hw.array_dim; }
  std::int64_t cols() const { return (8 / mode.w_bits) * hw.array_dim; }

  bool fits(std::int64_t tm, std::int64_t tn, std::int64_t tk) const {
    const std::int64_t pm = (tm + rows() - 1) / rows() * rows();
    const std::int64_t pn = (tn + cols() - 1) / cols() * cols();
    // Double-buffered, so two padded tiles per input buffer; bytes * 8.
    return 2 * pm * tk * mode.a_bits <= 8 * hw.if_buffer_bytes &&
           2 * pn * tk * mode.w_bits <= 8 * hw.w_buffer_bytes &&
           rows() * cols() <= hw.of_buffer_bytes;
  }

  double tile_cycles(std::int64_t tm, std::int64_t tn, std::int64_t tk) const {
    const std::int64_t u = (tm + rows() - 1) / rows();
    const std::int64_t v = (tn + cols() - 1) / cols();
    const double compute = static_cast<double>(u * v * (tk + 2 * hw.array_dim - 1));
    const double bytes = static_cast<double>(u * rows() * tk * mode.a_bits) / 8.0 +
                         static_cast<double>(v * cols() * tk * mode.w_bits) / 8.0;
    return std::max(compute, bytes / hw.dram_bandwidth_bytes_per_cycle);
  }

  double cost(const dybit::LayerShape& l, std::int64_t tm, std::int64_t tn,
              std::int64_t tk) const {
    double total = 0;
    for (std::int64_t m0 = 0; m0 < l.gemm_m; m0 += tm) {
      for (std::int64_t n0 = 0; n0 < l.gemm_n; n0 += tn) {
        for (std::int64_t k0 = 0; k0 < l.gemm_k; k0 += tk) {
          total += tile_cycles(std::min(tm, l.gemm_m - m0), std::min(tn, l.gemm_n - n0),
                               std::min(tk, l.gemm_k - k0));
        }
      }
    }
    return total +
           static_cast<double>(l.gemm_m * l.gemm_n) / hw.dram_bandwidth_bytes_per_cycle;
  }

  /// Minimum cost over all feasible tilings; infinity if none fits.
  double best_cost(const dybit::LayerShape& l) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t tm = 1; tm <= l.gemm_m; ++tm) {
      for (std::int64_t tn = 1; tn <= l.gemm_n; ++tn) {
        for (std::int64_t tk = 1; tk <= l.gemm_k; ++tk) {
          if (fits(tm, tn, tk)) best = std::min(best, cost(l, tm, tn, tk));
        }
      }
    }
    return best;
  }
};

}  // namespace oracle

#endif  // DYBIT_TESTS_ORACLES_HPP_
