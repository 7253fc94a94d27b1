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

// Serial reference kernels. Plain loops and a single pairwise tree over the
// whole range; no chunking.

#include <algorithm>
#include <cmath>

#include "dybit/errors.hpp"
#include "dybit/reduce.hpp"
#include "dybit/tensor.hpp"
#include "../tensor_common.hpp"

namespace dybit::reference {

double compute_scale(const TensorF32& t, const FormatSpec& spec) {
  if (t.size() == 0) throw ValueError("cannot scale an empty tensor");
  float peak = 0.0f;
  for (const float x : t.data) peak = std::max(peak, std::fabs(x));
  if (peak == 0.0f) return 1.0;
  return peak / max_value(spec);
}

QuantizedTensor quantize_tensor(const TensorF32& t, const FormatSpec& spec, double scale) {
  dybit::validate(spec);
  detail::check_scale(scale);
  dybit::validate(t);
  QuantizedTensor q{spec, scale, t.shape, {}};
  q.codes.reserve(t.size());
  for (const float x : t.data) q.codes.push_back(detail::quantize_element(x, scale, spec));
  return q;
}

TensorF32 dequantize_tensor(const QuantizedTensor& q) {
  detail::check_codes(q);
  TensorF32 out;
  out.shape = q.shape;
  out.data.reserve(q.codes.size());
  for (const DyBitCode c : q.codes) {
    out.data.push_back(detail::dequantize_element(c, q.scale, q.spec));
  }
  return out;
}

TensorStats tensor_stats(const TensorF32& t) {
  if (t.size() == 0) throw ValueError("statistics of an empty tensor");
  const auto& x = t.data;
  const double n = static_cast<double>(x.size());
  TensorStats s;
  s.mean = pairwise_sum(0, x.size(), [&](std::size_t i) { return double{x[i]}; }) / n;
  const double ss = pairwise_sum(0, x.size(), [&](std::size_t i) {
    const double d = double{x[i]} - s.mean;
    return d * d;
  });
  s.std = std::sqrt(ss / n);
  for (const float v : x) s.max_abs = std::max(s.max_abs, double{std::fabs(v)});
  return s;
}

QuantMetrics rmse(const TensorF32& original, const TensorF32& quantized) {
  detail::check_pair(original, quantized);
  const auto& x = original.data;
  const auto& y = quantized.data;
  QuantMetrics m;
  m.n_elements = x.size();
  m.sigma = reference::tensor_stats(original).std;
  if (m.sigma == 0.0) {
    if (x != y) throw ValueError("rmse undefined: constant tensor was altered");
    return m;
  }
  const double ss = pairwise_sum(0, x.size(), [&](std::size_t i) {
    const double e = (double{x[i]} - double{y[i]}) / m.sigma;
    return e * e;
  });
  m.rmse = std::sqrt(ss / static_cast<double>(x.size()));
  return m;
}

}  // namespace dybit::reference
