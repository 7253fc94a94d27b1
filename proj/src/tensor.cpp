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

#include "dybit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "dybit/errors.hpp"
#include "dybit/reduce.hpp"
#include "tensor_common.hpp"

namespace dybit {

namespace {

using Index = std::ptrdiff_t;

// Chunk partials in parallel, then the same pairwise rule over the partials.
template <typename Term>
double chunked_sum(std::size_t n, const Term& term) {
  if (n <= kSumChunk) return pairwise_sum(0, n, term);
  const std::size_t chunks = (n + kSumChunk - 1) / kSumChunk;
  std::vector<double> partial(chunks);
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < static_cast<Index>(chunks); ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kSumChunk;
    partial[c] = pairwise_sum(begin, std::min(n, begin + kSumChunk), term);
  }
  return pairwise_sum(0, chunks, [&](std::size_t i) { return partial[i]; }, 1);
}

double parallel_max_abs(const std::vector<float>& data) {
  float result = 0.0f;
  const Index n = static_cast<Index>(data.size());
#pragma omp parallel for reduction(max : result) schedule(static)
  for (Index i = 0; i < n; ++i) result = std::max(result, std::fabs(data[i]));
  return result;
}

}  // namespace

TensorF32::TensorF32(std::vector<std::int64_t> s, std::vector<float> d)
    : shape(std::move(s)), data(std::move(d)) {
  validate(*this);
}

std::size_t element_count(const std::vector<std::int64_t>& shape) {
  std::size_t count = 1;
  for (const std::int64_t dim : shape) {
    if (dim <= 0) throw ValueError("tensor dimensions must be positive");
    count *= static_cast<std::size_t>(dim);
  }
  return count;
}

void validate(const TensorF32& t) {
  if (element_count(t.shape) != t.data.size()) {
    throw ValueError("tensor shape does not match its element count");
  }
  bool finite = true;
  const Index n = static_cast<Index>(t.data.size());
#pragma omp parallel for reduction(&& : finite) schedule(static)
  for (Index i = 0; i < n; ++i) finite = finite && std::isfinite(t.data[i]);
  if (!finite) throw ValueError("tensor contains a non-finite element");
}

double compute_scale(const TensorF32& t, const FormatSpec& spec) {
  if (t.size() == 0) throw ValueError("cannot scale an empty tensor");
  const double peak = parallel_max_abs(t.data);
  if (peak == 0.0) return 1.0;
  return peak / max_value(spec);
}

QuantizedTensor quantize_tensor(const TensorF32& t, const FormatSpec& spec, double scale) {
  validate(spec);
  detail::check_scale(scale);
  validate(t);
  QuantizedTensor q{spec, scale, t.shape, std::vector<DyBitCode>(t.size())};
  const Index n = static_cast<Index>(t.size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) q.codes[i] = detail::quantize_element(t.data[i], scale, spec);
  return q;
}

TensorF32 dequantize_tensor(const QuantizedTensor& q) {
  detail::check_codes(q);
  TensorF32 out;
  out.shape = q.shape;
  out.data.resize(q.codes.size());
  const Index n = static_cast<Index>(q.codes.size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    out.data[i] = detail::dequantize_element(q.codes[i], q.scale, q.spec);
  }
  return out;
}

TensorF32 fake_quantize(const TensorF32& t, const FormatSpec& spec) {
  return dequantize_tensor(quantize_tensor(t, spec, compute_scale(t, spec)));
}

TensorStats tensor_stats(const TensorF32& t) {
  if (t.size() == 0) throw ValueError("statistics of an empty tensor");
  const auto& x = t.data;
  const double n = static_cast<double>(x.size());
  TensorStats s;
  s.mean = chunked_sum(x.size(), [&](std::size_t i) { return double{x[i]}; }) / n;
  const double mean = s.mean;
  const double ss = chunked_sum(x.size(), [&](std::size_t i) {
    const double d = double{x[i]} - mean;
    return d * d;
  });
  s.std = std::sqrt(ss / n);
  s.max_abs = parallel_max_abs(x);
  return s;
}

QuantMetrics rmse(const TensorF32& original, const TensorF32& quantized) {
  detail::check_pair(original, quantized);
  const auto& x = original.data;
  const auto& y = quantized.data;
  QuantMetrics m;
  m.n_elements = x.size();
  m.sigma = tensor_stats(original).std;
  if (m.sigma == 0.0) {
    if (x != y) throw ValueError("rmse undefined: constant tensor was altered");
    return m;
  }
  const double sigma = m.sigma;
  const double ss = chunked_sum(x.size(), [&](std::size_t i) {
    const double e = (double{x[i]} - double{y[i]}) / sigma;
    return e * e;
  });
  m.rmse = std::sqrt(ss / static_cast<double>(x.size()));
  return m;
}

double quantization_rmse(const TensorF32& t, const FormatSpec& spec) {
  return rmse(t, fake_quantize(t, spec)).rmse;
}

}  // namespace dybit
