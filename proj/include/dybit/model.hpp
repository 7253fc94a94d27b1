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

#ifndef DYBIT_MODEL_HPP_
#define DYBIT_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dybit/pe.hpp"

namespace dybit {

/// GEMM-equivalent layer; convolutions arrive already lowered (im2col).
struct LayerShape {
  std::string name;
  std::int64_t gemm_m = 1;
  std::int64_t gemm_n = 1;
  std::int64_t gemm_k = 1;

  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

void validate(const LayerShape& layer);

/// Convolution geometry kept alongside the lowered GEMM shape:
/// M = out_h * out_w * batch, K = c_in * kernel_h * kernel_w, N = c_out.
struct ConvGeometry {
  std::int64_t batch = 1;
  std::int64_t c_in = 1;
  std::int64_t c_out = 1;
  std::int64_t kernel_h = 1;
  std::int64_t kernel_w = 1;
  std::int64_t out_h = 1;
  std::int64_t out_w = 1;

  friend bool operator==(const ConvGeometry&, const ConvGeometry&) = default;
};

LayerShape lower_conv(const std::string& name, const ConvGeometry& conv);

struct ModelLayer {
  LayerShape shape;
  std::optional<ConvGeometry> conv;  // set for layers described as convolutions
  std::string weights;               // blob id
  std::string calibration;           // blob id
  bool signed_activations = false;

  friend bool operator==(const ModelLayer&, const ModelLayer&) = default;
};

struct ModelGraph {
  std::string name;
  std::string source;
  std::vector<ModelLayer> layers;

  std::vector<LayerShape> shapes() const;
  friend bool operator==(const ModelGraph&, const ModelGraph&) = default;
};

/// Per-layer (activation, weight) widths, in layer order.
using QuantAssignment = std::vector<pe::PrecisionMode>;

inline QuantAssignment uniform_assignment(std::size_t layers, pe::PrecisionMode mode) {
  return QuantAssignment(layers, mode);
}

}  // namespace dybit

#endif  // DYBIT_MODEL_HPP_
