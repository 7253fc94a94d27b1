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

#include "dybit/model.hpp"

#include "dybit/errors.hpp"

namespace dybit {

void validate(const LayerShape& layer) {
  if (layer.gemm_m < 1 || layer.gemm_n < 1 || layer.gemm_k < 1) {
    throw ValueError("layer '" + layer.name + "' has a non-positive GEMM dimension");
  }
}

LayerShape lower_conv(const std::string& name, const ConvGeometry& c) {
  return LayerShape{name, c.out_h * c.out_w * c.batch, c.c_out, c.c_in * c.kernel_h * c.kernel_w};
}

std::vector<LayerShape> ModelGraph::shapes() const {
  std::vector<LayerShape> out;
  out.reserve(layers.size());
  for (const auto& l : layers) out.push_back(l.shape);
  return out;
}

}  // namespace dybit
