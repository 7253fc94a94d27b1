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

#include <cmath>
#include <optional>

#include "dybit/errors.hpp"
#include "dybit/latency.hpp"
#include "../latency_common.hpp"

namespace dybit::sim::reference {

LayerLatency layer_latency(const LayerShape& layer, const PrecisionMode& mode,
                           const HwConfig& hw) {
  validate(hw);
  const TilingGrid grid = candidate_grid(layer, hw, mode);
  const detail::Geometry g(hw, mode);
  std::optional<LayerLatency> best;
  for (const std::int64_t tm : grid.m) detail::scan_row(g, layer, grid, tm, best);
  if (!best) {
    throw CapacityError("no tiling of layer '" + layer.name + "' fits the buffers at mode " +
                            pe::to_string(mode),
                        layer.name);
  }
  best->cycles = static_cast<std::uint64_t>(std::ceil(best->cost));
  return *best;
}

}  // namespace dybit::sim::reference
