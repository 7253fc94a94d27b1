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

#include "dybit/latency.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>

#include "dybit/errors.hpp"
#include "latency_common.hpp"

namespace dybit::sim {

void validate(const HwConfig& hw) {
  if (hw.array_dim < 1) throw ValueError("array_dim must be positive");
  if (hw.if_buffer_bytes < 1 || hw.w_buffer_bytes < 1 || hw.of_buffer_bytes < 1) {
    throw ValueError("buffer sizes must be positive");
  }
  if (!(hw.dram_bandwidth_bytes_per_cycle > 0.0)) {
    throw ValueError("dram_bandwidth_bytes_per_cycle must be positive");
  }
  if (!(hw.frequency_mhz > 0.0) || !std::isfinite(hw.frequency_mhz)) {
    throw ValueError("frequency_mhz must be positive");
  }
}

ArrayDims effective_array(const HwConfig& hw, const PrecisionMode& mode) {
  pe::validate(mode);
  return ArrayDims{static_cast<std::int64_t>(8 / mode.a_bits) * hw.array_dim,
                   static_cast<std::int64_t>(8 / mode.w_bits) * hw.array_dim};
}

bool is_feasible(const Tiling& tile, const LayerShape& layer, const HwConfig& hw,
                 const PrecisionMode& mode) {
  if (tile.tile_m < 1 || tile.tile_n < 1 || tile.tile_k < 1) return false;
  if (tile.tile_m > layer.gemm_m || tile.tile_n > layer.gemm_n || tile.tile_k > layer.gemm_k) {
    return false;
  }
  const detail::Geometry g(hw, mode);
  return g.fits(g.folds_m(tile.tile_m), g.folds_n(tile.tile_n), tile.tile_k);
}

TileCost tile_latency(const Tiling& tile, const HwConfig& hw, const PrecisionMode& mode) {
  validate(hw);
  const detail::Geometry g(hw, mode);
  if (tile.tile_m < 1 || tile.tile_n < 1 || tile.tile_k < 1) {
    throw ValueError("tile dimensions must be positive");
  }
  const std::int64_t u = g.folds_m(tile.tile_m);
  const std::int64_t v = g.folds_n(tile.tile_n);
  if (!g.fits(u, v, tile.tile_k)) throw ValueError("tile does not fit the on-chip buffers");
  TileCost c;
  c.compute_cycles = g.compute(u, v, tile.tile_k);
  c.transfer_cycles = g.transfer(u, v, tile.tile_k);
  c.cycles = std::max(c.compute_cycles, c.transfer_cycles);
  return c;
}

double layer_cost(const LayerShape& layer, const Tiling& tile, const HwConfig& hw,
                  const PrecisionMode& mode) {
  validate(layer);
  validate(hw);
  if (!is_feasible(tile, layer, hw, mode)) {
    throw ValueError("tiling is infeasible for layer '" + layer.name + "'");
  }
  return detail::Geometry(hw, mode).layer_cost(layer, tile);
}

TilingGrid candidate_grid(const LayerShape& layer, const HwConfig& hw, const PrecisionMode& mode) {
  validate(layer);
  const ArrayDims eff = effective_array(hw, mode);
  return TilingGrid{detail::aligned_candidates(layer.gemm_m, eff.rows),
                    detail::aligned_candidates(layer.gemm_n, eff.cols),
                    detail::k_candidates(layer.gemm_k)};
}

std::vector<Tiling> enumerate_tilings(const LayerShape& layer, const HwConfig& hw,
                                      const PrecisionMode& mode) {
  validate(hw);
  const TilingGrid grid = candidate_grid(layer, hw, mode);
  const detail::Geometry g(hw, mode);
  std::vector<Tiling> out;
  for (const std::int64_t tm : grid.m) {
    for (const std::int64_t tn : grid.n) {
      const std::int64_t kmax = g.max_tile_k(g.folds_m(tm), g.folds_n(tn));
      for (const std::int64_t tk : grid.k) {
        if (tk <= kmax) out.push_back(Tiling{tm, tn, tk});
      }
    }
  }
  if (out.empty()) {
    throw CapacityError("no tiling of layer '" + layer.name + "' fits the buffers at mode " +
                            pe::to_string(mode),
                        layer.name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool better(const LayerLatency& a, const LayerLatency& b) noexcept {
  if (a.cost != b.cost) return a.cost < b.cost;
  if (a.tiling.volume() != b.tiling.volume()) return a.tiling.volume() > b.tiling.volume();
  return a.tiling < b.tiling;
}

LayerLatency layer_latency(const LayerShape& layer, const PrecisionMode& mode,
                           const HwConfig& hw) {
  validate(hw);
  const TilingGrid grid = candidate_grid(layer, hw, mode);
  const detail::Geometry g(hw, mode);

  std::optional<LayerLatency> best;
  const auto count = static_cast<std::ptrdiff_t>(grid.m.size());
#pragma omp parallel
  {
    std::optional<LayerLatency> local;
#pragma omp for schedule(dynamic, 1) nowait
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      detail::scan_row(g, layer, grid, grid.m[i], local);
    }
#pragma omp critical(dybit_layer_latency)
    {
      if (local && (!best || better(*local, *best))) best = local;
    }
  }
  if (!best) {
    throw CapacityError("no tiling of layer '" + layer.name + "' fits the buffers at mode " +
                            pe::to_string(mode),
                        layer.name);
  }
  best->cycles = static_cast<std::uint64_t>(std::ceil(best->cost));
  return *best;
}

LatencyReport model_latency(std::span<const LayerShape> layers, const QuantAssignment& assign,
                            const HwConfig& hw) {
  if (assign.size() != layers.size()) {
    throw InputError("assignment covers " + std::to_string(assign.size()) + " layers, model has " +
                     std::to_string(layers.size()));
  }
  LatencyReport report;
  report.layers.resize(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    LayerLatency l;
    try {
      l = layer_latency(layers[i], assign[i], hw);
    } catch (const CapacityError& e) {
      throw CapacityError(e.what(), layers[i].name);
    }
    report.layers[i] = LayerReport{layers[i].name, assign[i], l.cycles, l.tiling};
    report.total_cycles += l.cycles;
  }
  return report;
}

LatencyReport model_latency(const ModelGraph& model, const QuantAssignment& assign,
                            const HwConfig& hw) {
  const std::vector<LayerShape> shapes = model.shapes();
  return model_latency(std::span<const LayerShape>(shapes), assign, hw);
}

}  // namespace dybit::sim
