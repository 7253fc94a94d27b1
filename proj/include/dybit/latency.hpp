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

// Tile-level latency model of an N x N output-stationary systolic array whose
// PEs fuse low-precision multiplies, so a P1/P2 layer sees an effective
// (8/P1)N x (8/P2)N array.
//
// For a tile (tm, tn, tk) with effective array R x C, u = ceil(tm/R) and
// v = ceil(tn/C) folds:
//
//   compute  = u * v * (tk + 2N - 1)          K streamed, physical fill/drain
//   transfer = (u*R*tk*P1 + v*C*tk*P2) / 8 / bandwidth
//   tile     = max(compute, transfer)         double-buffered loads
//
// A layer is the sum over its tiles (edge tiles included) plus the 8-bit
// output write-back, M*N bytes / bandwidth. IF and W buffers hold two padded
// tiles each; the OF buffer holds one R x C block of 8-bit outputs.

#ifndef DYBIT_LATENCY_HPP_
#define DYBIT_LATENCY_HPP_

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dybit/model.hpp"
#include "dybit/pe.hpp"

namespace dybit::sim {

using pe::PrecisionMode;

struct HwConfig {
  int array_dim = 16;
  std::int64_t if_buffer_bytes = 0;
  std::int64_t w_buffer_bytes = 0;
  std::int64_t of_buffer_bytes = 0;
  double dram_bandwidth_bytes_per_cycle = 0.0;
  double frequency_mhz = 0.0;

  friend bool operator==(const HwConfig&, const HwConfig&) = default;
};

void validate(const HwConfig& hw);

struct Tiling {
  std::int64_t tile_m = 1;
  std::int64_t tile_n = 1;
  std::int64_t tile_k = 1;

  std::int64_t volume() const noexcept { return tile_m * tile_n * tile_k; }
  friend constexpr bool operator==(const Tiling&, const Tiling&) = default;
  friend constexpr auto operator<=>(const Tiling&, const Tiling&) = default;
};

struct ArrayDims {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  friend constexpr bool operator==(const ArrayDims&, const ArrayDims&) = default;
};

ArrayDims effective_array(const HwConfig& hw, const PrecisionMode& mode);

/// Buffer and bounds check of a single tiling.
bool is_feasible(const Tiling& tile, const LayerShape& layer, const HwConfig& hw,
                 const PrecisionMode& mode);

struct TileCost {
  double compute_cycles = 0.0;
  double transfer_cycles = 0.0;
  double cycles = 0.0;
};

/// Cost of one tile of the given size. Throws ValueError if it does not fit.
TileCost tile_latency(const Tiling& tile, const HwConfig& hw, const PrecisionMode& mode);

/// Exact (unrounded) cycle count of a whole layer under `tile`, edge tiles
/// and write-back included.
double layer_cost(const LayerShape& layer, const Tiling& tile, const HwConfig& hw,
                  const PrecisionMode& mode);

/// Per-dimension candidate sizes: multiples of the effective array dims plus
/// the full extent for M and N, and the distinct ceil(K/q) for K.
struct TilingGrid {
  std::vector<std::int64_t> m, n, k;
};
TilingGrid candidate_grid(const LayerShape& layer, const HwConfig& hw, const PrecisionMode& mode);

/// Feasible tilings of the candidate grid in lexicographic order. Throws
/// CapacityError when none fit.
std::vector<Tiling> enumerate_tilings(const LayerShape& layer, const HwConfig& hw,
                                      const PrecisionMode& mode);

struct LayerLatency {
  std::uint64_t cycles = 0;  // ceil(cost)
  double cost = 0.0;
  Tiling tiling;
};

/// True if `a` should be preferred over `b`: lower cost, then larger tile
/// volume, then lexicographically smaller dims.
bool better(const LayerLatency& a, const LayerLatency& b) noexcept;

/// Minimum over the candidate grid (OpenMP over tile_m candidates).
LayerLatency layer_latency(const LayerShape& layer, const PrecisionMode& mode,
                           const HwConfig& hw);

struct LayerReport {
  std::string name;
  PrecisionMode mode;
  std::uint64_t cycles = 0;
  Tiling tiling;

  friend bool operator==(const LayerReport&, const LayerReport&) = default;
};

struct LatencyReport {
  std::vector<LayerReport> layers;
  std::uint64_t total_cycles = 0;

  friend bool operator==(const LatencyReport&, const LatencyReport&) = default;
};

/// Layers run back to back; the total is the sum of per-layer cycles.
LatencyReport model_latency(std::span<const LayerShape> layers, const QuantAssignment& assign,
                            const HwConfig& hw);
LatencyReport model_latency(const ModelGraph& model, const QuantAssignment& assign,
                            const HwConfig& hw);

namespace reference {

LayerLatency layer_latency(const LayerShape& layer, const PrecisionMode& mode,
                           const HwConfig& hw);

}  // namespace reference

}  // namespace dybit::sim

#endif  // DYBIT_LATENCY_HPP_
