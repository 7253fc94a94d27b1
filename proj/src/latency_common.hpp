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

#ifndef DYBIT_SRC_LATENCY_COMMON_HPP_
#define DYBIT_SRC_LATENCY_COMMON_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "dybit/latency.hpp"

namespace dybit::sim::detail {

constexpr std::int64_t ceil_div(std::int64_t a, std::int64_t b) noexcept { return (a + b - 1) / b; }

// Write-back precision of layer outputs, in bytes per element.
inline constexpr double kOutputBytes = 1.0;

struct Geometry {
  Geometry(const HwConfig& hw, const PrecisionMode& mode)
      : n(hw.array_dim),
        rows(effective_array(hw, mode).rows),
        cols(effective_array(hw, mode).cols),
        a_bits(mode.a_bits),
        w_bits(mode.w_bits),
        bandwidth(hw.dram_bandwidth_bytes_per_cycle),
        if_bytes(hw.if_buffer_bytes),
        w_bytes(hw.w_buffer_bytes),
        of_bytes(hw.of_buffer_bytes) {}

  std::int64_t folds_m(std::int64_t tm) const noexcept { return ceil_div(tm, rows); }
  std::int64_t folds_n(std::int64_t tn) const noexcept { return ceil_div(tn, cols); }

  // Padded tile footprints in bytes; widths are powers of two so these are
  // exact multiples of a quarter byte.
  double if_tile_bytes(std::int64_t u, std::int64_t tk) const noexcept {
    return static_cast<double>(u * rows * tk * a_bits) / 8.0;
  }
  double w_tile_bytes(std::int64_t v, std::int64_t tk) const noexcept {
    return static_cast<double>(v * cols * tk * w_bits) / 8.0;
  }

  bool of_fits() const noexcept {
    return static_cast<double>(rows * cols) * kOutputBytes <= static_cast<double>(of_bytes);
  }

  bool fits(std::int64_t u, std::int64_t v, std::int64_t tk) const noexcept {
    return of_fits() && 2.0 * if_tile_bytes(u, tk) <= static_cast<double>(if_bytes) &&
           2.0 * w_tile_bytes(v, tk) <= static_cast<double>(w_bytes);
  }

  /// Largest tile_k that fits for the given folds (0 if none).
  std::int64_t max_tile_k(std::int64_t u, std::int64_t v) const noexcept {
    if (!of_fits()) return 0;
    // 2 * folds * dim * tk * bits / 8 <= buffer
    const std::int64_t by_if = (4 * if_bytes) / (u * rows * a_bits);
    const std::int64_t by_w = (4 * w_bytes) / (v * cols * w_bits);
    return std::min(by_if, by_w);
  }

  double compute(std::int64_t u, std::int64_t v, std::int64_t tk) const noexcept {
    return static_cast<double>(u * v * (tk + 2 * n - 1));
  }
  double transfer(std::int64_t u, std::int64_t v, std::int64_t tk) const noexcept {
    return (if_tile_bytes(u, tk) + w_tile_bytes(v, tk)) / bandwidth;
  }
  double tile(std::int64_t u, std::int64_t v, std::int64_t tk) const noexcept {
    return std::max(compute(u, v, tk), transfer(u, v, tk));
  }

  struct Piece {
    std::int64_t size;
    std::int64_t count;
  };
  static std::array<Piece, 2> split(std::int64_t extent, std::int64_t tile) noexcept {
    return {Piece{tile, extent / tile}, Piece{extent % tile, extent % tile ? 1 : 0}};
  }

  double layer_cost(const LayerShape& layer, const Tiling& t) const noexcept {
    double total = 0.0;
    for (const Piece pm : split(layer.gemm_m, t.tile_m)) {
      if (pm.count == 0) continue;
      const std::int64_t u = folds_m(pm.size);
      for (const Piece pn : split(layer.gemm_n, t.tile_n)) {
        if (pn.count == 0) continue;
        const std::int64_t v = folds_n(pn.size);
        for (const Piece pk : split(layer.gemm_k, t.tile_k)) {
          if (pk.count == 0) continue;
          total += static_cast<double>(pm.count * pn.count * pk.count) * tile(u, v, pk.size);
        }
      }
    }
    return total + static_cast<double>(layer.gemm_m * layer.gemm_n) * kOutputBytes / bandwidth;
  }

  std::int64_t n;
  std::int64_t rows;
  std::int64_t cols;
  int a_bits;
  int w_bits;
  double bandwidth;
  std::int64_t if_bytes;
  std::int64_t w_bytes;
  std::int64_t of_bytes;
};

/// Multiples of `unit` below `extent`, then `extent` itself.
inline std::vector<std::int64_t> aligned_candidates(std::int64_t extent, std::int64_t unit) {
  std::vector<std::int64_t> out;
  for (std::int64_t t = unit; t < extent; t += unit) out.push_back(t);
  out.push_back(extent);
  return out;
}

/// Distinct ceil(K/q), q = 1..K, in descending order: for a given number of
/// K-steps this is the most balanced split.
inline std::vector<std::int64_t> k_candidates(std::int64_t k) {
  std::vector<std::int64_t> out;
  std::int64_t q = 1;
  while (true) {
    const std::int64_t t = ceil_div(k, q);
    out.push_back(t);
    if (t == 1) break;
    q = ceil_div(k, t - 1);
  }
  return out;
}

/// Best tiling among all grid points with the given tile_m.
inline void scan_row(const Geometry& g, const LayerShape& layer, const TilingGrid& grid,
                     std::int64_t tm, std::optional<LayerLatency>& best) {
  const std::int64_t u = g.folds_m(tm);
  for (const std::int64_t tn : grid.n) {
    const std::int64_t kmax = g.max_tile_k(u, g.folds_n(tn));
    for (const std::int64_t tk : grid.k) {
      if (tk > kmax) continue;
      LayerLatency cand;
      cand.tiling = Tiling{tm, tn, tk};
      cand.cost = g.layer_cost(layer, cand.tiling);
      if (!best || better(cand, *best)) best = cand;
    }
  }
}

}  // namespace dybit::sim::detail

#endif  // DYBIT_SRC_LATENCY_COMMON_HPP_
