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
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>
#include <omp.h>

#include "dybit/errors.hpp"
#include "dybit/latency.hpp"
#include "dybit/synthetic.hpp"
#include "oracles.hpp"

namespace dybit::sim {
namespace {

constexpr PrecisionMode kModes[] = {{8, 8}, {8, 4}, {8, 2}, {4, 8}, {4, 4},
                                    {4, 2}, {2, 8}, {2, 4}, {2, 2}};

HwConfig ample(int n) {
  HwConfig hw;
  hw.array_dim = n;
  hw.if_buffer_bytes = std::int64_t{1} << 30;
  hw.w_buffer_bytes = std::int64_t{1} << 30;
  hw.of_buffer_bytes = std::int64_t{1} << 20;
  hw.dram_bandwidth_bytes_per_cycle = 1 << 20;
  hw.frequency_mhz = 200;
  return hw;
}

HwConfig random_small_hw(std::mt19937_64& rng) {
  HwConfig hw;
  hw.array_dim = static_cast<int>(1 + rng() % 3);
  hw.if_buffer_bytes = 8 + static_cast<std::int64_t>(rng() % 200);
  hw.w_buffer_bytes = 8 + static_cast<std::int64_t>(rng() % 200);
  hw.of_buffer_bytes = 1 << 12;
  const double bws[] = {0.5, 1, 2, 4, 8};
  hw.dram_bandwidth_bytes_per_cycle = bws[rng() % 5];
  hw.frequency_mhz = 100;
  return hw;
}

TEST(Latency, EffectiveArray) {
  const HwConfig hw = ample(16);
  EXPECT_EQ(effective_array(hw, {8, 8}), (ArrayDims{16, 16}));
  EXPECT_EQ(effective_array(hw, {4, 2}), (ArrayDims{32, 64}));
  EXPECT_EQ(effective_array(hw, {2, 2}), (ArrayDims{64, 64}));
}

TEST(Latency, TileCostByHand) {
  HwConfig hw = ample(16);
  hw.dram_bandwidth_bytes_per_cycle = 8;
  // One fold each way: 64 + 2*16 - 1 compute cycles, 2048 bytes at 8 B/cycle.
  const TileCost c = tile_latency(Tiling{16, 16, 64}, hw, {8, 8});
  EXPECT_EQ(c.compute_cycles, 95.0);
  EXPECT_EQ(c.transfer_cycles, 256.0);
  EXPECT_EQ(c.cycles, 256.0);
  // 2-bit operands: same bytes cover a 64 x 64 effective array.
  const TileCost d = tile_latency(Tiling{64, 64, 64}, hw, {2, 2});
  EXPECT_EQ(d.compute_cycles, 95.0);
  EXPECT_EQ(d.transfer_cycles, 256.0);
}

TEST(Latency, MatchesFullIntegerGridOracle) {
  std::mt19937_64 rng(2024);
  int compared = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const HwConfig hw = random_small_hw(rng);
    const LayerShape layer{"t" + std::to_string(trial), 1 + static_cast<std::int64_t>(rng() % 16),
                           1 + static_cast<std::int64_t>(rng() % 16),
                           1 + static_cast<std::int64_t>(rng() % 16)};
    for (const PrecisionMode mode : kModes) {
      const oracle::LatencyOracle o{hw, mode};
      const double want = o.best_cost(layer);
      if (std::isinf(want)) {
        EXPECT_THROW(layer_latency(layer, mode, hw), CapacityError);
        continue;
      }
      const LayerLatency got = layer_latency(layer, mode, hw);
      ASSERT_EQ(got.cost, want) << layer.gemm_m << "x" << layer.gemm_n << "x" << layer.gemm_k
                                << " mode " << pe::to_string(mode);
      EXPECT_EQ(got.cycles, static_cast<std::uint64_t>(std::ceil(want)));
      EXPECT_EQ(got.cost, o.cost(layer, got.tiling.tile_m, got.tiling.tile_n, got.tiling.tile_k));
      ++compared;
    }
  }
  EXPECT_GT(compared, 200);
}

TEST(Latency, ParallelSearchMatchesSerialReference) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    HwConfig hw = ample(4 + static_cast<int>(rng() % 13));
    hw.if_buffer_bytes = 1024 + static_cast<std::int64_t>(rng() % 65536);
    hw.w_buffer_bytes = 1024 + static_cast<std::int64_t>(rng() % 65536);
    hw.dram_bandwidth_bytes_per_cycle = 1 + static_cast<double>(rng() % 64);
    const LayerShape layer{"p", 1 + static_cast<std::int64_t>(rng() % 3000),
                           1 + static_cast<std::int64_t>(rng() % 700),
                           1 + static_cast<std::int64_t>(rng() % 600)};
    for (const PrecisionMode mode : kModes) {
      LayerLatency serial;
      try {
        serial = reference::layer_latency(layer, mode, hw);
      } catch (const CapacityError&) {
        EXPECT_THROW(layer_latency(layer, mode, hw), CapacityError);
        continue;
      }
      for (int threads : {1, 3, 8}) {
        omp_set_num_threads(threads);
        const LayerLatency par = layer_latency(layer, mode, hw);
        ASSERT_EQ(par.cycles, serial.cycles);
        ASSERT_EQ(par.cost, serial.cost);
        ASSERT_EQ(par.tiling, serial.tiling);
      }
    }
  }
}

TEST(Latency, EnumeratedTilingsAreFeasibleAndContainTheOptimum) {
  HwConfig hw = ample(4);
  hw.if_buffer_bytes = 512;
  hw.w_buffer_bytes = 384;
  hw.dram_bandwidth_bytes_per_cycle = 2;
  const LayerShape layer{"e", 50, 37, 90};
  for (const PrecisionMode mode : kModes) {
    const std::vector<Tiling> all = enumerate_tilings(layer, hw, mode);
    ASSERT_FALSE(all.empty());
    EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
    for (const Tiling& t : all) EXPECT_TRUE(is_feasible(t, layer, hw, mode));
    const LayerLatency best = layer_latency(layer, mode, hw);
    EXPECT_NE(std::find(all.begin(), all.end(), best.tiling), all.end());
    for (const Tiling& t : all) EXPECT_GE(layer_cost(layer, t, hw, mode), best.cost);
  }
}

TEST(Latency, LowerPrecisionIsNeverSlower) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    HwConfig hw = ample(2 + static_cast<int>(rng() % 15));
    hw.if_buffer_bytes = 4096 + static_cast<std::int64_t>(rng() % 100000);
    hw.w_buffer_bytes = 4096 + static_cast<std::int64_t>(rng() % 100000);
    hw.dram_bandwidth_bytes_per_cycle = 1 + static_cast<double>(rng() % 32);
    const LayerShape layer{"m", 1 + static_cast<std::int64_t>(rng() % 400),
                           1 + static_cast<std::int64_t>(rng() % 500),
                           1 + static_cast<std::int64_t>(rng() % 400)};
    for (const PrecisionMode hi : kModes) {
      for (const PrecisionMode lo : kModes) {
        if (lo.a_bits > hi.a_bits || lo.w_bits > hi.w_bits) continue;
        EXPECT_LE(layer_latency(layer, lo, hw).cycles, layer_latency(layer, hi, hw).cycles)
            << pe::to_string(lo) << " vs " << pe::to_string(hi);
      }
    }
  }
}

TEST(Latency, SpeedupNeverExceedsComputeCeiling) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    HwConfig hw = ample(1 + static_cast<int>(rng() % 16));
    hw.dram_bandwidth_bytes_per_cycle = 0.5 + static_cast<double>(rng() % 64);
    const LayerShape layer{"c", 1 + static_cast<std::int64_t>(rng() % 600),
                           1 + static_cast<std::int64_t>(rng() % 600),
                           1 + static_cast<std::int64_t>(rng() % 600)};
    const double base = static_cast<double>(layer_latency(layer, {8, 8}, hw).cycles);
    for (const PrecisionMode mode : kModes) {
      const double s = base / static_cast<double>(layer_latency(layer, mode, hw).cycles);
      EXPECT_LE(s, pe_throughput(mode) + 1e-12) << pe::to_string(mode);
    }
  }
}

TEST(Latency, ComputeBoundGemmScales) {
  const HwConfig hw = ample(16);
  const LayerShape big{"gemm4096", 4096, 4096, 4096};
  const double base = static_cast<double>(layer_latency(big, {8, 8}, hw).cycles);
  const double s4 = base / static_cast<double>(layer_latency(big, {4, 4}, hw).cycles);
  const double s2 = base / static_cast<double>(layer_latency(big, {2, 2}, hw).cycles);
  EXPECT_GE(s4, 3.5);
  EXPECT_LE(s4, 4.0);
  EXPECT_GE(s2, 12.0);
  EXPECT_LE(s2, 16.0);
}

TEST(Latency, ModelIsSumOfLayers) {
  const ModelGraph model = synth::toy_model(4, 3);
  const HwConfig hw = synth::toy_hw();
  const QuantAssignment assign = {{8, 8}, {4, 2}, {2, 4}, {2, 2}};
  const LatencyReport r = model_latency(model, assign, hw);
  ASSERT_EQ(r.layers.size(), 4u);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const LayerLatency l = layer_latency(model.layers[i].shape, assign[i], hw);
    EXPECT_EQ(r.layers[i].cycles, l.cycles);
    EXPECT_EQ(r.layers[i].tiling, l.tiling);
    EXPECT_EQ(r.layers[i].name, model.layers[i].shape.name);
    total += l.cycles;
  }
  EXPECT_EQ(r.total_cycles, total);
}

TEST(Latency, ErrorsNameTheLayer) {
  HwConfig hw = ample(16);
  hw.of_buffer_bytes = 100;  // smaller than one 16 x 16 output block
  const std::vector<LayerShape> layers = {{"first", 8, 8, 8}, {"second", 8, 8, 8}};
  try {
    model_latency(layers, uniform_assignment(2, {8, 8}), hw);
    FAIL() << "expected a capacity error";
  } catch (const CapacityError& e) {
    EXPECT_EQ(e.layer(), "first");
  }
  EXPECT_THROW(model_latency(layers, uniform_assignment(1, {8, 8}), ample(16)), InputError);
  HwConfig bad = ample(16);
  bad.dram_bandwidth_bytes_per_cycle = 0;
  EXPECT_THROW(validate(bad), ValueError);
  EXPECT_THROW(layer_latency(LayerShape{"z", 0, 1, 1}, {8, 8}, ample(16)), ValueError);
  EXPECT_THROW(layer_latency(LayerShape{"z", 1, 1, 1}, {3, 8}, ample(16)), ModeError);
}

TEST(Latency, ConvolutionLowering) {
  const LayerShape s = lower_conv("c", ConvGeometry{1, 16, 32, 3, 3, 8, 8});
  EXPECT_EQ(s, (LayerShape{"c", 64, 32, 144}));
}

}  // namespace
}  // namespace dybit::sim
