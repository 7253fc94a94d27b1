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

// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include "dybit/latency.hpp"
#include "dybit/synthetic.hpp"
#include "dybit/tensor.hpp"

namespace {

const dybit::FormatSpec kSpec{4, true};

dybit::TensorF32 input(benchmark::State& state) {
  return dybit::synth::laplace_tensor({state.range(0)}, 1);
}

void BM_Quantize(benchmark::State& state) {
  const dybit::TensorF32 t = input(state);
  const double scale = dybit::compute_scale(t, kSpec);
  for (auto _ : state) benchmark::DoNotOptimize(dybit::quantize_tensor(t, kSpec, scale));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_QuantizeReference(benchmark::State& state) {
  const dybit::TensorF32 t = input(state);
  const double scale = dybit::compute_scale(t, kSpec);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dybit::reference::quantize_tensor(t, kSpec, scale));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Rmse(benchmark::State& state) {
  const dybit::TensorF32 t = input(state);
  const dybit::TensorF32 q = dybit::fake_quantize(t, kSpec);
  for (auto _ : state) benchmark::DoNotOptimize(dybit::rmse(t, q));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_RmseReference(benchmark::State& state) {
  const dybit::TensorF32 t = input(state);
  const dybit::TensorF32 q = dybit::fake_quantize(t, kSpec);
  for (auto _ : state) benchmark::DoNotOptimize(dybit::reference::rmse(t, q));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

dybit::sim::HwConfig bench_hw() {
  dybit::sim::HwConfig hw;
  hw.array_dim = 16;
  hw.if_buffer_bytes = 256 * 1024;
  hw.w_buffer_bytes = 256 * 1024;
  hw.of_buffer_bytes = 64 * 1024;
  hw.dram_bandwidth_bytes_per_cycle = 32;
  hw.frequency_mhz = 200;
  return hw;
}

const dybit::LayerShape kLayer{"conv", 3136, 64, 576};

void BM_LayerLatency(benchmark::State& state) {
  const dybit::sim::HwConfig hw = bench_hw();
  for (auto _ : state) benchmark::DoNotOptimize(dybit::sim::layer_latency(kLayer, {4, 4}, hw));
}

void BM_LayerLatencyReference(benchmark::State& state) {
  const dybit::sim::HwConfig hw = bench_hw();
  for (auto _ : state) {
    benchmark::DoNotOptimize(dybit::sim::reference::layer_latency(kLayer, {4, 4}, hw));
  }
}

}  // namespace

BENCHMARK(BM_Quantize)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_QuantizeReference)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_Rmse)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_RmseReference)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_LayerLatency)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LayerLatencyReference)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
