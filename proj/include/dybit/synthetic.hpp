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

// Deterministic synthetic inputs: tensors, toy models and a ResNet18 layer
// list. Distributions are drawn from std::mt19937_64 with hand-written
// transforms, so identical seeds give identical bits on every standard
// library.

#ifndef DYBIT_SYNTHETIC_HPP_
#define DYBIT_SYNTHETIC_HPP_

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "dybit/latency.hpp"
#include "dybit/model.hpp"
#include "dybit/search.hpp"
#include "dybit/tensor.hpp"

namespace dybit::synth {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer on [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double normal(double mean = 0.0, double stddev = 1.0);
  double laplace(double location = 0.0, double scale = 1.0);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

TensorF32 gaussian_tensor(std::vector<std::int64_t> shape, std::uint64_t seed,
                          double mean = 0.0, double stddev = 1.0);
TensorF32 laplace_tensor(std::vector<std::int64_t> shape, std::uint64_t seed,
                         double location = 0.0, double scale = 1.0);

/// Random GEMM layers "l0", "l1", ... with dimensions in [lo, hi].
ModelGraph toy_model(int layers, std::uint64_t seed, std::int64_t lo = 16, std::int64_t hi = 256);

/// Gaussian K x N weights and non-negative heavy-tailed activations
/// (|Laplace|, rows = min(M, 64)) per layer, with per-layer spreads.
std::vector<search::LayerTensors> toy_tensors(const ModelGraph& model, std::uint64_t seed);

/// Small accelerator used with toy models.
sim::HwConfig toy_hw();

/// ImageNet ResNet18 at 224 x 224: 20 convolutions (downsample shortcuts
/// included) and the final fully connected layer, lowered to GEMM.
ModelGraph resnet18(std::int64_t batch = 1);

/// Writes model.json, manifest.json, hw.json and the blobs under `dir`.
void write_toy_workspace(const std::filesystem::path& dir, int layers, std::uint64_t seed);

}  // namespace dybit::synth

#endif  // DYBIT_SYNTHETIC_HPP_
