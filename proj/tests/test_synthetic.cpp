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
#include <filesystem>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "dybit/model_io.hpp"
#include "dybit/synthetic.hpp"

namespace dybit::synth {
namespace {

TEST(Synthetic, EngineIsTheStandardMersenneTwister) {
  // The standard fixes the 10000th output of a default-seeded mt19937_64.
  std::mt19937_64 e;
  e.discard(9999);
  EXPECT_EQ(e(), 9981545732273789042ull);
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.normal(), b.normal());
}

TEST(Synthetic, SampleMomentsMatchTheDistributions) {
  Rng rng(12);
  const int n = 200000;
  double s = 0, ss = 0, ls = 0, lss = 0, u_min = 1, u_max = 0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.normal(1.0, 2.0);
    s += g;
    ss += g * g;
    const double l = rng.laplace(0.0, 0.5);
    ls += l;
    lss += l * l;
    const double u = rng.uniform();
    u_min = std::min(u_min, u);
    u_max = std::max(u_max, u);
  }
  EXPECT_NEAR(s / n, 1.0, 0.02);
  EXPECT_NEAR(ss / n - (s / n) * (s / n), 4.0, 0.06);
  EXPECT_NEAR(ls / n, 0.0, 0.01);
  EXPECT_NEAR(lss / n, 2 * 0.25, 0.01);  // Laplace variance 2b^2
  EXPECT_GE(u_min, 0.0);
  EXPECT_LT(u_max, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const auto k = rng.uniform_int(-3, 3);
    EXPECT_GE(k, -3);
    EXPECT_LE(k, 3);
  }
}

TEST(Synthetic, ToyModelsAreDeterministic) {
  const ModelGraph a = toy_model(5, 42, 8, 64);
  EXPECT_EQ(a, toy_model(5, 42, 8, 64));
  EXPECT_NE(a, toy_model(5, 43, 8, 64));
  for (const ModelLayer& l : a.layers) {
    for (const std::int64_t d : {l.shape.gemm_m, l.shape.gemm_n, l.shape.gemm_k}) {
      EXPECT_GE(d, 8);
      EXPECT_LE(d, 64);
    }
  }
  const auto t = toy_tensors(a, 42);
  ASSERT_EQ(t.size(), 5u);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(t[i].weights.size(),
              static_cast<std::size_t>(a.layers[i].shape.gemm_k * a.layers[i].shape.gemm_n));
    for (float x : t[i].activations.data) EXPECT_GE(x, 0.0f);
  }
  EXPECT_EQ(toy_tensors(a, 42)[3].activations, t[3].activations);
}

TEST(Synthetic, ResNet18Dimensions) {
  const ModelGraph g = resnet18();
  ASSERT_EQ(g.layers.size(), 21u);
  EXPECT_EQ(g.layers.front().shape, (LayerShape{"conv1", 112 * 112, 64, 3 * 7 * 7}));
  EXPECT_EQ(g.layers.back().shape, (LayerShape{"fc", 1, 1000, 512}));
  const LayerShape& last_conv = g.layers[19].shape;
  EXPECT_EQ(last_conv, (LayerShape{"layer4.1.conv2", 49, 512, 4608}));
  double macs = 0;
  for (const LayerShape& s : g.shapes()) {
    macs += static_cast<double>(s.gemm_m) * static_cast<double>(s.gemm_n) *
            static_cast<double>(s.gemm_k);
  }
  // The commonly quoted figure is about 1.8 GMACs.
  EXPECT_GT(macs, 1.80e9);
  EXPECT_LT(macs, 1.83e9);
  EXPECT_EQ(resnet18(4).layers[0].shape.gemm_m, 4 * 112 * 112);
}

TEST(Synthetic, ToyWorkspaceLoadsBack) {
  const auto dir = std::filesystem::temp_directory_path() / "dybit_toy_workspace";
  std::filesystem::remove_all(dir);
  write_toy_workspace(dir, 3, 9);
  const io::TensorManifest m = io::load_manifest(dir / "manifest.json");
  const ModelGraph g = io::load_model(dir / "model.json", m);
  EXPECT_EQ(g, toy_model(3, 9));
  EXPECT_EQ(io::load_layer_tensors(g, m)[2].weights, toy_tensors(g, 9)[2].weights);
  EXPECT_EQ(io::load_hw_config(dir / "hw.json"), toy_hw());
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace dybit::synth
