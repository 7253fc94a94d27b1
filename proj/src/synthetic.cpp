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

#include "dybit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "dybit/errors.hpp"
#include "dybit/model_io.hpp"

namespace dybit::synth {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw ValueError("uniform_int: empty range");
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(engine_() % span);
}

double Rng::normal(double mean, double stddev) {
  if (has_spare_) {
    has_spare_ = false;
    return mean + stddev * spare_;
  }
  double u1 = uniform();
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return mean + stddev * r * std::cos(t);
}

double Rng::laplace(double location, double scale) {
  double u = uniform() - 0.5;
  while (u == -0.5) u = uniform() - 0.5;
  const double mag = -scale * std::log(1.0 - 2.0 * std::abs(u));
  return location + (u < 0 ? -mag : mag);
}

namespace {

template <class Draw>
TensorF32 fill(std::vector<std::int64_t> shape, Draw draw) {
  std::vector<float> data(element_count(shape));
  for (float& x : data) x = static_cast<float>(draw());
  return TensorF32(std::move(shape), std::move(data));
}

}  // namespace

TensorF32 gaussian_tensor(std::vector<std::int64_t> shape, std::uint64_t seed, double mean,
                          double stddev) {
  Rng rng(seed);
  return fill(std::move(shape), [&] { return rng.normal(mean, stddev); });
}

TensorF32 laplace_tensor(std::vector<std::int64_t> shape, std::uint64_t seed, double location,
                         double scale) {
  Rng rng(seed);
  return fill(std::move(shape), [&] { return rng.laplace(location, scale); });
}

ModelGraph toy_model(int layers, std::uint64_t seed, std::int64_t lo, std::int64_t hi) {
  if (layers < 1) throw ValueError("toy_model: need at least one layer");
  if (lo < 1 || hi < lo) throw ValueError("toy_model: bad dimension range");
  Rng rng(seed);
  ModelGraph g;
  g.name = "toy" + std::to_string(layers);
  g.source = "synthetic seed " + std::to_string(seed);
  for (int i = 0; i < layers; ++i) {
    ModelLayer l;
    const std::string name = "l" + std::to_string(i);
    l.shape = LayerShape{name, rng.uniform_int(lo, hi), rng.uniform_int(lo, hi),
                         rng.uniform_int(lo, hi)};
    l.weights = name + ".w";
    l.calibration = name + ".a";
    g.layers.push_back(std::move(l));
  }
  return g;
}

std::vector<search::LayerTensors> toy_tensors(const ModelGraph& model, std::uint64_t seed) {
  Rng spreads(seed);
  std::vector<search::LayerTensors> out;
  out.reserve(model.layers.size());
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const LayerShape& s = model.layers[i].shape;
    const double w_std = 0.02 + 0.2 * spreads.uniform();
    const double a_scale = 0.25 + 2.0 * spreads.uniform();
    const std::uint64_t base = seed * 1000003u + 2 * i;
    search::LayerTensors t;
    t.weights = gaussian_tensor({s.gemm_k, s.gemm_n}, base + 1, 0.0, w_std);
    t.activations = laplace_tensor({std::min<std::int64_t>(s.gemm_m, 64), s.gemm_k}, base + 2,
                                   0.0, a_scale);
    if (!model.layers[i].signed_activations) {
      for (float& x : t.activations.data) x = std::abs(x);
    }
    out.push_back(std::move(t));
  }
  return out;
}

sim::HwConfig toy_hw() {
  sim::HwConfig hw;
  hw.array_dim = 8;
  hw.if_buffer_bytes = 16 * 1024;
  hw.w_buffer_bytes = 16 * 1024;
  hw.of_buffer_bytes = 4 * 1024;
  hw.dram_bandwidth_bytes_per_cycle = 16.0;
  hw.frequency_mhz = 200.0;
  return hw;
}

ModelGraph resnet18(std::int64_t batch) {
  ModelGraph g;
  g.name = "resnet18";
  g.source = "torchvision resnet18 layer dimensions, 224x224 input";
  auto conv = [&](const std::string& name, std::int64_t c_in, std::int64_t c_out, std::int64_t k,
                  std::int64_t out) {
    ModelLayer l;
    l.conv = ConvGeometry{batch, c_in, c_out, k, k, out, out};
    l.shape = lower_conv(name, *l.conv);
    l.weights = name + ".w";
    l.calibration = name + ".a";
    l.signed_activations = name == "conv1";  // normalized image input
    g.layers.push_back(std::move(l));
  };
  conv("conv1", 3, 64, 7, 112);
  std::int64_t c_in = 64;
  std::int64_t size = 56;
  const std::int64_t widths[] = {64, 128, 256, 512};
  for (int stage = 0; stage < 4; ++stage) {
    const std::int64_t c = widths[stage];
    if (stage > 0) size /= 2;
    const std::string p = "layer" + std::to_string(stage + 1);
    conv(p + ".0.conv1", c_in, c, 3, size);
    conv(p + ".0.conv2", c, c, 3, size);
    if (c_in != c) conv(p + ".0.downsample", c_in, c, 1, size);
    conv(p + ".1.conv1", c, c, 3, size);
    conv(p + ".1.conv2", c, c, 3, size);
    c_in = c;
  }
  ModelLayer fc;
  fc.shape = LayerShape{"fc", batch, 1000, 512};
  fc.weights = "fc.w";
  fc.calibration = "fc.a";
  g.layers.push_back(std::move(fc));
  return g;
}

void write_toy_workspace(const std::filesystem::path& dir, int layers, std::uint64_t seed) {
  const ModelGraph model = toy_model(layers, seed);
  const std::vector<search::LayerTensors> tensors = toy_tensors(model, seed);
  io::TensorManifest manifest;
  manifest.base_dir = dir;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const ModelLayer& l = model.layers[i];
    io::add_tensor(manifest, l.weights, tensors[i].weights, "blobs/" + l.weights + ".bin");
    io::add_tensor(manifest, l.calibration, tensors[i].activations,
                   "blobs/" + l.calibration + ".bin");
  }
  io::save_manifest(manifest, dir / "manifest.json");
  io::save_model(model, dir / "model.json");
  io::save_hw_config(toy_hw(), dir / "hw.json");
}

}  // namespace dybit::synth
