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

// File formats.
//
// Model descriptor (JSON):
//   { "name": str, "source": str?, "layers": [
//       { "name": str, "kind": "gemm", "m": int, "n": int, "k": int,
//         "weights": blob-id, "calibration": blob-id, "signed_activations": bool? },
//       { "name": str, "kind": "conv", "batch", "c_in", "c_out", "kernel_h",
//         "kernel_w", "out_h", "out_w", "weights", "calibration", ... } ] }
// Weight blobs hold a K x N matrix (element count K * N).
//
// Tensor manifest (JSON): { "tensors": { id: { "shape": [int], "dtype": "f32",
//   "path": str, "byte_order": "little", "element_count": int } } }
// with each path relative to the manifest's directory and pointing at raw
// little-endian f32 data.
//
// Hardware config (JSON): every HwConfig field, no defaults, no extras.
//
// Non-finite doubles in reports are written as the strings "inf", "-inf" and
// "nan"; everything else round-trips bit-exactly.

#ifndef DYBIT_MODEL_IO_HPP_
#define DYBIT_MODEL_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dybit/latency.hpp"
#include "dybit/model.hpp"
#include "dybit/search.hpp"
#include "dybit/tensor.hpp"

namespace dybit::io {

namespace fs = std::filesystem;

struct ManifestEntry {
  std::vector<std::int64_t> shape;
  std::string dtype = "f32";
  std::string path;  // relative to the manifest directory
  std::string byte_order = "little";
  std::int64_t element_count = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct TensorManifest {
  fs::path base_dir;
  std::map<std::string, ManifestEntry> entries;

  bool contains(const std::string& id) const { return entries.count(id) != 0; }
  friend bool operator==(const TensorManifest&, const TensorManifest&) = default;
};

TensorManifest load_manifest(const fs::path& path);
TensorManifest parse_manifest(std::string_view text, const fs::path& base_dir);
void save_manifest(const TensorManifest& manifest, const fs::path& path);

/// Bit-exact read; SizeMismatchError on a short or long file, ValueError on
/// a non-finite element.
TensorF32 load_tensor(const TensorManifest& manifest, const std::string& id);

/// Writes the blob under base_dir / relative_path and records the entry.
void add_tensor(TensorManifest& manifest, const std::string& id, const TensorF32& t,
                const std::string& relative_path);

void write_f32_blob(const fs::path& path, const std::vector<float>& data);
std::vector<float> read_f32_blob(const fs::path& path, std::size_t expected_elements);

/// Schema-checked descriptor; tensor references are not resolved.
ModelGraph load_model(const fs::path& path);
ModelGraph parse_model(std::string_view text);
/// Also resolves every blob id and checks weight dimensions.
ModelGraph load_model(const fs::path& path, const TensorManifest& manifest);
void check_references(const ModelGraph& model, const TensorManifest& manifest);
std::string model_to_json(const ModelGraph& model);
void save_model(const ModelGraph& model, const fs::path& path);

/// Weights and calibration activations of every layer, in layer order.
std::vector<search::LayerTensors> load_layer_tensors(const ModelGraph& model,
                                                     const TensorManifest& manifest);

sim::HwConfig load_hw_config(const fs::path& path);
sim::HwConfig parse_hw_config(std::string_view text);
std::string hw_config_to_json(const sim::HwConfig& hw);
void save_hw_config(const sim::HwConfig& hw, const fs::path& path);

/// "a/w", e.g. "4/2"; ModeError on anything else.
pe::PrecisionMode parse_mode(std::string_view text);

/// { "layers": [ { "name", "a_bits", "w_bits" } ] } listing every model layer
/// once, in any order.
QuantAssignment load_assignment(const fs::path& path, const ModelGraph& model);
QuantAssignment parse_assignment(std::string_view text, const ModelGraph& model);
std::string assignment_to_json(const ModelGraph& model, const QuantAssignment& assign);
void save_assignment(const ModelGraph& model, const QuantAssignment& assign, const fs::path& path);

// Reports.
std::string to_json(const search::SearchResult& r);
std::string to_json(const sim::LatencyReport& r);
std::string to_csv(const search::SearchResult& r);  // name,w_bits,a_bits,cycles,rmse
std::string to_csv(const sim::LatencyReport& r);    // name,w_bits,a_bits,cycles,tile_m,tile_n,tile_k
std::string trace_to_csv(const search::SearchResult& r);

search::SearchResult parse_search_report(std::string_view json);
sim::LatencyReport parse_latency_report(std::string_view json);
search::SearchResult load_search_report(const fs::path& path);
sim::LatencyReport load_latency_report(const fs::path& path);

/// Format chosen by extension: ".json" or ".csv".
void save_report(const search::SearchResult& r, const fs::path& path);
void save_report(const sim::LatencyReport& r, const fs::path& path);

/// Per-layer RMSE of one uniform quantization run.
struct QuantizeRow {
  std::string name;
  int w_bits = 8;
  int a_bits = 8;
  double weight_rmse = 0.0;
  double activation_rmse = 0.0;
  double rmse = 0.0;
  double rmse_ratio = 1.0;  // rmse over the same layer's 8/8 rmse
};
std::string to_csv(const std::vector<QuantizeRow>& rows);

/// `stem`.json holds format, scale and shape; `stem`.codes.bin holds the
/// codes as little-endian uint8 (n <= 8) or uint16.
void save_quantized(const QuantizedTensor& q, const fs::path& stem);
QuantizedTensor load_quantized(const fs::path& stem);

std::string read_text(const fs::path& path);
/// Replaces the file contents; IoError on failure.
void write_text(const fs::path& path, std::string_view text);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

}  // namespace dybit::io

#endif  // DYBIT_MODEL_IO_HPP_
