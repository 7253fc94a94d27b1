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

#include "dybit/model_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "dybit/errors.hpp"

namespace dybit::io {
namespace {

using Json = nlohmann::ordered_json;

Json parse_json(std::string_view text, const std::string& what) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw SchemaError(what + ": " + e.what());
  }
}

void expect_object(const Json& j, const std::string& ctx) {
  if (!j.is_object()) throw SchemaError(ctx + ": expected an object");
}

// Every key of `j` must appear in `allowed`.
void reject_unknown(const Json& j, std::initializer_list<std::string_view> allowed,
                    const std::string& ctx) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const std::string_view a : allowed) known = known || item.key() == a;
    if (!known) throw SchemaError(ctx + ": unknown field '" + item.key() + "'");
  }
}

const Json& field(const Json& j, const char* key, const std::string& ctx) {
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(ctx + ": missing field '" + key + "'");
  return *it;
}

std::string get_string(const Json& j, const char* key, const std::string& ctx) {
  const Json& v = field(j, key, ctx);
  if (!v.is_string()) throw SchemaError(ctx + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

std::int64_t as_int(const Json& v, const std::string& ctx) {
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      throw SchemaError(ctx + ": integer out of range");
    }
    return static_cast<std::int64_t>(u);
  }
  if (v.is_number_integer()) return v.get<std::int64_t>();
  throw SchemaError(ctx + ": expected an integer");
}

std::int64_t get_int(const Json& j, const char* key, const std::string& ctx) {
  return as_int(field(j, key, ctx), ctx + "." + key);
}

std::int64_t get_positive(const Json& j, const char* key, const std::string& ctx) {
  const std::int64_t v = get_int(j, key, ctx);
  if (v < 1) throw SchemaError(ctx + ": '" + key + "' must be positive");
  return v;
}

std::uint64_t get_count(const Json& j, const char* key, const std::string& ctx) {
  const std::int64_t v = get_int(j, key, ctx);
  if (v < 0) throw SchemaError(ctx + ": '" + key + "' must be non-negative");
  return static_cast<std::uint64_t>(v);
}

bool get_bool(const Json& j, const char* key, const std::string& ctx) {
  const Json& v = field(j, key, ctx);
  if (!v.is_boolean()) throw SchemaError(ctx + ": '" + key + "' must be a boolean");
  return v.get<bool>();
}

Json encode_double(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double decode_double(const Json& v, const std::string& ctx) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw SchemaError(ctx + ": expected a number");
}

double get_double(const Json& j, const char* key, const std::string& ctx) {
  return decode_double(field(j, key, ctx), ctx + "." + key);
}

const Json& get_array(const Json& j, const char* key, const std::string& ctx) {
  const Json& v = field(j, key, ctx);
  if (!v.is_array()) throw SchemaError(ctx + ": '" + key + "' must be an array");
  return v;
}

int get_width(const Json& j, const char* key, const std::string& ctx) {
  const std::int64_t v = get_int(j, key, ctx);
  if (v != 2 && v != 4 && v != 8) {
    throw SchemaError(ctx + ": '" + key + "' must be 2, 4 or 8");
  }
  return static_cast<int>(v);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::uint32_t load_le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void store_le32(std::uint32_t v, unsigned char* p) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed on '" + path.string() + "'");
  return bytes;
}

void write_bytes(const fs::path& path, const unsigned char* data, std::size_t size) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create '" + path.parent_path().string() + "': " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(size));
  out.flush();
  if (!out) throw IoError("write failed on '" + path.string() + "'");
}

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  for (char& c : ext) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return ext;
}

// CSV fields are layer names; quote those that need it.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

const char* operand_name(search::Operand op) {
  return op == search::Operand::kWeights ? "weights" : "activations";
}

search::Operand parse_operand(const std::string& s, const std::string& ctx) {
  if (s == "weights") return search::Operand::kWeights;
  if (s == "activations") return search::Operand::kActivations;
  throw SchemaError(ctx + ": unknown operand '" + s + "'");
}

std::vector<std::int64_t> parse_shape(const Json& v, const std::string& ctx) {
  if (!v.is_array() || v.empty()) throw SchemaError(ctx + ": shape must be a non-empty array");
  std::vector<std::int64_t> shape;
  for (const Json& d : v) {
    const std::int64_t x = as_int(d, ctx + ".shape");
    if (x < 1) throw SchemaError(ctx + ": shape dimensions must be positive");
    shape.push_back(x);
  }
  return shape;
}

std::int64_t shape_product(const std::vector<std::int64_t>& shape, const std::string& ctx) {
  std::int64_t n = 1;
  for (const std::int64_t d : shape) {
    if (n > std::numeric_limits<std::int64_t>::max() / d) {
      throw SchemaError(ctx + ": element count overflows");
    }
    n *= d;
  }
  return n;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string read_text(const fs::path& path) {
  const std::vector<unsigned char> bytes = read_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_text(const fs::path& path, std::string_view text) {
  write_bytes(path, reinterpret_cast<const unsigned char*>(text.data()), text.size());
}

// ---------------------------------------------------------------- tensors

void write_f32_blob(const fs::path& path, const std::vector<float>& data) {
  std::vector<unsigned char> bytes(data.size() * 4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    store_le32(std::bit_cast<std::uint32_t>(data[i]), &bytes[4 * i]);
  }
  write_bytes(path, bytes.data(), bytes.size());
}

std::vector<float> read_f32_blob(const fs::path& path, std::size_t expected_elements) {
  const std::vector<unsigned char> bytes = read_bytes(path);
  if (bytes.size() != 4 * expected_elements) {
    throw SizeMismatchError("'" + path.string() + "' holds " + std::to_string(bytes.size()) +
                            " bytes, expected " + std::to_string(4 * expected_elements));
  }
  std::vector<float> data(expected_elements);
  for (std::size_t i = 0; i < expected_elements; ++i) {
    data[i] = std::bit_cast<float>(load_le32(&bytes[4 * i]));
  }
  return data;
}

TensorManifest parse_manifest(std::string_view text, const fs::path& base_dir) {
  const Json j = parse_json(text, "manifest");
  expect_object(j, "manifest");
  reject_unknown(j, {"tensors"}, "manifest");
  const Json& tensors = field(j, "tensors", "manifest");
  expect_object(tensors, "manifest.tensors");

  TensorManifest m;
  m.base_dir = base_dir;
  for (const auto& item : tensors.items()) {
    const std::string ctx = "manifest entry '" + item.key() + "'";
    const Json& e = item.value();
    expect_object(e, ctx);
    reject_unknown(e, {"shape", "dtype", "path", "byte_order", "element_count"}, ctx);
    ManifestEntry entry;
    entry.shape = parse_shape(field(e, "shape", ctx), ctx);
    entry.dtype = get_string(e, "dtype", ctx);
    entry.path = get_string(e, "path", ctx);
    entry.byte_order = get_string(e, "byte_order", ctx);
    entry.element_count = get_positive(e, "element_count", ctx);
    if (entry.dtype != "f32") throw SchemaError(ctx + ": dtype must be \"f32\"");
    if (entry.byte_order != "little") throw SchemaError(ctx + ": byte_order must be \"little\"");
    if (entry.path.empty()) throw SchemaError(ctx + ": empty path");
    if (shape_product(entry.shape, ctx) != entry.element_count) {
      throw SchemaError(ctx + ": element_count disagrees with shape");
    }
    m.entries.emplace(item.key(), std::move(entry));
  }
  return m;
}

TensorManifest load_manifest(const fs::path& path) {
  return parse_manifest(read_text(path), path.parent_path());
}

void save_manifest(const TensorManifest& manifest, const fs::path& path) {
  Json tensors = Json::object();
  for (const auto& [id, e] : manifest.entries) {
    tensors[id] = Json{{"shape", e.shape},
                       {"dtype", e.dtype},
                       {"path", e.path},
                       {"byte_order", e.byte_order},
                       {"element_count", e.element_count}};
  }
  write_text(path, dump(Json{{"tensors", std::move(tensors)}}));
}

TensorF32 load_tensor(const TensorManifest& manifest, const std::string& id) {
  const auto it = manifest.entries.find(id);
  if (it == manifest.entries.end()) {
    throw DanglingReferenceError("tensor '" + id + "' is not in the manifest");
  }
  const ManifestEntry& e = it->second;
  std::vector<float> data =
      read_f32_blob(manifest.base_dir / e.path, static_cast<std::size_t>(e.element_count));
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw ValueError("tensor '" + id + "' has a non-finite element at index " +
                       std::to_string(i));
    }
  }
  return TensorF32(e.shape, std::move(data));
}

void add_tensor(TensorManifest& manifest, const std::string& id, const TensorF32& t,
                const std::string& relative_path) {
  validate(t);
  write_f32_blob(manifest.base_dir / relative_path, t.data);
  manifest.entries[id] = ManifestEntry{t.shape, "f32", relative_path, "little",
                                       static_cast<std::int64_t>(t.size())};
}

// ---------------------------------------------------------------- model

ModelGraph parse_model(std::string_view text) {
  const Json j = parse_json(text, "model descriptor");
  expect_object(j, "model");
  reject_unknown(j, {"name", "source", "layers"}, "model");
  ModelGraph g;
  g.name = get_string(j, "name", "model");
  if (j.contains("source")) g.source = get_string(j, "source", "model");
  const Json& layers = get_array(j, "layers", "model");
  if (layers.empty()) throw SchemaError("model: no layers");

  std::set<std::string> seen;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Json& l = layers[i];
    const std::string ctx = "layer " + std::to_string(i);
    expect_object(l, ctx);
    ModelLayer layer;
    const std::string name = get_string(l, "name", ctx);
    if (name.empty()) throw SchemaError(ctx + ": empty name");
    if (!seen.insert(name).second) throw SchemaError("duplicate layer name '" + name + "'");
    const std::string lctx = "layer '" + name + "'";
    const std::string kind = get_string(l, "kind", lctx);
    if (kind == "gemm") {
      reject_unknown(l, {"name", "kind", "m", "n", "k", "weights", "calibration",
                         "signed_activations"},
                     lctx);
      layer.shape = LayerShape{name, get_positive(l, "m", lctx), get_positive(l, "n", lctx),
                               get_positive(l, "k", lctx)};
    } else if (kind == "conv") {
      reject_unknown(l, {"name", "kind", "batch", "c_in", "c_out", "kernel_h", "kernel_w", "out_h",
                         "out_w", "weights", "calibration", "signed_activations"},
                     lctx);
      ConvGeometry c;
      c.batch = get_positive(l, "batch", lctx);
      c.c_in = get_positive(l, "c_in", lctx);
      c.c_out = get_positive(l, "c_out", lctx);
      c.kernel_h = get_positive(l, "kernel_h", lctx);
      c.kernel_w = get_positive(l, "kernel_w", lctx);
      c.out_h = get_positive(l, "out_h", lctx);
      c.out_w = get_positive(l, "out_w", lctx);
      layer.conv = c;
      layer.shape = lower_conv(name, c);
    } else {
      throw SchemaError(lctx + ": unknown kind '" + kind + "'");
    }
    layer.weights = get_string(l, "weights", lctx);
    layer.calibration = get_string(l, "calibration", lctx);
    if (l.contains("signed_activations")) {
      layer.signed_activations = get_bool(l, "signed_activations", lctx);
    }
    g.layers.push_back(std::move(layer));
  }
  return g;
}

ModelGraph load_model(const fs::path& path) { return parse_model(read_text(path)); }

void check_references(const ModelGraph& model, const TensorManifest& manifest) {
  for (const ModelLayer& l : model.layers) {
    for (const std::string* id : {&l.weights, &l.calibration}) {
      if (!manifest.contains(*id)) {
        throw DanglingReferenceError("layer '" + l.shape.name + "' references missing tensor '" +
                                     *id + "'");
      }
    }
    const std::int64_t expected = l.shape.gemm_k * l.shape.gemm_n;
    const std::int64_t actual = manifest.entries.at(l.weights).element_count;
    if (actual != expected) {
      throw DimensionMismatchError("layer '" + l.shape.name + "': weights '" + l.weights +
                                   "' hold " + std::to_string(actual) +
                                   " elements, K x N = " + std::to_string(expected));
    }
  }
}

ModelGraph load_model(const fs::path& path, const TensorManifest& manifest) {
  ModelGraph g = load_model(path);
  check_references(g, manifest);
  return g;
}

std::string model_to_json(const ModelGraph& model) {
  Json layers = Json::array();
  for (const ModelLayer& l : model.layers) {
    Json j;
    j["name"] = l.shape.name;
    if (l.conv) {
      j["kind"] = "conv";
      j["batch"] = l.conv->batch;
      j["c_in"] = l.conv->c_in;
      j["c_out"] = l.conv->c_out;
      j["kernel_h"] = l.conv->kernel_h;
      j["kernel_w"] = l.conv->kernel_w;
      j["out_h"] = l.conv->out_h;
      j["out_w"] = l.conv->out_w;
    } else {
      j["kind"] = "gemm";
      j["m"] = l.shape.gemm_m;
      j["n"] = l.shape.gemm_n;
      j["k"] = l.shape.gemm_k;
    }
    j["weights"] = l.weights;
    j["calibration"] = l.calibration;
    j["signed_activations"] = l.signed_activations;
    layers.push_back(std::move(j));
  }
  Json j;
  j["name"] = model.name;
  j["source"] = model.source;
  j["layers"] = std::move(layers);
  return dump(j);
}

void save_model(const ModelGraph& model, const fs::path& path) {
  write_text(path, model_to_json(model));
}

std::vector<search::LayerTensors> load_layer_tensors(const ModelGraph& model,
                                                     const TensorManifest& manifest) {
  check_references(model, manifest);
  std::vector<search::LayerTensors> out;
  out.reserve(model.layers.size());
  for (const ModelLayer& l : model.layers) {
    out.push_back(search::LayerTensors{load_tensor(manifest, l.weights),
                                       load_tensor(manifest, l.calibration)});
  }
  return out;
}

// ---------------------------------------------------------------- hardware

sim::HwConfig parse_hw_config(std::string_view text) {
  const Json j = parse_json(text, "hardware config");
  const std::string ctx = "hardware config";
  expect_object(j, ctx);
  reject_unknown(j, {"array_dim", "if_buffer_bytes", "w_buffer_bytes", "of_buffer_bytes",
                     "dram_bandwidth_bytes_per_cycle", "frequency_mhz"},
                 ctx);
  sim::HwConfig hw;
  const std::int64_t dim = get_positive(j, "array_dim", ctx);
  if (dim > std::numeric_limits<int>::max()) throw SchemaError(ctx + ": array_dim too large");
  hw.array_dim = static_cast<int>(dim);
  hw.if_buffer_bytes = get_positive(j, "if_buffer_bytes", ctx);
  hw.w_buffer_bytes = get_positive(j, "w_buffer_bytes", ctx);
  hw.of_buffer_bytes = get_positive(j, "of_buffer_bytes", ctx);
  hw.dram_bandwidth_bytes_per_cycle = get_double(j, "dram_bandwidth_bytes_per_cycle", ctx);
  hw.frequency_mhz = get_double(j, "frequency_mhz", ctx);
  try {
    sim::validate(hw);
  } catch (const ValueError& e) {
    throw SchemaError(ctx + ": " + e.what());
  }
  return hw;
}

sim::HwConfig load_hw_config(const fs::path& path) { return parse_hw_config(read_text(path)); }

std::string hw_config_to_json(const sim::HwConfig& hw) {
  Json j;
  j["array_dim"] = hw.array_dim;
  j["if_buffer_bytes"] = hw.if_buffer_bytes;
  j["w_buffer_bytes"] = hw.w_buffer_bytes;
  j["of_buffer_bytes"] = hw.of_buffer_bytes;
  j["dram_bandwidth_bytes_per_cycle"] = encode_double(hw.dram_bandwidth_bytes_per_cycle);
  j["frequency_mhz"] = encode_double(hw.frequency_mhz);
  return dump(j);
}

void save_hw_config(const sim::HwConfig& hw, const fs::path& path) {
  write_text(path, hw_config_to_json(hw));
}

// ---------------------------------------------------------------- assignment

pe::PrecisionMode parse_mode(std::string_view text) {
  const auto slash = text.find('/');
  auto parse_width = [&](std::string_view s) {
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw ModeError("bad precision mode '" + std::string(text) + "', expected a/w");
    }
    return v;
  };
  if (slash == std::string_view::npos) {
    throw ModeError("bad precision mode '" + std::string(text) + "', expected a/w");
  }
  const pe::PrecisionMode mode{parse_width(text.substr(0, slash)),
                               parse_width(text.substr(slash + 1))};
  pe::validate(mode);
  return mode;
}

QuantAssignment parse_assignment(std::string_view text, const ModelGraph& model) {
  const Json j = parse_json(text, "assignment");
  expect_object(j, "assignment");
  reject_unknown(j, {"layers"}, "assignment");
  const Json& layers = get_array(j, "layers", "assignment");

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < model.layers.size(); ++i) index[model.layers[i].shape.name] = i;

  QuantAssignment out(model.layers.size());
  std::vector<bool> covered(model.layers.size(), false);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string ctx = "assignment entry " + std::to_string(i);
    const Json& l = layers[i];
    expect_object(l, ctx);
    reject_unknown(l, {"name", "a_bits", "w_bits"}, ctx);
    const std::string name = get_string(l, "name", ctx);
    const auto it = index.find(name);
    if (it == index.end()) throw SchemaError(ctx + ": unknown layer '" + name + "'");
    if (covered[it->second]) throw SchemaError(ctx + ": layer '" + name + "' assigned twice");
    covered[it->second] = true;
    out[it->second] = pe::PrecisionMode{get_width(l, "a_bits", ctx), get_width(l, "w_bits", ctx)};
  }
  for (std::size_t i = 0; i < covered.size(); ++i) {
    if (!covered[i]) {
      throw SchemaError("assignment: layer '" + model.layers[i].shape.name + "' not assigned");
    }
  }
  return out;
}

QuantAssignment load_assignment(const fs::path& path, const ModelGraph& model) {
  return parse_assignment(read_text(path), model);
}

std::string assignment_to_json(const ModelGraph& model, const QuantAssignment& assign) {
  if (assign.size() != model.layers.size()) {
    throw InputError("assignment covers " + std::to_string(assign.size()) + " layers, model has " +
                     std::to_string(model.layers.size()));
  }
  Json layers = Json::array();
  for (std::size_t i = 0; i < assign.size(); ++i) {
    layers.push_back(Json{{"name", model.layers[i].shape.name},
                          {"a_bits", assign[i].a_bits},
                          {"w_bits", assign[i].w_bits}});
  }
  return dump(Json{{"layers", std::move(layers)}});
}

void save_assignment(const ModelGraph& model, const QuantAssignment& assign,
                     const fs::path& path) {
  write_text(path, assignment_to_json(model, assign));
}

// ---------------------------------------------------------------- reports

std::string to_json(const search::SearchResult& r) {
  if (r.layer_names.size() != r.assignment.size() || r.per_layer.size() != r.assignment.size()) {
    throw InputError("search result has inconsistent per-layer vectors");
  }
  Json layers = Json::array();
  for (std::size_t i = 0; i < r.assignment.size(); ++i) {
    const search::LayerMetric& m = r.per_layer[i];
    layers.push_back(Json{{"name", r.layer_names[i]},
                          {"w_bits", r.assignment[i].w_bits},
                          {"a_bits", r.assignment[i].a_bits},
                          {"cycles", m.latency},
                          {"weight_rmse", encode_double(m.weight_rmse)},
                          {"activation_rmse", encode_double(m.activation_rmse)},
                          {"rmse", encode_double(m.rmse)}});
  }
  Json trace = Json::array();
  for (const search::DegradeStep& s : r.trace) {
    trace.push_back(Json{{"iteration", s.iteration},
                         {"layer", s.layer},
                         {"layer_name", s.layer_name},
                         {"operand", operand_name(s.operand)},
                         {"from_bits", s.from_bits},
                         {"to_bits", s.to_bits},
                         {"total_latency_cycles", s.total_latency},
                         {"total_rmse", encode_double(s.total_rmse)},
                         {"ratio", encode_double(s.ratio)}});
  }
  Json j;
  j["report"] = "search";
  j["strategy"] = search::to_string(r.strategy);
  j["constraint"] = encode_double(r.constraint);
  j["top_k"] = r.top_k;
  j["baseline_latency_cycles"] = r.baseline_latency;
  j["baseline_rmse"] = encode_double(r.baseline_rmse);
  j["total_latency_cycles"] = r.total_latency_cycles;
  j["total_rmse"] = encode_double(r.total_rmse);
  j["speedup_ratio"] = encode_double(r.speedup_ratio);
  j["rmse_ratio"] = encode_double(r.rmse_ratio);
  j["iterations"] = r.iterations;
  j["layers"] = std::move(layers);
  j["trace"] = std::move(trace);
  return dump(j);
}

search::SearchResult parse_search_report(std::string_view text) {
  const Json j = parse_json(text, "search report");
  const std::string ctx = "search report";
  expect_object(j, ctx);
  if (get_string(j, "report", ctx) != "search") throw SchemaError(ctx + ": not a search report");
  search::SearchResult r;
  try {
    r.strategy = search::parse_strategy(get_string(j, "strategy", ctx));
  } catch (const Error& e) {
    throw SchemaError(ctx + ": " + e.what());
  }
  r.constraint = get_double(j, "constraint", ctx);
  r.top_k = static_cast<int>(get_int(j, "top_k", ctx));
  r.baseline_latency = get_count(j, "baseline_latency_cycles", ctx);
  r.baseline_rmse = get_double(j, "baseline_rmse", ctx);
  r.total_latency_cycles = get_count(j, "total_latency_cycles", ctx);
  r.total_rmse = get_double(j, "total_rmse", ctx);
  r.speedup_ratio = get_double(j, "speedup_ratio", ctx);
  r.rmse_ratio = get_double(j, "rmse_ratio", ctx);
  r.iterations = static_cast<int>(get_int(j, "iterations", ctx));
  for (const Json& l : get_array(j, "layers", ctx)) {
    const std::string lctx = ctx + " layer";
    expect_object(l, lctx);
    r.layer_names.push_back(get_string(l, "name", lctx));
    r.assignment.push_back(pe::PrecisionMode{get_width(l, "a_bits", lctx),
                                             get_width(l, "w_bits", lctx)});
    search::LayerMetric m;
    m.latency = get_count(l, "cycles", lctx);
    m.weight_rmse = get_double(l, "weight_rmse", lctx);
    m.activation_rmse = get_double(l, "activation_rmse", lctx);
    m.rmse = get_double(l, "rmse", lctx);
    r.per_layer.push_back(m);
  }
  for (const Json& s : get_array(j, "trace", ctx)) {
    const std::string sctx = ctx + " trace step";
    expect_object(s, sctx);
    search::DegradeStep step;
    step.iteration = static_cast<int>(get_int(s, "iteration", sctx));
    step.layer = static_cast<std::size_t>(get_count(s, "layer", sctx));
    step.layer_name = get_string(s, "layer_name", sctx);
    step.operand = parse_operand(get_string(s, "operand", sctx), sctx);
    step.from_bits = get_width(s, "from_bits", sctx);
    step.to_bits = get_width(s, "to_bits", sctx);
    step.total_latency = get_count(s, "total_latency_cycles", sctx);
    step.total_rmse = get_double(s, "total_rmse", sctx);
    step.ratio = get_double(s, "ratio", sctx);
    r.trace.push_back(std::move(step));
  }
  return r;
}

std::string to_json(const sim::LatencyReport& r) {
  Json layers = Json::array();
  for (const sim::LayerReport& l : r.layers) {
    layers.push_back(Json{{"name", l.name},
                          {"w_bits", l.mode.w_bits},
                          {"a_bits", l.mode.a_bits},
                          {"cycles", l.cycles},
                          {"tile_m", l.tiling.tile_m},
                          {"tile_n", l.tiling.tile_n},
                          {"tile_k", l.tiling.tile_k}});
  }
  Json j;
  j["report"] = "latency";
  j["total_cycles"] = r.total_cycles;
  j["layers"] = std::move(layers);
  return dump(j);
}

sim::LatencyReport parse_latency_report(std::string_view text) {
  const Json j = parse_json(text, "latency report");
  const std::string ctx = "latency report";
  expect_object(j, ctx);
  if (get_string(j, "report", ctx) != "latency") throw SchemaError(ctx + ": not a latency report");
  sim::LatencyReport r;
  r.total_cycles = get_count(j, "total_cycles", ctx);
  for (const Json& l : get_array(j, "layers", ctx)) {
    const std::string lctx = ctx + " layer";
    expect_object(l, lctx);
    sim::LayerReport lr;
    lr.name = get_string(l, "name", lctx);
    lr.mode = pe::PrecisionMode{get_width(l, "a_bits", lctx), get_width(l, "w_bits", lctx)};
    lr.cycles = get_count(l, "cycles", lctx);
    lr.tiling = sim::Tiling{get_positive(l, "tile_m", lctx), get_positive(l, "tile_n", lctx),
                            get_positive(l, "tile_k", lctx)};
    r.layers.push_back(std::move(lr));
  }
  return r;
}

search::SearchResult load_search_report(const fs::path& path) {
  return parse_search_report(read_text(path));
}

sim::LatencyReport load_latency_report(const fs::path& path) {
  return parse_latency_report(read_text(path));
}

std::string to_csv(const search::SearchResult& r) {
  std::ostringstream os;
  os << "name,w_bits,a_bits,cycles,rmse\n";
  for (std::size_t i = 0; i < r.assignment.size(); ++i) {
    os << csv_field(r.layer_names.at(i)) << ',' << r.assignment[i].w_bits << ','
       << r.assignment[i].a_bits << ',' << r.per_layer.at(i).latency << ','
       << format_double(r.per_layer[i].rmse) << '\n';
  }
  return os.str();
}

std::string to_csv(const sim::LatencyReport& r) {
  std::ostringstream os;
  os << "name,w_bits,a_bits,cycles,tile_m,tile_n,tile_k\n";
  for (const sim::LayerReport& l : r.layers) {
    os << csv_field(l.name) << ',' << l.mode.w_bits << ',' << l.mode.a_bits << ',' << l.cycles
       << ',' << l.tiling.tile_m << ',' << l.tiling.tile_n << ',' << l.tiling.tile_k << '\n';
  }
  return os.str();
}

std::string trace_to_csv(const search::SearchResult& r) {
  std::ostringstream os;
  os << "step,iteration,layer,operand,from_bits,to_bits,total_latency_cycles,total_rmse,ratio\n";
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    const search::DegradeStep& s = r.trace[i];
    os << i + 1 << ',' << s.iteration << ',' << csv_field(s.layer_name) << ','
       << operand_name(s.operand) << ',' << s.from_bits << ',' << s.to_bits << ','
       << s.total_latency << ',' << format_double(s.total_rmse) << ','
       << format_double(s.ratio) << '\n';
  }
  return os.str();
}

std::string to_csv(const std::vector<QuantizeRow>& rows) {
  std::ostringstream os;
  os << "name,w_bits,a_bits,weight_rmse,activation_rmse,rmse,rmse_ratio\n";
  for (const QuantizeRow& q : rows) {
    os << csv_field(q.name) << ',' << q.w_bits << ',' << q.a_bits << ','
       << format_double(q.weight_rmse) << ',' << format_double(q.activation_rmse) << ','
       << format_double(q.rmse) << ',' << format_double(q.rmse_ratio) << '\n';
  }
  return os.str();
}

void save_report(const search::SearchResult& r, const fs::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".json") {
    write_text(path, to_json(r));
  } else if (ext == ".csv") {
    write_text(path, to_csv(r));
  } else {
    throw IoError("unsupported report extension '" + ext + "' (use .json or .csv)");
  }
}

void save_report(const sim::LatencyReport& r, const fs::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".json") {
    write_text(path, to_json(r));
  } else if (ext == ".csv") {
    write_text(path, to_csv(r));
  } else {
    throw IoError("unsupported report extension '" + ext + "' (use .json or .csv)");
  }
}

// ---------------------------------------------------------------- quantized dumps

namespace {

fs::path with_suffix(const fs::path& stem, const char* suffix) {
  return fs::path(stem.string() + suffix);
}

}  // namespace

void save_quantized(const QuantizedTensor& q, const fs::path& stem) {
  validate(q.spec);
  const int width = q.spec.total_bits <= 8 ? 1 : 2;
  std::vector<unsigned char> bytes(q.codes.size() * static_cast<std::size_t>(width));
  for (std::size_t i = 0; i < q.codes.size(); ++i) {
    const std::uint32_t bits = q.codes[i].bits;
    bytes[width * i] = static_cast<unsigned char>(bits);
    if (width == 2) bytes[width * i + 1] = static_cast<unsigned char>(bits >> 8);
  }
  const fs::path blob = with_suffix(stem, ".codes.bin");
  write_bytes(blob, bytes.data(), bytes.size());
  Json j;
  j["bits"] = q.spec.total_bits;
  j["signed"] = q.spec.is_signed;
  j["scale"] = encode_double(q.scale);
  j["shape"] = q.shape;
  j["code_bytes"] = width;
  j["byte_order"] = "little";
  j["codes"] = blob.filename().string();
  write_text(with_suffix(stem, ".json"), dump(j));
}

QuantizedTensor load_quantized(const fs::path& stem) {
  const fs::path meta = with_suffix(stem, ".json");
  const std::string ctx = "quantized tensor '" + meta.string() + "'";
  const Json j = parse_json(read_text(meta), ctx);
  expect_object(j, ctx);
  QuantizedTensor q;
  q.spec.total_bits = static_cast<int>(get_int(j, "bits", ctx));
  q.spec.is_signed = get_bool(j, "signed", ctx);
  try {
    validate(q.spec);
  } catch (const FormatError& e) {
    throw SchemaError(ctx + ": " + e.what());
  }
  q.scale = get_double(j, "scale", ctx);
  q.shape = parse_shape(field(j, "shape", ctx), ctx);
  const std::int64_t width = get_int(j, "code_bytes", ctx);
  if (width != (q.spec.total_bits <= 8 ? 1 : 2)) throw SchemaError(ctx + ": bad code_bytes");
  const auto n = static_cast<std::size_t>(shape_product(q.shape, ctx));
  const fs::path blob = meta.parent_path() / get_string(j, "codes", ctx);
  const std::vector<unsigned char> bytes = read_bytes(blob);
  if (bytes.size() != n * static_cast<std::size_t>(width)) {
    throw SizeMismatchError("'" + blob.string() + "' holds " + std::to_string(bytes.size()) +
                            " bytes, expected " + std::to_string(n * width));
  }
  q.codes.resize(n);
  const std::uint32_t limit = q.spec.code_count();
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits = bytes[width * i];
    if (width == 2) bits |= static_cast<std::uint32_t>(bytes[width * i + 1]) << 8;
    if (bits >= limit) throw FormatError(ctx + ": code out of range at index " + std::to_string(i));
    q.codes[i] = DyBitCode{bits};
  }
  return q;
}

}  // namespace dybit::io
