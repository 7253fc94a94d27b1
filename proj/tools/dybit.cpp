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

// dybit: command-line front end.
//
// Exit codes: 0 success, 1 runtime or capacity failure, 2 usage error,
// 3 constraint not achievable.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dybit/errors.hpp"
#include "dybit/format.hpp"
#include "dybit/latency.hpp"
#include "dybit/model_io.hpp"
#include "dybit/search.hpp"
#include "dybit/synthetic.hpp"
#include "dybit/tensor.hpp"

namespace {

namespace fs = std::filesystem;
using dybit::io::format_double;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;

/// Thrown for flag combinations CLI11 cannot express.
struct UsageError {
  std::string message;
};

std::string binary(std::uint32_t bits, int width) {
  std::string s(static_cast<std::size_t>(width), '0');
  for (int i = 0; i < width; ++i) {
    if (bits >> (width - 1 - i) & 1u) s[static_cast<std::size_t>(i)] = '1';
  }
  return s;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

// ---------------------------------------------------------------- table

struct TableArgs {
  int bits = 4;
  bool is_signed = false;
};

int cmd_table(const TableArgs& a) {
  const dybit::FormatSpec spec{a.bits, a.is_signed};
  std::cout << "code" << std::string(static_cast<std::size_t>(std::max(a.bits - 4, 0)), ' ')
            << "  value\n";
  for (const auto& [code, value] : dybit::enumerate_values(spec)) {
    std::cout << binary(code.bits, a.bits) << "  " << format_double(value) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- quantize

struct QuantizeArgs {
  std::string model, tensors, out;
  int wbits = 8;
  int abits = 8;
};

int cmd_quantize(const QuantizeArgs& a, bool quiet) {
  const dybit::io::TensorManifest manifest = dybit::io::load_manifest(a.tensors);
  const dybit::ModelGraph model = dybit::io::load_model(a.model, manifest);
  const std::vector<dybit::search::LayerTensors> tensors =
      dybit::io::load_layer_tensors(model, manifest);
  const fs::path out(a.out);

  std::vector<dybit::io::QuantizeRow> rows;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const dybit::ModelLayer& layer = model.layers[i];
    const bool act_signed = layer.signed_activations;
    const dybit::FormatSpec wf = dybit::search::weight_format(a.wbits);
    const dybit::FormatSpec af = dybit::search::activation_format(a.abits, act_signed);

    const auto& w = tensors[i].weights;
    const auto& x = tensors[i].activations;
    const dybit::QuantizedTensor qw = dybit::quantize_tensor(w, wf, dybit::compute_scale(w, wf));
    const dybit::QuantizedTensor qa = dybit::quantize_tensor(x, af, dybit::compute_scale(x, af));
    dybit::io::save_quantized(qw, out / (layer.shape.name + ".weights"));
    dybit::io::save_quantized(qa, out / (layer.shape.name + ".activations"));

    dybit::io::QuantizeRow row;
    row.name = layer.shape.name;
    row.w_bits = a.wbits;
    row.a_bits = a.abits;
    row.weight_rmse = dybit::rmse(w, dybit::dequantize_tensor(qw)).rmse;
    row.activation_rmse = dybit::rmse(x, dybit::dequantize_tensor(qa)).rmse;
    row.rmse = row.weight_rmse + row.activation_rmse;
    const double base = dybit::quantization_rmse(w, dybit::search::weight_format(8)) +
                        dybit::quantization_rmse(x, dybit::search::activation_format(8, act_signed));
    row.rmse_ratio = base == 0.0 ? (row.rmse == 0.0 ? 1.0 : std::numeric_limits<double>::infinity())
                                 : row.rmse / base;
    rows.push_back(row);
  }
  dybit::io::write_text(out / "rmse.csv", dybit::io::to_csv(rows));
  if (!quiet) {
    std::cout << "quantized " << rows.size() << " layers at w" << a.wbits << "/a" << a.abits
              << " into " << out.string() << '\n';
    for (const auto& r : rows) {
      std::cout << "  " << r.name << "  rmse " << fixed(r.rmse, 6) << "  (x"
                << fixed(r.rmse_ratio, 3) << " vs 8/8)\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string model, hw, assign, out;
};

int cmd_simulate(const SimulateArgs& a, bool quiet) {
  const dybit::ModelGraph model = dybit::io::load_model(a.model);
  const dybit::sim::HwConfig hw = dybit::io::load_hw_config(a.hw);
  dybit::QuantAssignment assign;
  if (a.assign.find('/') != std::string::npos && !fs::exists(a.assign)) {
    assign = dybit::uniform_assignment(model.layers.size(), dybit::io::parse_mode(a.assign));
  } else {
    assign = dybit::io::load_assignment(a.assign, model);
  }
  const dybit::sim::LatencyReport report = dybit::sim::model_latency(model, assign, hw);
  const dybit::sim::LatencyReport base = dybit::sim::model_latency(
      model, dybit::uniform_assignment(model.layers.size(), {8, 8}), hw);

  if (!a.out.empty()) {
    const fs::path out(a.out);
    dybit::io::save_report(report, out / "latency.json");
    dybit::io::save_report(report, out / "latency.csv");
  }
  if (!quiet) {
    std::cout << dybit::io::to_csv(report);
    const double speedup = static_cast<double>(base.total_cycles) /
                           static_cast<double>(report.total_cycles);
    std::cout << "total_cycles " << report.total_cycles << '\n'
              << "time_us " << fixed(static_cast<double>(report.total_cycles) / hw.frequency_mhz, 3)
              << '\n'
              << "speedup_vs_8/8 " << fixed(speedup, 4) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- search

struct SearchArgs {
  std::string model, hw, tensors, strategy = "speedup", out;
  std::optional<double> alpha, beta;
  int topk = 1;
};

int cmd_search(const SearchArgs& a, bool quiet) {
  dybit::search::SearchConstraint c;
  c.strategy = dybit::search::parse_strategy(a.strategy);
  if (c.strategy == dybit::search::Strategy::kSpeedup && (!a.alpha || a.beta)) {
    throw UsageError{"--strategy speedup takes --alpha (and no --beta)"};
  }
  if (c.strategy == dybit::search::Strategy::kRmse && (!a.beta || a.alpha)) {
    throw UsageError{"--strategy rmse takes --beta (and no --alpha)"};
  }
  c.alpha = a.alpha;
  c.beta = a.beta;
  c.top_k = a.topk;

  const dybit::io::TensorManifest manifest = dybit::io::load_manifest(a.tensors);
  const dybit::ModelGraph model = dybit::io::load_model(a.model, manifest);
  const dybit::sim::HwConfig hw = dybit::io::load_hw_config(a.hw);
  try {
    dybit::search::validate(c, model.layers.size());
  } catch (const dybit::Error& e) {
    throw UsageError{e.what()};
  }
  const std::vector<dybit::search::LayerTensors> tensors =
      dybit::io::load_layer_tensors(model, manifest);
  const dybit::search::SearchResult r = dybit::search::run_search(model, hw, tensors, c);

  const fs::path out(a.out);
  dybit::io::save_report(r, out / "search.json");
  dybit::io::save_report(r, out / "search.csv");
  dybit::io::write_text(out / "trace.csv", dybit::io::trace_to_csv(r));
  if (!quiet) {
    std::cout << "strategy " << dybit::search::to_string(r.strategy) << "  constraint "
              << format_double(r.constraint) << "  top_k " << r.top_k << '\n';
    std::cout << dybit::io::trace_to_csv(r);
    std::cout << "iterations " << r.iterations << '\n'
              << "total_cycles " << r.total_latency_cycles << " (baseline " << r.baseline_latency
              << ")\n"
              << "speedup_ratio " << fixed(r.speedup_ratio, 4) << '\n'
              << "rmse_ratio " << fixed(r.rmse_ratio, 4) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- toy

struct ToyArgs {
  std::string out;
  int layers = 3;
  std::uint64_t seed = 1;
};

int cmd_toy(const ToyArgs& a, bool quiet) {
  dybit::synth::write_toy_workspace(a.out, a.layers, a.seed);
  if (!quiet) std::cout << "wrote toy model with " << a.layers << " layers to " << a.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DyBit quantization toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress the stdout summary");

  TableArgs table;
  auto* t = app.add_subcommand("table", "Print the value table of a DyBit format");
  t->add_option("--bits", table.bits, "Total bits, 2..8")->required()->check(CLI::Range(2, 8));
  auto* sflag = t->add_flag("--signed", table.is_signed, "Sign-magnitude format");
  t->add_flag("--unsigned", "Unsigned format (default)")->excludes(sflag);

  QuantizeArgs quant;
  auto* q = app.add_subcommand("quantize", "Quantize every layer at uniform widths");
  q->add_option("--model", quant.model, "Model descriptor")->required()->check(CLI::ExistingFile);
  q->add_option("--tensors", quant.tensors, "Tensor manifest")->required()->check(CLI::ExistingFile);
  q->add_option("--wbits", quant.wbits, "Weight width")->required()->check(CLI::IsMember({2, 4, 8}));
  q->add_option("--abits", quant.abits, "Activation width")
      ->required()
      ->check(CLI::IsMember({2, 4, 8}));
  q->add_option("--out", quant.out, "Output directory")->required();

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Model per-layer accelerator latency");
  s->add_option("--model", sim.model, "Model descriptor")->required()->check(CLI::ExistingFile);
  s->add_option("--hw", sim.hw, "Hardware config")->required()->check(CLI::ExistingFile);
  s->add_option("--assign", sim.assign, "Assignment file, or a/w for every layer")->required();
  s->add_option("--out", sim.out, "Directory for latency.json and latency.csv");

  SearchArgs search;
  auto* r = app.add_subcommand("search", "Layer-wise mixed-precision search");
  r->add_option("--model", search.model, "Model descriptor")->required()->check(CLI::ExistingFile);
  r->add_option("--hw", search.hw, "Hardware config")->required()->check(CLI::ExistingFile);
  r->add_option("--tensors", search.tensors, "Tensor manifest")
      ->required()
      ->check(CLI::ExistingFile);
  r->add_option("--strategy", search.strategy, "speedup or rmse")
      ->check(CLI::IsMember({"speedup", "rmse"}));
  auto* alpha = r->add_option("--alpha", search.alpha, "Speedup target (>= 1)");
  r->add_option("--beta", search.beta, "RMSE budget multiplier (>= 1)")->excludes(alpha);
  r->add_option("--topk", search.topk, "Layers considered per iteration");
  r->add_option("--out", search.out, "Output directory")->required();

  ToyArgs toy;
  auto* y = app.add_subcommand("toy", "Write a synthetic toy model workspace");
  y->add_option("--out", toy.out, "Output directory")->required();
  y->add_option("--layers", toy.layers, "Layer count")->check(CLI::Range(1, 64));
  y->add_option("--seed", toy.seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*t) return cmd_table(table);
    if (*q) return cmd_quantize(quant, quiet);
    if (*s) return cmd_simulate(sim, quiet);
    if (*r) return cmd_search(search, quiet);
    if (*y) return cmd_toy(toy, quiet);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.message << '\n';
    return kExitUsage;
  } catch (const dybit::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n'
              << "best achievable ratio: " << format_double(e.best_ratio()) << '\n';
    return kExitInfeasible;
  } catch (const dybit::CapacityError& e) {
    std::cerr << "capacity error in layer '" << e.layer() << "': " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
