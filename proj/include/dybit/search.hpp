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

// Layer-wise mixed-precision search over {8, 4, 2} bits for weights and
// activations.
//
// Speedup-constrained: minimize total RMSE subject to
//     alpha * sum Lat(a, w) <= sum Lat(8, 8).
// Each round takes the k slowest layers that can still be degraded, orders
// them by ascending RMSE impact, lowers their weights one level (8->4->2) one
// layer at a time and then their activations, stopping as soon as the
// constraint holds.
//
// RMSE-constrained: minimize total latency subject to
//     sum RMSE(a, w) <= beta * sum RMSE(8, 8).
// Each round takes the k layers with the smallest RMSE impact among those
// that still have an in-budget degrade, orders them by descending latency,
// and applies weight then activation degrades that keep the budget. It stops
// when no layer can be lowered without exceeding the budget.
//
// Per-layer RMSE is weight RMSE + activation RMSE. Ranking ties go to the
// lower layer index.

#ifndef DYBIT_SEARCH_HPP_
#define DYBIT_SEARCH_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dybit/latency.hpp"
#include "dybit/model.hpp"
#include "dybit/tensor.hpp"

namespace dybit::search {

using pe::PrecisionMode;
using sim::HwConfig;

inline constexpr std::array<int, 3> kWidths = {8, 4, 2};

/// Weights plus calibration activations of one layer.
struct LayerTensors {
  TensorF32 weights;
  TensorF32 activations;
};

/// Weights are always signed; activations follow the layer's flag.
FormatSpec weight_format(int bits);
FormatSpec activation_format(int bits, bool is_signed);

enum class Strategy { kSpeedup, kRmse };

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& s);

struct SearchConstraint {
  Strategy strategy = Strategy::kSpeedup;
  std::optional<double> alpha;
  std::optional<double> beta;
  int top_k = 1;
};

void validate(const SearchConstraint& c, std::size_t layer_count);

struct LayerMetric {
  std::uint64_t latency = 0;
  double weight_rmse = 0.0;
  double activation_rmse = 0.0;
  double rmse = 0.0;  // weight + activation

  friend bool operator==(const LayerMetric&, const LayerMetric&) = default;
};

/// Direct evaluation through the latency simulator and tensor quantizer.
std::vector<LayerMetric> layerwise_metrics(const ModelGraph& model, const QuantAssignment& assign,
                                           const HwConfig& hw,
                                           const std::vector<LayerTensors>& tensors);

/// All 9 latencies and 3 + 3 RMSE values of every layer, computed once.
class MetricTable {
 public:
  MetricTable(const ModelGraph& model, const HwConfig& hw,
              const std::vector<LayerTensors>& tensors);

  std::size_t layers() const noexcept { return latency_.size(); }
  LayerMetric metric(std::size_t layer, const PrecisionMode& mode) const;
  std::vector<LayerMetric> metrics(const QuantAssignment& assign) const;

  std::uint64_t total_latency(const QuantAssignment& assign) const;
  /// Sum of per-layer RMSE in layer order.
  double total_rmse(const QuantAssignment& assign) const;

 private:
  static std::size_t index(int bits);

  std::vector<std::array<std::array<std::uint64_t, 3>, 3>> latency_;  // [layer][a][w]
  std::vector<std::array<double, 3>> weight_rmse_;
  std::vector<std::array<double, 3>> activation_rmse_;
};

// Constraint predicates shared by the heuristic and the exhaustive oracle.
bool meets_speedup(std::uint64_t baseline_latency, std::uint64_t latency, double alpha) noexcept;
bool meets_rmse(double baseline_rmse, double rmse, double beta) noexcept;

enum class Operand { kWeights, kActivations };

struct DegradeStep {
  int iteration = 0;
  std::size_t layer = 0;
  std::string layer_name;
  Operand operand = Operand::kWeights;
  int from_bits = 8;
  int to_bits = 4;
  std::uint64_t total_latency = 0;
  double total_rmse = 0.0;
  double ratio = 1.0;  // constrained quantity relative to the 8/8 baseline

  friend bool operator==(const DegradeStep&, const DegradeStep&) = default;
};

struct SearchResult {
  Strategy strategy = Strategy::kSpeedup;
  double constraint = 1.0;  // alpha or beta
  int top_k = 1;
  std::vector<std::string> layer_names;
  QuantAssignment assignment;
  std::vector<LayerMetric> per_layer;
  std::uint64_t baseline_latency = 0;
  double baseline_rmse = 0.0;
  std::uint64_t total_latency_cycles = 0;
  double total_rmse = 0.0;
  double speedup_ratio = 1.0;  // baseline latency / latency
  double rmse_ratio = 1.0;     // rmse / baseline rmse
  int iterations = 0;
  std::vector<DegradeStep> trace;

  friend bool operator==(const SearchResult&, const SearchResult&) = default;
};

SearchResult search_speedup_constrained(const ModelGraph& model, const HwConfig& hw,
                                        const std::vector<LayerTensors>& tensors, double alpha,
                                        int top_k);
SearchResult search_rmse_constrained(const ModelGraph& model, const HwConfig& hw,
                                     const std::vector<LayerTensors>& tensors, double beta,
                                     int top_k);

/// Dispatches on the constraint's strategy.
SearchResult run_search(const ModelGraph& model, const HwConfig& hw,
                        const std::vector<LayerTensors>& tensors, const SearchConstraint& c);

inline constexpr std::uint64_t kExhaustiveLimit = 1'000'000;

/// True optimum over all 9^N assignments; refuses (GuardError) past 10^6.
SearchResult exhaustive_search(const ModelGraph& model, const HwConfig& hw,
                               const std::vector<LayerTensors>& tensors,
                               const SearchConstraint& c);

// Table-driven variants, for callers that reuse one MetricTable across runs.
SearchResult search_speedup_constrained(const ModelGraph& model, const MetricTable& table,
                                        double alpha, int top_k);
SearchResult search_rmse_constrained(const ModelGraph& model, const MetricTable& table,
                                     double beta, int top_k);
SearchResult exhaustive_search(const ModelGraph& model, const MetricTable& table,
                               const SearchConstraint& c);

}  // namespace dybit::search

#endif  // DYBIT_SEARCH_HPP_
