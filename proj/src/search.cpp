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

#include "dybit/search.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dybit/errors.hpp"

namespace dybit::search {

namespace {

void check_inputs(const ModelGraph& model, const std::vector<LayerTensors>& tensors) {
  if (model.layers.empty()) throw InputError("model has no layers");
  if (tensors.size() != model.layers.size()) {
    throw InputError("tensors supplied for " + std::to_string(tensors.size()) +
                     " layers, model has " + std::to_string(model.layers.size()));
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (tensors[i].weights.size() == 0 || tensors[i].activations.size() == 0) {
      throw InputError("layer '" + model.layers[i].shape.name +
                       "' is missing weights or calibration activations");
    }
  }
}

// Runs body(i) for i in [0, n) in parallel and rethrows the first failure.
template <typename Body>
void parallel_jobs(std::size_t n, const Body& body) {
  std::exception_ptr failure;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(dybit_search_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

int lower(int bits) { return bits / 2; }

double ratio_of(double value, double baseline) {
  if (baseline == 0.0) return value == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return value / baseline;
}

class SearchState {
 public:
  SearchState(const ModelGraph& model, const MetricTable& table, Strategy strategy,
              double constraint, int top_k)
      : model_(model), table_(table) {
    result_.strategy = strategy;
    result_.constraint = constraint;
    result_.top_k = top_k;
    for (const auto& l : model.layers) result_.layer_names.push_back(l.shape.name);
    assign_ = uniform_assignment(model.layers.size(), PrecisionMode{8, 8});
    result_.baseline_latency = table.total_latency(assign_);
    result_.baseline_rmse = table.total_rmse(assign_);
  }

  QuantAssignment& assignment() { return assign_; }

  std::uint64_t latency() const { return table_.total_latency(assign_); }
  double rmse() const { return table_.total_rmse(assign_); }

  bool feasible() const {
    if (result_.strategy == Strategy::kSpeedup) {
      return meets_speedup(result_.baseline_latency, latency(), result_.constraint);
    }
    return meets_rmse(result_.baseline_rmse, rmse(), result_.constraint);
  }

  static bool degradable(const PrecisionMode& m) { return m.a_bits > 2 || m.w_bits > 2; }

  /// Increase of the layer's RMSE if every degradable operand drops a level.
  double rmse_impact(std::size_t layer) const {
    const PrecisionMode cur = assign_[layer];
    const PrecisionMode next{cur.a_bits > 2 ? lower(cur.a_bits) : cur.a_bits,
                             cur.w_bits > 2 ? lower(cur.w_bits) : cur.w_bits};
    return table_.metric(layer, next).rmse - table_.metric(layer, cur).rmse;
  }

  int& bits(std::size_t layer, Operand op) {
    return op == Operand::kWeights ? assign_[layer].w_bits : assign_[layer].a_bits;
  }

  void record(int iteration, std::size_t layer, Operand op, int from) {
    DegradeStep s;
    s.iteration = iteration;
    s.layer = layer;
    s.layer_name = model_.layers[layer].shape.name;
    s.operand = op;
    s.from_bits = from;
    s.to_bits = bits(layer, op);
    s.total_latency = latency();
    s.total_rmse = rmse();
    s.ratio = result_.strategy == Strategy::kSpeedup
                  ? ratio_of(static_cast<double>(result_.baseline_latency),
                             static_cast<double>(s.total_latency))
                  : ratio_of(s.total_rmse, result_.baseline_rmse);
    result_.trace.push_back(std::move(s));
  }

  SearchResult finish(int iterations) {
    result_.iterations = iterations;
    result_.assignment = assign_;
    result_.per_layer = table_.metrics(assign_);
    result_.total_latency_cycles = latency();
    result_.total_rmse = rmse();
    result_.speedup_ratio = ratio_of(static_cast<double>(result_.baseline_latency),
                                     static_cast<double>(result_.total_latency_cycles));
    result_.rmse_ratio = ratio_of(result_.total_rmse, result_.baseline_rmse);
    return result_;
  }

  const MetricTable& table() const { return table_; }

 private:
  const ModelGraph& model_;
  const MetricTable& table_;
  QuantAssignment assign_;
  SearchResult result_;
};

// Stable ordering by key, ties by ascending layer index.
template <typename Key>
void order_by(std::vector<std::size_t>& layers, const Key& key) {
  std::stable_sort(layers.begin(), layers.end(), [&](std::size_t a, std::size_t b) {
    const auto ka = key(a);
    const auto kb = key(b);
    if (ka != kb) return ka < kb;
    return a < b;
  });
}

void keep_top(std::vector<std::size_t>& layers, int k) {
  if (layers.size() > static_cast<std::size_t>(k)) layers.resize(static_cast<std::size_t>(k));
}

SearchResult make_exhaustive_result(const ModelGraph& model, const MetricTable& table,
                                    const SearchConstraint& c, const QuantAssignment& best) {
  SearchState state(model, table, c.strategy,
                    c.strategy == Strategy::kSpeedup ? *c.alpha : *c.beta, c.top_k);
  state.assignment() = best;
  return state.finish(0);
}

}  // namespace

FormatSpec weight_format(int bits) { return FormatSpec{bits, true}; }

FormatSpec activation_format(int bits, bool is_signed) { return FormatSpec{bits, is_signed}; }

std::string to_string(Strategy s) { return s == Strategy::kSpeedup ? "speedup" : "rmse"; }

Strategy parse_strategy(const std::string& s) {
  if (s == "speedup") return Strategy::kSpeedup;
  if (s == "rmse") return Strategy::kRmse;
  throw InputError("unknown search strategy '" + s + "' (expected speedup or rmse)");
}

void validate(const SearchConstraint& c, std::size_t layer_count) {
  if (c.top_k < 1 || static_cast<std::size_t>(c.top_k) > layer_count) {
    throw InputError("top_k must be in [1, " + std::to_string(layer_count) + "]");
  }
  if (c.strategy == Strategy::kSpeedup) {
    if (!c.alpha || c.beta) throw InputError("speedup strategy takes alpha and no beta");
    if (!(*c.alpha >= 1.0) || !std::isfinite(*c.alpha)) {
      throw InputError("alpha must be a finite value >= 1");
    }
  } else {
    if (!c.beta || c.alpha) throw InputError("rmse strategy takes beta and no alpha");
    if (!(*c.beta >= 1.0)) throw InputError("beta must be >= 1");
  }
}

bool meets_speedup(std::uint64_t baseline_latency, std::uint64_t latency, double alpha) noexcept {
  return alpha * static_cast<double>(latency) <= static_cast<double>(baseline_latency);
}

bool meets_rmse(double baseline_rmse, double rmse, double beta) noexcept {
  return rmse <= beta * baseline_rmse;
}

std::vector<LayerMetric> layerwise_metrics(const ModelGraph& model, const QuantAssignment& assign,
                                           const HwConfig& hw,
                                           const std::vector<LayerTensors>& tensors) {
  check_inputs(model, tensors);
  if (assign.size() != model.layers.size()) {
    throw InputError("assignment does not cover every layer");
  }
  std::vector<LayerMetric> out(model.layers.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const ModelLayer& layer = model.layers[i];
    const PrecisionMode mode = assign[i];
    LayerMetric& m = out[i];
    m.latency = sim::layer_latency(layer.shape, mode, hw).cycles;
    m.weight_rmse = quantization_rmse(tensors[i].weights, weight_format(mode.w_bits));
    m.activation_rmse = quantization_rmse(
        tensors[i].activations, activation_format(mode.a_bits, layer.signed_activations));
    m.rmse = m.weight_rmse + m.activation_rmse;
  }
  return out;
}

MetricTable::MetricTable(const ModelGraph& model, const HwConfig& hw,
                         const std::vector<LayerTensors>& tensors) {
  check_inputs(model, tensors);
  sim::validate(hw);
  const std::size_t n = model.layers.size();
  latency_.resize(n);
  weight_rmse_.resize(n);
  activation_rmse_.resize(n);

  parallel_jobs(n * 9, [&](std::size_t job) {
    const std::size_t layer = job / 9;
    const std::size_t a = (job % 9) / 3;
    const std::size_t w = job % 3;
    latency_[layer][a][w] =
        sim::layer_latency(model.layers[layer].shape, PrecisionMode{kWidths[a], kWidths[w]}, hw)
            .cycles;
  });
  parallel_jobs(n * 6, [&](std::size_t job) {
    const std::size_t layer = job / 6;
    const std::size_t level = job % 3;
    const int bits = kWidths[level];
    if ((job % 6) < 3) {
      weight_rmse_[layer][level] = quantization_rmse(tensors[layer].weights, weight_format(bits));
    } else {
      activation_rmse_[layer][level] = quantization_rmse(
          tensors[layer].activations,
          activation_format(bits, model.layers[layer].signed_activations));
    }
  });
}

std::size_t MetricTable::index(int bits) {
  switch (bits) {
    case 8: return 0;
    case 4: return 1;
    case 2: return 2;
    default: throw ModeError("search widths are 8, 4 and 2, got " + std::to_string(bits));
  }
}

LayerMetric MetricTable::metric(std::size_t layer, const PrecisionMode& mode) const {
  LayerMetric m;
  m.latency = latency_.at(layer)[index(mode.a_bits)][index(mode.w_bits)];
  m.weight_rmse = weight_rmse_[layer][index(mode.w_bits)];
  m.activation_rmse = activation_rmse_[layer][index(mode.a_bits)];
  m.rmse = m.weight_rmse + m.activation_rmse;
  return m;
}

std::vector<LayerMetric> MetricTable::metrics(const QuantAssignment& assign) const {
  if (assign.size() != layers()) throw InputError("assignment does not cover every layer");
  std::vector<LayerMetric> out;
  out.reserve(assign.size());
  for (std::size_t i = 0; i < assign.size(); ++i) out.push_back(metric(i, assign[i]));
  return out;
}

std::uint64_t MetricTable::total_latency(const QuantAssignment& assign) const {
  std::uint64_t total = 0;
  for (const LayerMetric& m : metrics(assign)) total += m.latency;
  return total;
}

double MetricTable::total_rmse(const QuantAssignment& assign) const {
  double total = 0.0;
  for (const LayerMetric& m : metrics(assign)) total += m.rmse;
  return total;
}

SearchResult search_speedup_constrained(const ModelGraph& model, const MetricTable& table,
                                        double alpha, int top_k) {
  validate(SearchConstraint{Strategy::kSpeedup, alpha, std::nullopt, top_k}, model.layers.size());
  SearchState state(model, table, Strategy::kSpeedup, alpha, top_k);

  const QuantAssignment floor = uniform_assignment(model.layers.size(), PrecisionMode{2, 2});
  const std::uint64_t floor_latency = table.total_latency(floor);
  const std::uint64_t base_latency = state.latency();
  if (!meets_speedup(base_latency, floor_latency, alpha)) {
    const double best =
        ratio_of(static_cast<double>(base_latency), static_cast<double>(floor_latency));
    throw InfeasibleError("speedup " + std::to_string(alpha) +
                              " is not reachable; all-2/2 achieves " + std::to_string(best),
                          best);
  }

  int iteration = 0;
  while (!state.feasible()) {
    ++iteration;
    const QuantAssignment& assign = state.assignment();
    std::vector<std::size_t> list;
    for (std::size_t i = 0; i < assign.size(); ++i) {
      if (SearchState::degradable(assign[i])) list.push_back(i);
    }
    if (list.empty()) throw std::logic_error("speedup search exhausted a feasible space");

    // Slowest first, then the cheapest in RMSE among them.
    order_by(list, [&](std::size_t i) {
      return -static_cast<double>(table.metric(i, assign[i]).latency);
    });
    keep_top(list, top_k);
    order_by(list, [&](std::size_t i) { return state.rmse_impact(i); });

    for (const Operand op : {Operand::kWeights, Operand::kActivations}) {
      if (state.feasible()) break;
      for (const std::size_t layer : list) {
        int& bits = state.bits(layer, op);
        if (bits == 2) continue;
        const int from = bits;
        bits = lower(bits);
        state.record(iteration, layer, op, from);
        if (state.feasible()) break;
      }
    }
  }
  return state.finish(iteration);
}

SearchResult search_rmse_constrained(const ModelGraph& model, const MetricTable& table,
                                     double beta, int top_k) {
  validate(SearchConstraint{Strategy::kRmse, std::nullopt, beta, top_k}, model.layers.size());
  SearchState state(model, table, Strategy::kRmse, beta, top_k);

  // Lowering one operand of `layer` a level; rolled back unless in budget.
  const auto try_degrade = [&](std::size_t layer, Operand op) {
    int& bits = state.bits(layer, op);
    if (bits == 2) return false;
    const int from = bits;
    bits = lower(bits);
    const bool ok = state.feasible();
    bits = from;
    return ok;
  };

  int iteration = 0;
  while (true) {
    const QuantAssignment& assign = state.assignment();
    std::vector<std::size_t> list;
    for (std::size_t i = 0; i < assign.size(); ++i) {
      if (try_degrade(i, Operand::kWeights) || try_degrade(i, Operand::kActivations)) {
        list.push_back(i);
      }
    }
    if (list.empty()) break;
    ++iteration;

    order_by(list, [&](std::size_t i) { return state.rmse_impact(i); });
    keep_top(list, top_k);
    order_by(list, [&](std::size_t i) {
      return -static_cast<double>(table.metric(i, assign[i]).latency);
    });

    for (const Operand op : {Operand::kWeights, Operand::kActivations}) {
      for (const std::size_t layer : list) {
        if (!try_degrade(layer, op)) continue;
        int& bits = state.bits(layer, op);
        const int from = bits;
        bits = lower(bits);
        state.record(iteration, layer, op, from);
      }
    }
  }
  return state.finish(iteration);
}

SearchResult search_speedup_constrained(const ModelGraph& model, const HwConfig& hw,
                                        const std::vector<LayerTensors>& tensors, double alpha,
                                        int top_k) {
  validate(SearchConstraint{Strategy::kSpeedup, alpha, std::nullopt, top_k}, model.layers.size());
  return search_speedup_constrained(model, MetricTable(model, hw, tensors), alpha, top_k);
}

SearchResult search_rmse_constrained(const ModelGraph& model, const HwConfig& hw,
                                     const std::vector<LayerTensors>& tensors, double beta,
                                     int top_k) {
  validate(SearchConstraint{Strategy::kRmse, std::nullopt, beta, top_k}, model.layers.size());
  return search_rmse_constrained(model, MetricTable(model, hw, tensors), beta, top_k);
}

SearchResult run_search(const ModelGraph& model, const HwConfig& hw,
                        const std::vector<LayerTensors>& tensors, const SearchConstraint& c) {
  validate(c, model.layers.size());
  if (c.strategy == Strategy::kSpeedup) {
    return search_speedup_constrained(model, hw, tensors, *c.alpha, c.top_k);
  }
  return search_rmse_constrained(model, hw, tensors, *c.beta, c.top_k);
}

SearchResult exhaustive_search(const ModelGraph& model, const MetricTable& table,
                               const SearchConstraint& c) {
  validate(c, model.layers.size());
  const std::size_t n = model.layers.size();
  std::uint64_t space = 1;
  for (std::size_t i = 0; i < n; ++i) {
    space *= 9;
    if (space > kExhaustiveLimit) {
      throw GuardError("exhaustive search over 9^" + std::to_string(n) +
                       " assignments exceeds the 10^6 limit");
    }
  }

  const QuantAssignment base = uniform_assignment(n, PrecisionMode{8, 8});
  const std::uint64_t base_latency = table.total_latency(base);
  const double base_rmse = table.total_rmse(base);

  std::optional<QuantAssignment> best;
  std::uint64_t best_latency = 0;
  double best_rmse = 0.0;
  QuantAssignment assign(n);
  for (std::uint64_t index = 0; index < space; ++index) {
    // Mixed-radix digits: layer 0 most significant, (a, w) per layer.
    std::uint64_t rest = index;
    for (std::size_t i = n; i-- > 0;) {
      assign[i] = PrecisionMode{kWidths[(rest % 9) / 3], kWidths[rest % 3]};
      rest /= 9;
    }
    const std::uint64_t latency = table.total_latency(assign);
    const double rmse = table.total_rmse(assign);
    bool take = false;
    if (c.strategy == Strategy::kSpeedup) {
      if (!meets_speedup(base_latency, latency, *c.alpha)) continue;
      take = !best || rmse < best_rmse || (rmse == best_rmse && latency < best_latency);
    } else {
      if (!meets_rmse(base_rmse, rmse, *c.beta)) continue;
      take = !best || latency < best_latency || (latency == best_latency && rmse < best_rmse);
    }
    if (take) {
      best = assign;
      best_latency = latency;
      best_rmse = rmse;
    }
  }
  if (!best) {
    const double ceiling =
        ratio_of(static_cast<double>(base_latency),
                 static_cast<double>(table.total_latency(uniform_assignment(n, {2, 2}))));
    throw InfeasibleError("no assignment meets speedup " + std::to_string(*c.alpha), ceiling);
  }
  return make_exhaustive_result(model, table, c, *best);
}

SearchResult exhaustive_search(const ModelGraph& model, const HwConfig& hw,
                               const std::vector<LayerTensors>& tensors,
                               const SearchConstraint& c) {
  validate(c, model.layers.size());
  return exhaustive_search(model, MetricTable(model, hw, tensors), c);
}

}  // namespace dybit::search
