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

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <gtest/gtest.h>
#include <omp.h>

#include "dybit/errors.hpp"
#include "dybit/latency.hpp"
#include "dybit/search.hpp"
#include "dybit/synthetic.hpp"
#include "oracles.hpp"

namespace dybit::search {
namespace {

struct Toy {
  ModelGraph model;
  std::vector<LayerTensors> tensors;
  HwConfig hw = synth::toy_hw();
};

Toy make_toy(std::uint64_t seed, int layers = 3, std::int64_t lo = 16, std::int64_t hi = 256) {
  Toy t;
  t.model = synth::toy_model(layers, seed, lo, hi);
  t.tensors = synth::toy_tensors(t.model, seed);
  return t;
}

// Per-layer latency and RMSE of all nine modes, straight from the simulator
// and the quantizer; totals are summed in layer order.
struct BruteForce {
  std::vector<std::array<std::uint64_t, 9>> latency;
  std::vector<std::array<double, 9>> rmse;

  explicit BruteForce(const Toy& t) {
    for (std::size_t i = 0; i < t.model.layers.size(); ++i) {
      std::array<std::uint64_t, 9> lat{};
      std::array<double, 9> err{};
      for (int j = 0; j < 9; ++j) {
        const PrecisionMode mode{kWidths[j / 3], kWidths[j % 3]};
        lat[j] = sim::layer_latency(t.model.layers[i].shape, mode, t.hw).cycles;
        err[j] = quantization_rmse(t.tensors[i].weights, FormatSpec{mode.w_bits, true}) +
                 quantization_rmse(t.tensors[i].activations,
                                   FormatSpec{mode.a_bits, t.model.layers[i].signed_activations});
      }
      latency.push_back(lat);
      rmse.push_back(err);
    }
  }

  static int slot(const PrecisionMode& m) {
    auto idx = [](int b) { return b == 8 ? 0 : b == 4 ? 1 : 2; };
    return 3 * idx(m.a_bits) + idx(m.w_bits);
  }
  std::uint64_t total_latency(const QuantAssignment& a) const {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += latency[i][slot(a[i])];
    return s;
  }
  double total_rmse(const QuantAssignment& a) const {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += rmse[i][slot(a[i])];
    return s;
  }

  /// Best objective over all 9^N assignments: min RMSE under a speedup
  /// constraint, or min latency under an RMSE budget.
  std::optional<double> optimum(Strategy s, double c) const {
    const std::size_t n = latency.size();
    const QuantAssignment base = uniform_assignment(n, {8, 8});
    const double base_lat = static_cast<double>(total_latency(base));
    const double base_rmse = total_rmse(base);
    std::optional<double> best;
    std::size_t space = 1;
    for (std::size_t i = 0; i < n; ++i) space *= 9;
    QuantAssignment a(n);
    for (std::size_t idx = 0; idx < space; ++idx) {
      std::size_t r = idx;
      for (std::size_t i = 0; i < n; ++i, r /= 9) {
        a[i] = PrecisionMode{kWidths[(r % 9) / 3], kWidths[r % 3]};
      }
      const double lat = static_cast<double>(total_latency(a));
      const double err = total_rmse(a);
      if (s == Strategy::kSpeedup) {
        if (c * lat <= base_lat && (!best || err < *best)) best = err;
      } else {
        if (err <= c * base_rmse && (!best || lat < *best)) best = lat;
      }
    }
    return best;
  }
};

TEST(Search, LayerwiseMetricsComposeTheUnderlyingModules) {
  const Toy t = make_toy(1);
  const BruteForce bf(t);
  const QuantAssignment assign = {{8, 8}, {4, 2}, {2, 4}};
  const std::vector<LayerMetric> m = layerwise_metrics(t.model, assign, t.hw, t.tensors);
  const MetricTable table(t.model, t.hw, t.tensors);
  ASSERT_EQ(m.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(m[i].latency, bf.latency[i][BruteForce::slot(assign[i])]);
    EXPECT_EQ(m[i].rmse, bf.rmse[i][BruteForce::slot(assign[i])]);
    EXPECT_EQ(m[i].rmse, m[i].weight_rmse + m[i].activation_rmse);
    EXPECT_EQ(m[i], table.metric(i, assign[i]));
  }
}

TEST(Search, MetricsMatchStringOracleRecomputation) {
  const Toy t = make_toy(4, 3, 4, 24);
  const QuantAssignment assign = {{4, 4}, {2, 8}, {8, 2}};
  const std::vector<LayerMetric> m = layerwise_metrics(t.model, assign, t.hw, t.tensors);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& w = t.tensors[i].weights.data;
    const auto& a = t.tensors[i].activations.data;
    const double want =
        oracle::normalized_rmse(w, oracle::dybit_fake_quant(w, assign[i].w_bits, true)) +
        oracle::normalized_rmse(a, oracle::dybit_fake_quant(a, assign[i].a_bits, false));
    EXPECT_NEAR(m[i].rmse, want, 1e-6 * want) << i;
  }
}

TEST(Search, DegradingOneLayerOnlyChangesThatLayer) {
  const Toy t = make_toy(2);
  const auto base = layerwise_metrics(t.model, uniform_assignment(3, {8, 8}), t.hw, t.tensors);
  QuantAssignment one = uniform_assignment(3, {8, 8});
  one[1] = {4, 2};
  const auto changed = layerwise_metrics(t.model, one, t.hw, t.tensors);
  EXPECT_EQ(changed[0], base[0]);
  EXPECT_EQ(changed[2], base[2]);
  EXPECT_NE(changed[1], base[1]);
}

TEST(Search, AlphaOneIsTrivial) {
  const Toy t = make_toy(3);
  const SearchResult r = search_speedup_constrained(t.model, t.hw, t.tensors, 1.0, 1);
  EXPECT_TRUE(r.trace.empty());
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.assignment, uniform_assignment(3, {8, 8}));
  EXPECT_EQ(r.speedup_ratio, 1.0);
  EXPECT_EQ(r.rmse_ratio, 1.0);
}

TEST(Search, BetaOneKeepsBaselineError) {
  const Toy t = make_toy(3);
  const SearchResult r = search_rmse_constrained(t.model, t.hw, t.tensors, 1.0, 2);
  EXPECT_LE(r.total_rmse, r.baseline_rmse);
}

TEST(Search, UnboundedBetaReachesTheFloor) {
  const Toy t = make_toy(5);
  const SearchResult r = search_rmse_constrained(
      t.model, t.hw, t.tensors, std::numeric_limits<double>::infinity(), 1);
  EXPECT_EQ(r.assignment, uniform_assignment(3, {2, 2}));
  EXPECT_EQ(r.trace.size(), 12u);
}

TEST(Search, UnreachableAlphaReportsBestRatio) {
  const Toy t = make_toy(6);
  const BruteForce bf(t);
  const double ceiling = static_cast<double>(bf.total_latency(uniform_assignment(3, {8, 8}))) /
                         static_cast<double>(bf.total_latency(uniform_assignment(3, {2, 2})));
  try {
    search_speedup_constrained(t.model, t.hw, t.tensors, 20.0, 1);
    FAIL() << "expected infeasibility";
  } catch (const InfeasibleError& e) {
    EXPECT_EQ(e.best_ratio(), ceiling);
  }
  EXPECT_THROW(exhaustive_search(t.model, t.hw, t.tensors,
                                 SearchConstraint{Strategy::kSpeedup, 20.0, std::nullopt, 1}),
               InfeasibleError);
}

// Feasibility, oracle gap, step bound and trace consistency on random models.
TEST(Search, HeuristicsAreFeasibleAndNeverBeatTheOracle) {
  for (std::uint64_t seed = 100; seed < 124; ++seed) {
    const Toy t = make_toy(seed);
    const BruteForce bf(t);
    const MetricTable table(t.model, t.hw, t.tensors);
    const QuantAssignment base = uniform_assignment(3, {8, 8});
    const std::uint64_t base_lat = bf.total_latency(base);
    const double base_rmse = bf.total_rmse(base);
    const double ceiling = static_cast<double>(base_lat) /
                           static_cast<double>(bf.total_latency(uniform_assignment(3, {2, 2})));

    for (int k = 1; k <= 3; ++k) {
      for (double alpha : {1.0, 1.5, 2.0, 3.0, 4.0}) {
        if (alpha > ceiling) continue;
        const SearchResult r = search_speedup_constrained(t.model, table, alpha, k);
        const std::uint64_t lat = bf.total_latency(r.assignment);
        ASSERT_LE(alpha * static_cast<double>(lat), static_cast<double>(base_lat));
        EXPECT_EQ(r.total_latency_cycles, lat);
        EXPECT_EQ(r.total_rmse, bf.total_rmse(r.assignment));
        const auto best = bf.optimum(Strategy::kSpeedup, alpha);
        ASSERT_TRUE(best.has_value());
        EXPECT_GE(r.total_rmse, *best) << "seed " << seed << " alpha " << alpha;
        EXPECT_LE(r.trace.size(), 12u);
        const SearchResult ex =
            exhaustive_search(t.model, table, {Strategy::kSpeedup, alpha, std::nullopt, k});
        EXPECT_EQ(ex.total_rmse, *best);
      }
      for (double beta : {1.0, 1.2, 1.5, 2.0, 4.0}) {
        const SearchResult r = search_rmse_constrained(t.model, table, beta, k);
        const double err = bf.total_rmse(r.assignment);
        ASSERT_LE(err, beta * base_rmse);
        EXPECT_EQ(r.total_latency_cycles, bf.total_latency(r.assignment));
        const auto best = bf.optimum(Strategy::kRmse, beta);
        ASSERT_TRUE(best.has_value());
        EXPECT_GE(static_cast<double>(r.total_latency_cycles), *best);
        EXPECT_LE(r.trace.size(), 12u);
        const SearchResult ex =
            exhaustive_search(t.model, table, {Strategy::kRmse, std::nullopt, beta, k});
        EXPECT_EQ(static_cast<double>(ex.total_latency_cycles), *best);
      }
    }
  }
}

TEST(Search, TraceReplaysToTheResult) {
  const Toy t = make_toy(11, 4);
  for (const SearchResult& r :
       {search_speedup_constrained(t.model, t.hw, t.tensors, 3.0, 2),
        search_rmse_constrained(t.model, t.hw, t.tensors, 1.5, 2)}) {
    const BruteForce bf(t);
    QuantAssignment a = uniform_assignment(4, {8, 8});
    std::uint64_t prev_lat = bf.total_latency(a);
    int prev_iter = 0;
    for (const DegradeStep& s : r.trace) {
      int& bits = s.operand == Operand::kWeights ? a[s.layer].w_bits : a[s.layer].a_bits;
      ASSERT_EQ(bits, s.from_bits);
      ASSERT_EQ(s.to_bits, s.from_bits / 2);
      bits = s.to_bits;
      EXPECT_EQ(s.layer_name, t.model.layers[s.layer].shape.name);
      EXPECT_EQ(s.total_latency, bf.total_latency(a));
      EXPECT_EQ(s.total_rmse, bf.total_rmse(a));
      EXPECT_LE(s.total_latency, prev_lat);
      EXPECT_GE(s.iteration, prev_iter);
      prev_lat = s.total_latency;
      prev_iter = s.iteration;
    }
    EXPECT_EQ(a, r.assignment);
    EXPECT_EQ(r.iterations, prev_iter);
  }
}

TEST(Search, LargerAlphaExtendsTheSameTrace) {
  const Toy t = make_toy(21, 5);
  const MetricTable table(t.model, t.hw, t.tensors);
  std::vector<DegradeStep> prev;
  double prev_rmse = 0;
  for (double alpha : {1.0, 1.5, 2.0, 3.0, 4.0, 6.0}) {
    SearchResult r;
    try {
      r = search_speedup_constrained(t.model, table, alpha, 2);
    } catch (const InfeasibleError&) {
      break;
    }
    ASSERT_GE(r.trace.size(), prev.size());
    for (std::size_t i = 0; i < prev.size(); ++i) EXPECT_EQ(r.trace[i], prev[i]);
    EXPECT_GE(r.total_rmse, prev_rmse);
    prev = r.trace;
    prev_rmse = r.total_rmse;
  }
}

TEST(Search, RmseModeStopsOnlyWhenNoDegradeFits) {
  const Toy t = make_toy(31, 4);
  const MetricTable table(t.model, t.hw, t.tensors);
  const SearchResult r = search_rmse_constrained(t.model, table, 1.3, 1);
  const double budget = 1.3 * r.baseline_rmse;
  for (std::size_t i = 0; i < 4; ++i) {
    for (int op = 0; op < 2; ++op) {
      QuantAssignment a = r.assignment;
      int& bits = op == 0 ? a[i].w_bits : a[i].a_bits;
      if (bits == 2) continue;
      bits /= 2;
      EXPECT_GT(table.total_rmse(a), budget) << "layer " << i << " op " << op;
    }
  }
}

TEST(Search, ResultsIndependentOfThreadCount) {
  const Toy t = make_toy(41, 6);
  omp_set_num_threads(1);
  const SearchResult a = search_speedup_constrained(t.model, t.hw, t.tensors, 2.5, 2);
  const SearchResult c = search_rmse_constrained(t.model, t.hw, t.tensors, 1.4, 3);
  omp_set_num_threads(5);
  EXPECT_EQ(search_speedup_constrained(t.model, t.hw, t.tensors, 2.5, 2), a);
  EXPECT_EQ(search_rmse_constrained(t.model, t.hw, t.tensors, 1.4, 3), c);
}

TEST(Search, RejectsBadConstraints) {
  const Toy t = make_toy(7);
  EXPECT_THROW(search_speedup_constrained(t.model, t.hw, t.tensors, 0.5, 1), InputError);
  EXPECT_THROW(search_speedup_constrained(t.model, t.hw, t.tensors, 2.0, 0), InputError);
  EXPECT_THROW(search_speedup_constrained(t.model, t.hw, t.tensors, 2.0, 4), InputError);
  EXPECT_THROW(search_rmse_constrained(t.model, t.hw, t.tensors, 0.9, 1), InputError);
  EXPECT_THROW(validate(SearchConstraint{Strategy::kRmse, 2.0, std::nullopt, 1}, 3), InputError);
  EXPECT_THROW(validate(SearchConstraint{Strategy::kSpeedup, 2.0, 2.0, 1}, 3), InputError);
  EXPECT_THROW(parse_strategy("fastest"), InputError);
  std::vector<LayerTensors> missing = t.tensors;
  missing.pop_back();
  EXPECT_THROW(layerwise_metrics(t.model, uniform_assignment(3, {8, 8}), t.hw, missing),
               InputError);
  const Toy big = make_toy(8, 7, 4, 8);
  EXPECT_THROW(exhaustive_search(big.model, big.hw, big.tensors,
                                 SearchConstraint{Strategy::kSpeedup, 2.0, std::nullopt, 1}),
               GuardError);
}

}  // namespace
}  // namespace dybit::search
