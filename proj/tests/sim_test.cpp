/*
 * Copyright 2026 The exaloglog-cpp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "exaloglog/sim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

namespace exaloglog {
namespace {

SimPlan make_plan(EstimatorKind kind, std::vector<std::uint64_t> checkpoints, int runs, std::uint64_t seed = 1) {
  SimPlan plan;
  plan.params = Params::create(2, 20, 8);
  plan.estimator = kind;
  plan.checkpoints = std::move(checkpoints);
  plan.runs = runs;
  plan.seed = seed;
  return plan;
}

TEST(SplitMix64Test, ReferenceOutput) {
  SplitMix64 rng(0);
  EXPECT_EQ(rng(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(rng(), 0x6e789e6aa1b965f4ULL);
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(GeometricTest, MeanMatchesInverseProbability) {
  const Params params = Params::create(2, 20, 8);
  SplitMix64 rng(61);
  for (std::uint64_t u : {1u, 9u, 60u, 180u, 200u}) {
    const double q = update_value_probability(u, params) / 256;
    double sum = 0;
    for (int i = 0; i < 1000000; ++i) sum += static_cast<double>(sample_geometric(rng, q));
    EXPECT_NEAR(sum / 1e6 * q, 1.0, 0.01) << "u=" << u;
  }
  EXPECT_EQ(sample_geometric(rng, 1.0), 1u);
  EXPECT_THROW(sample_geometric(rng, 0.0), std::domain_error);
  double sum = 0;
  for (int i = 0; i < 1000000; ++i) sum += static_cast<double>(sample_geometric(rng, 0.5));
  EXPECT_NEAR(sum / 1e6, 2.0, 0.01);
}

TEST(SimulationTest, Determinism) {
  for (EstimatorKind kind : {EstimatorKind::ml, EstimatorKind::martingale}) {
    SimPlan plan = make_plan(kind, {10, 1000, 100000, 1000000000}, 8);
    plan.direct_limit = 10000;
    EXPECT_EQ(run_estimates(plan, 1), run_estimates(plan, 3));
    EXPECT_EQ(run_estimates(plan, 1), run_estimates(plan, 1));
    SimPlan other = plan;
    other.seed = 2;
    EXPECT_NE(run_estimates(plan, 1), run_estimates(other, 1));
  }
  SimPlan tokens = make_plan(EstimatorKind::tokens, {0, 100, 5000}, 4);
  EXPECT_EQ(run_estimates(tokens, 1), run_estimates(tokens, 2));
}

TEST(SimulationTest, ZeroCheckpoint) {
  for (EstimatorKind kind : {EstimatorKind::ml, EstimatorKind::martingale, EstimatorKind::tokens}) {
    const SimPlan plan = make_plan(kind, {0, 10}, 3);
    EXPECT_EQ(simulate_direct(plan, 5).front().estimate, 0.0);
    if (kind != EstimatorKind::tokens) {
      EXPECT_EQ(simulate_fast(plan, 5).front().estimate, 0.0);
    }
  }
  const ErrorReport report = run_plan(make_plan(EstimatorKind::ml, {0, 10}, 3));
  EXPECT_EQ(report.rows[0].mean_estimate, 0.0);
  EXPECT_TRUE(std::isnan(report.rows[0].rel_bias));
}

// Starting the event-driven phase immediately: the first insertion always
// changes the state, so the martingale estimate after one insertion is 1.
TEST(SimulationTest, FastPhaseFirstEvent) {
  SimPlan plan = make_plan(EstimatorKind::martingale, {1, 2}, 1);
  plan.direct_limit = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto result = simulate_fast(plan, seed);
    ASSERT_EQ(result[0].estimate, 1.0);
    ASSERT_GE(result[1].estimate, 1.0);
  }
}

TEST(SimulationTest, PlanValidation) {
  SimPlan plan = make_plan(EstimatorKind::ml, {10, 5}, 2);
  EXPECT_THROW(plan.validate(), std::invalid_argument);
  plan.checkpoints = {5, 5};
  EXPECT_THROW(plan.validate(), std::invalid_argument);
  plan.checkpoints = {};
  EXPECT_THROW(plan.validate(), std::invalid_argument);
  plan.checkpoints = {5};
  plan.runs = 0;
  EXPECT_THROW(plan.validate(), std::invalid_argument);
  plan.runs = 1;
  EXPECT_THROW(run_plan(plan), std::invalid_argument);
  plan.checkpoints = {2000000};
  EXPECT_THROW(simulate_direct(plan, 0), std::invalid_argument);
  plan.estimator = EstimatorKind::tokens;
  EXPECT_THROW(simulate_fast(plan, 0), std::invalid_argument);
  plan.token_r = 27;
  EXPECT_THROW(plan.validate(), std::domain_error);
}

struct RmseSample {
  double rmse;
  double standard_error;
};

// Relative RMSE and its delta-method standard error.
RmseSample relative_rmse(const std::vector<double>& estimates, double n) {
  double sum = 0, sum_squares = 0;
  for (double e : estimates) {
    const double sq = (e / n - 1) * (e / n - 1);
    sum += sq;
    sum_squares += sq * sq;
  }
  const double runs = static_cast<double>(estimates.size());
  const double mse = sum / runs;
  const double variance = sum_squares / runs - mse * mse;
  return {std::sqrt(mse), std::sqrt(variance / runs) / (2 * std::sqrt(mse))};
}

TEST(SimulationTest, FastMatchesDirect) {
  for (EstimatorKind kind : {EstimatorKind::ml, EstimatorKind::martingale}) {
    SimPlan plan = make_plan(kind, {100000}, 1000, 62);
    plan.direct_limit = 1000;
    std::vector<double> fast, direct;
    for (int run = 0; run < plan.runs; ++run) {
      fast.push_back(simulate_fast(plan, derive_seed(plan.seed, run)).back().estimate);
      direct.push_back(simulate_direct({.params = plan.params, .estimator = kind, .checkpoints = {100000}},
                                       derive_seed(plan.seed + 1, run))
                           .back()
                           .estimate);
    }
    const RmseSample a = relative_rmse(fast, 1e5), b = relative_rmse(direct, 1e5);
    EXPECT_NEAR(a.rmse, b.rmse, 3 * std::hypot(a.standard_error, b.standard_error));
    double mean_fast = 0, mean_direct = 0;
    for (int run = 0; run < plan.runs; ++run) {
      mean_fast += fast[run] / plan.runs;
      mean_direct += direct[run] / plan.runs;
    }
    const double mean_error = std::hypot(a.rmse, b.rmse) * 1e5 / std::sqrt(plan.runs);
    EXPECT_NEAR(mean_fast, mean_direct, 3 * mean_error);
  }
}

TEST(SimulationTest, LargeCountAgreesWithTheory) {
  SimPlan plan = make_plan(EstimatorKind::ml, {1000000000000ULL}, 1000, 63);
  plan.direct_limit = 100000;
  const ErrorRow row = run_plan(plan).rows.back();
  EXPECT_NEAR(row.rel_rmse / row.theoretical_rmse, 1.0, 0.1);
  EXPECT_LT(std::abs(row.rel_bias), 3 * row.rel_rmse / std::sqrt(plan.runs));
}

TEST(AggregateTest, Examples) {
  const std::vector<double> exact = {100, 100, 100};
  const ErrorRow a = aggregate(exact, 100);
  EXPECT_EQ(a.rel_bias, 0.0);
  EXPECT_EQ(a.rel_rmse, 0.0);
  EXPECT_EQ(a.mean_estimate, 100.0);
  EXPECT_EQ(a.runs, 3u);
  const std::vector<double> spread = {90, 110};
  const ErrorRow b = aggregate(spread, 100);
  EXPECT_NEAR(b.rel_bias, 0.0, 1e-15);
  EXPECT_NEAR(b.rel_rmse, 0.1, 1e-15);
  EXPECT_THROW(aggregate(std::vector<double>{1.0}, 1), std::invalid_argument);
}

TEST(AggregateTest, RmseBoundsBias) {
  std::mt19937_64 rng(64);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> estimates(2 + rng() % 50);
    const double n = 1 + static_cast<double>(rng() % 1000);
    for (auto& e : estimates) e = n * std::exp(std::normal_distribution<double>(0, 0.5)(rng));
    const ErrorRow row = aggregate(estimates, static_cast<std::uint64_t>(n));
    EXPECT_GE(row.rel_rmse * (1 + 1e-12), std::abs(row.rel_bias));
  }
}

TEST(CsvTest, Format) {
  ErrorReport report;
  report.rows.push_back({1000, 2, 1001.5, 0.0015, 0.25, 0.0226});
  report.rows.push_back({10, 2, 10, 0, 0, std::numeric_limits<double>::quiet_NaN()});
  std::ostringstream out;
  write_csv(out, report);
  EXPECT_EQ(out.str(),
            "n,runs,mean_estimate,rel_bias,rel_rmse,theoretical_rmse\n"
            "1000,2,1001.5,0.0015,0.25,0.0226\n"
            "10,2,10,0,0,nan\n");
}

}  // namespace
}  // namespace exaloglog
