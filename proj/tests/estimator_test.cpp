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

#include "exaloglog/estimator.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "exaloglog/register_pmf.hpp"
#include "ml_oracle.hpp"
#include "test_util.hpp"

namespace exaloglog {
namespace {

using testing::bisection_estimate;
using testing::fuzz_coefficients;
using testing::poisson_sketch;

TEST(CoefficientsTest, EmptySketch) {
  const Coefficients c = compute_coefficients(Sketch(Params::create(2, 20, 8)));
  EXPECT_EQ(c.a_scaled, 0u);  // 2^64 wrapped
  EXPECT_TRUE(c.all_b_zero());
  EXPECT_EQ(c.min_index(), 3);
  EXPECT_EQ(c.max_index(), 56);
}

TEST(CoefficientsTest, SingleRegisterByHand) {
  const Params params = Params::create(2, 6, 2);
  Sketch sketch(params);
  sketch.insert_hash(0);  // register 0 = 241 << 6
  const Coefficients c = compute_coefficients(sketch);
  for (int k = 0; k <= 64; ++k) EXPECT_EQ(c.b[k], k == 62 ? 1u : 0u) << k;
  // three empty registers, sigma(241) = 3 * 2^-62, u = 235, 236 each 2^-61
  // and u = 237..240 each 2^-62
  EXPECT_EQ(c.a_scaled, 3 * (std::uint64_t{1} << 62) + 3 + 4 + 4);
  double direct = 3 + tail_probability(241, params);
  for (std::uint64_t u = 235; u <= 240; ++u) direct += update_value_probability(u, params);
  EXPECT_EQ(c.a(), direct);
}

// Coefficients describe the log-likelihood: compare against the likelihood
// assembled from the register PMF for every register.
TEST(CoefficientsTest, MatchLikelihoodFromPmf) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const Params params = Params::create(rng() % 4, rng() % 12, 2 + rng() % 4);
    const Sketch sketch = testing::record(params, testing::skewed_hashes(rng, 1 + rng() % 300));
    const Coefficients c = compute_coefficients(sketch);
    const double m = static_cast<double>(params.num_registers());
    for (double n : {3.0, 100.0, 1e5}) {
      double from_pmf = 0;
      for (std::size_t i = 0; i < sketch.num_registers(); ++i)
        from_pmf += std::log(pmf_register(sketch.register_value(i), n, params));
      EXPECT_NEAR(testing::log_likelihood(c, m, n), from_pmf, 1e-9 * std::abs(from_pmf) + 1e-9);
    }
  }
}

TEST(SolverTest, Degenerate) {
  Coefficients zero;
  zero.t = 2;
  zero.p = 8;
  EXPECT_EQ(solve_ml(zero, 256).estimate, 0.0);
  Coefficients saturated = zero;
  saturated.b[56] = 256;
  EXPECT_EQ(solve_ml(saturated, 256).estimate, std::numeric_limits<double>::infinity());
}

TEST(SolverTest, SingleCoefficientClosedForm) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 1000; ++trial) {
    Coefficients c;
    c.t = static_cast<int>(rng() % 4);
    c.p = 2 + static_cast<int>(rng() % 20);
    const int k = c.min_index() + static_cast<int>(rng() % (c.max_index() - c.min_index() + 1));
    const auto beta = static_cast<double>(c.b[k] = 1 + rng() % 1000);
    c.a_scaled = 1 + (rng() >> (rng() % 64));
    const double m = std::ldexp(1.0, c.p);
    const double expected = m * std::ldexp(std::log1p(beta / std::ldexp(c.a(), k)), k);
    const MlSolution s = solve_ml(c, m);
    EXPECT_NEAR(s.estimate, expected, 1e-14 * expected);
    EXPECT_EQ(s.iterations, 0);
    EXPECT_NEAR(bisection_estimate(c, m), expected, 1e-12 * expected);
  }
}

TEST(SolverTest, MatchesBisectionOnFuzzedCoefficients) {
  std::mt19937_64 rng(23);
  int worst = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const Coefficients c = fuzz_coefficients(rng);
    const double m = std::ldexp(1.0, c.p);
    const MlSolution s = solve_ml(c, m);
    const double oracle = bisection_estimate(c, m);
    if (s.estimate != oracle) {
      ASSERT_NEAR(s.estimate, oracle, 1e-9 * oracle) << "trial " << trial;
    }
    ASSERT_FALSE(s.iteration_cap_reached);
    worst = std::max(worst, s.iterations);
  }
  EXPECT_LE(worst, 15);
}

TEST(SolverTest, MatchesBisectionOnMassFeasibleCoefficients) {
  std::mt19937_64 rng(27);
  int worst = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const Coefficients c = testing::fuzz_mass_feasible_coefficients(rng);
    const double m = std::ldexp(1.0, c.p);
    const MlSolution s = solve_ml(c, m);
    const double oracle = bisection_estimate(c, m);
    if (s.estimate != oracle) {
      ASSERT_NEAR(s.estimate, oracle, 1e-9 * oracle) << "trial " << trial;
    }
    ASSERT_FALSE(s.iteration_cap_reached);
    worst = std::max(worst, s.iterations);
  }
  RecordProperty("worst_iterations", worst);
}

TEST(SolverTest, BracketAndShape) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 2000; ++trial) {
    const Coefficients c = fuzz_coefficients(rng);
    if (c.all_b_zero() || c.a_scaled == 0) continue;
    const auto [lower, upper] = testing::root_bracket(c);
    const double f_lower = testing::substituted_ml_function(c, lower);
    const double f_upper = testing::substituted_ml_function(c, upper);
    const double tolerance = 1e-12 * std::ldexp(c.a(), testing::highest_nonzero(c)) * upper;
    EXPECT_LE(f_lower, tolerance) << "trial " << trial;
    EXPECT_GE(f_upper, -tolerance) << "trial " << trial;
    EXPECT_LE(lower, upper * (1 + 1e-12));
  }
  // increasing and concave, checked on a grid around the root
  for (int trial = 0; trial < 200; ++trial) {
    const Coefficients c = fuzz_coefficients(rng);
    if (c.all_b_zero() || c.a_scaled == 0) continue;
    const double root = testing::root_bracket(c).second;
    const double step = root * 0.03;
    double previous_f = testing::substituted_ml_function(c, step);
    double previous_slope = std::numeric_limits<double>::infinity();
    for (int i = 2; i <= 100; ++i) {
      const double f = testing::substituted_ml_function(c, i * step);
      const double slope = (f - previous_f) / step;
      const double slack = 1e-9 * (std::abs(f) + std::abs(previous_f)) / step;
      EXPECT_GT(slope, -slack) << "trial " << trial << " point " << i;
      EXPECT_LE(slope, previous_slope + slack) << "trial " << trial << " point " << i;
      previous_f = f;
      previous_slope = slope;
    }
  }
}

TEST(SolverTest, MaximizesLikelihood) {
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 100; ++trial) {
    const Params params = Params::create(rng() % 4, rng() % 25, 2 + rng() % 9);
    const double n = std::exp(std::uniform_real_distribution<double>(0, 35)(rng));
    const Sketch sketch = poisson_sketch(params, n, rng);
    const Coefficients c = compute_coefficients(sketch);
    if (c.all_b_zero()) continue;
    const double m = static_cast<double>(params.num_registers());
    const double oracle = testing::golden_section_estimate(c, m);
    EXPECT_NEAR(ml_estimate(sketch, {.bias_correction = false}).estimate, oracle, 1e-6 * oracle)
        << "trial " << trial;
  }
}

TEST(SolverTest, FewIterationsForRecommendedConfigurations) {
  std::mt19937_64 rng(28);
  const int configurations[4][2] = {{1, 9}, {2, 16}, {2, 20}, {2, 24}};
  int worst = 0;
  for (int trial = 0; trial < 4000; ++trial) {
    const auto& [t, d] = configurations[trial % 4];
    const Params params = Params::create(t, d, 4 + 2 * (trial / 4 % 4));
    const double n = std::exp(std::uniform_real_distribution<double>(0, 46)(rng));
    worst = std::max(worst, ml_estimate(poisson_sketch(params, n, rng)).iterations);
  }
  EXPECT_LE(worst, 10);
}

TEST(SolverTest, SketchStatesNeedFewIterations) {
  std::mt19937_64 rng(26);
  int worst = 0;
  std::string worst_case;
  for (int trial = 0; trial < 2000; ++trial) {
    const Params params = Params::create(rng() % 4, rng() % 33, 2 + rng() % 7);
    const double n = std::exp(std::uniform_real_distribution<double>(0, 46)(rng));
    const MlSolution s = ml_estimate(poisson_sketch(params, n, rng));
    if (s.iterations > worst) {
      worst = s.iterations;
      worst_case = "t " + std::to_string(params.t()) + " d " + std::to_string(params.d()) + " p " +
                   std::to_string(params.p()) + " n " + std::to_string(n);
    }
  }
  // inserted hashes, including saturated update values
  for (int trial = 0; trial < 500; ++trial) {
    const Params params = Params::create(rng() % 4, rng() % 25, 2 + rng() % 9);
    const MlSolution s = ml_estimate(testing::record(params, testing::skewed_hashes(rng, rng() % 3000)));
    if (s.iterations > worst) {
      worst = s.iterations;
      worst_case = "recorded, t " + std::to_string(params.t()) + " d " + std::to_string(params.d()) + " p " +
                   std::to_string(params.p());
    }
  }
  EXPECT_LE(worst, 10) << worst_case;
}

TEST(BiasCorrectionTest, Constant) {
  const double limit = std::numbers::ln2 * 1.2020569031595942 / (std::numbers::pi * std::numbers::pi / 6) /
                       (std::numbers::pi * std::numbers::pi / 6);
  EXPECT_NEAR(bias_correction_constant(0, 58), limit, 1e-12);
  EXPECT_NEAR(limit, 0.30797, 5e-4);
  for (int t = 0; t <= 3; ++t)
    for (int d = 0; 6 + t + d <= 64; ++d) EXPECT_GT(bias_correction_constant(t, d), 0.0);
}

TEST(EstimateTest, Basics) {
  const Params params = Params::create(2, 20, 8);
  Sketch sketch(params);
  EXPECT_EQ(estimate_distinct(sketch), 0.0);
  sketch.insert_hash(0x123456789abcdef0ULL);
  const double one = estimate_distinct(sketch);
  EXPECT_GE(one, 0.5);
  EXPECT_LE(one, 2.0);
  const double raw = ml_estimate(sketch, {.bias_correction = false}).estimate;
  EXPECT_NEAR(raw, bisection_estimate(compute_coefficients(sketch), 256), 1e-12 * raw);
  EXPECT_NEAR(one * (1 + bias_correction_constant(2, 20) / 256), raw, 1e-15 * raw);
}

TEST(EstimateTest, FullySaturatedIsInfinite) {
  const Params params = Params::create(0, 0, 2);
  Sketch sketch(params);
  for (std::size_t i = 0; i < 4; ++i) sketch.set_register(i, params.max_register_value());
  EXPECT_EQ(estimate_distinct(sketch), std::numeric_limits<double>::infinity());
}

TEST(RegisterPmfTest, Examples) {
  const Params params = Params::create(2, 6, 4);
  EXPECT_NEAR(pmf_register(0, 100.0, params), std::exp(-100.0 / 16), 1e-15);
  EXPECT_EQ(pmf_register(0, 0.0, params), 1.0);
  EXPECT_EQ(pmf_register(200 << 6, 0.0, params), 0.0);
  EXPECT_THROW(pmf_register(1, 1.0, params), std::domain_error);
  EXPECT_THROW(pmf_register(0, -1.0, params), std::domain_error);
}

double total_register_mass(const Params& params, double n) {
  double total = 0;
  for (std::uint64_t r = 0; r <= params.max_register_value(); ++r)
    if (is_valid_register(r, params)) total += pmf_register(r, n, params);
  return total;
}

TEST(RegisterPmfTest, Normalized) {
  for (double n : {1.0, 1e3, 1e9}) EXPECT_NEAR(total_register_mass(Params::create(2, 6, 4), n), 1.0, 1e-9) << n;
  EXPECT_NEAR(total_register_mass(Params::create(0, 0, 2), 50.0), 1.0, 1e-12);
  EXPECT_NEAR(total_register_mass(Params::create(1, 3, 3), 1e6), 1.0, 1e-12);
}

}  // namespace
}  // namespace exaloglog
