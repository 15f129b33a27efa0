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

#ifndef EXALOGLOG_ML_SOLVER_HPP
#define EXALOGLOG_ML_SOLVER_HPP

#include <cmath>
#include <limits>

#include "exaloglog/coefficients.hpp"

namespace exaloglog {

struct MlSolution {
  double estimate = 0.0;
  /// Number of Newton passes (each evaluates the ML function once).
  int iterations = 0;
  bool iteration_cap_reached = false;
};

inline constexpr int kMaxNewtonIterations = 64;

/// Maximum-likelihood distinct count for the given coefficients and m
/// registers (m = 1 for hash tokens).
///
/// With x = exp(n / (m 2^kmax)) - 1 the ML equation becomes
///   f(x) = a 2^kmax x - sum_j b_{kmax-j} 2^j x / ((1+x)^(2^j) - 1) = 0,
/// f is increasing and concave, so Newton's method started left of the root
/// increases monotonically towards it. Returns 0 if all b_k vanish and
/// +infinity if a = 0 (every register saturated).
inline MlSolution solve_ml(const Coefficients& c, double m) {
  double b_sum = 0.0;
  double b_pow = 0.0;
  int k_min = -1;
  int k_max = 0;
  for (int j = c.min_index(); j <= c.max_index(); ++j) {
    if (c.b[j] == 0) continue;
    if (k_min < 0) k_min = j;
    k_max = j;
    b_sum += static_cast<double>(c.b[j]);
    b_pow += std::ldexp(static_cast<double>(c.b[j]), -j);
  }
  if (k_min < 0) return {};
  if (c.a_scaled == 0) return {std::numeric_limits<double>::infinity(), 0, false};

  b_pow = std::ldexp(b_pow, k_max);
  const double a_scaled_to_max = std::ldexp(c.a(), k_max);  // a 2^kmax
  double x = b_pow / a_scaled_to_max;
  MlSolution solution;
  if (k_min < k_max) {
    x = std::expm1(std::log1p(x) * (b_sum / b_pow));
    while (true) {
      ++solution.iterations;
      double factor = 1.0;   // prod 2 / (2 + y_l)
      double excess = 0.0;   // prod (2 - z_l) - 1
      double y = x;          // (1 + x)^(2^l) - 1
      int k = k_max;
      double sum_a = static_cast<double>(c.b[k]);
      double sum_b = 0.0;
      while (true) {
        --k;
        const double z = 2.0 / (2.0 + y);
        factor *= z;
        excess = excess * (2.0 - z) + (1.0 - z);
        sum_a += static_cast<double>(c.b[k]) * factor;
        sum_b += static_cast<double>(c.b[k]) * factor * excess;
        if (k <= k_min) break;
        y *= y + 2.0;
      }
      const double linear = a_scaled_to_max * x;
      if (sum_a <= linear) break;  // f(x) >= 0
      const double previous = x;
      x *= 1.0 + (sum_a - linear) / (sum_b + linear);
      if (x <= previous) break;
      if (solution.iterations >= kMaxNewtonIterations) {
        solution.iteration_cap_reached = true;
        break;
      }
    }
  }
  solution.estimate = m * std::ldexp(std::log1p(x), k_max);
  return solution;
}

}  // namespace exaloglog

#endif  // EXALOGLOG_ML_SOLVER_HPP
