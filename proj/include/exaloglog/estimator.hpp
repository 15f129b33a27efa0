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

#ifndef EXALOGLOG_ESTIMATOR_HPP
#define EXALOGLOG_ESTIMATOR_HPP

#include <cmath>

#include "exaloglog/coefficients.hpp"
#include "exaloglog/ml_solver.hpp"
#include "exaloglog/sketch.hpp"
#include "exaloglog/theory.hpp"

namespace exaloglog {

/// First-order bias correction constant c; the corrected estimate is
/// n_ml / (1 + c / m).
inline double bias_correction_constant(int t, int d) {
  const TheoryConfig config(t, d);
  const double offset = config.zeta_offset();
  const double zeta2 = hurwitz_zeta(2.0, 1.0 + offset);
  return config.log_base() * (1.0 + 2.0 * offset) * hurwitz_zeta(3.0, 1.0 + offset) /
         (zeta2 * zeta2);
}

struct EstimateOptions {
  bool bias_correction = true;
};

/// ML estimate with solver diagnostics.
inline MlSolution ml_estimate(const Sketch& sketch, EstimateOptions options = {}) {
  const Params& params = sketch.params();
  const double m = static_cast<double>(params.num_registers());
  MlSolution solution = solve_ml(compute_coefficients(sketch), m);
  if (options.bias_correction) {
    solution.estimate /= 1.0 + bias_correction_constant(params.t(), params.d()) / m;
  }
  return solution;
}

/// Distinct count estimate of a sketch (bias-corrected ML estimate).
inline double estimate_distinct(const Sketch& sketch, EstimateOptions options = {}) {
  return ml_estimate(sketch, options).estimate;
}

}  // namespace exaloglog

#endif  // EXALOGLOG_ESTIMATOR_HPP
