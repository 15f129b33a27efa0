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

#ifndef EXALOGLOG_REGISTER_PMF_HPP
#define EXALOGLOG_REGISTER_PMF_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "exaloglog/params.hpp"
#include "exaloglog/sketch.hpp"

namespace exaloglog {

/// Probability of observing register value r after n distinct insertions
/// under the Poisson model (each register sees Poisson(n/m) updates).
///
/// Update value u is present with probability 1 - exp(-(n/m) rho(u)). The
/// register records the max k (all larger values absent) and presence of the
/// values max(1, k - d) .. k - 1.
inline double pmf_register(std::uint64_t r, double n, const Params& params) {
  if (!is_valid_register(r, params)) throw std::domain_error("invalid register value");
  if (!(n >= 0.0)) throw std::domain_error("distinct count must be nonnegative");
  const double rate = n / static_cast<double>(params.num_registers());
  const int d = params.d();
  const std::uint64_t k = r >> d;
  const double absent_above = std::exp(-rate * tail_probability(k, params));
  if (k == 0) return absent_above;
  double probability = -std::expm1(-rate * update_value_probability(k, params)) * absent_above;
  const std::uint64_t lowest = k > static_cast<std::uint64_t>(d) ? k - d : 1;
  for (std::uint64_t u = lowest; u < k; ++u) {
    const double mean = rate * update_value_probability(u, params);
    const bool present = (r >> (d - (k - u))) & 1;
    probability *= present ? -std::expm1(-mean) : std::exp(-mean);
  }
  return probability;
}

}  // namespace exaloglog

#endif  // EXALOGLOG_REGISTER_PMF_HPP
