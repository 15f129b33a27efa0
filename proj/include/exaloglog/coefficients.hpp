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

#ifndef EXALOGLOG_COEFFICIENTS_HPP
#define EXALOGLOG_COEFFICIENTS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "exaloglog/params.hpp"
#include "exaloglog/sketch.hpp"

namespace exaloglog {

/// Summary of a log-likelihood of the form
///
///   ln L(n) = -(n/m) a + sum_{k=t+1}^{64-p} b_k ln(1 - exp(-n / (m 2^k)))
///
/// a is kept as the integer a * 2^(64-p) with wrapping arithmetic. The only
/// state that wraps is the all-empty one (a = 2^p, i.e. a_scaled = 2^64),
/// which has all b_k = 0 and is never solved.
struct Coefficients {
  std::uint64_t a_scaled = 0;
  std::array<std::uint64_t, 65> b{};
  int t = 0;
  int p = 0;

  int min_index() const noexcept { return t + 1; }
  int max_index() const noexcept { return 64 - p; }

  double a() const noexcept { return std::ldexp(static_cast<double>(a_scaled), p - 64); }

  bool all_b_zero() const noexcept {
    return std::all_of(b.begin(), b.end(), [](std::uint64_t v) { return v == 0; });
  }

  friend bool operator==(const Coefficients&, const Coefficients&) = default;
};

/// Accumulates the coefficients over all registers using integer arithmetic.
inline Coefficients compute_coefficients(const Sketch& sketch) {
  const Params& params = sketch.params();
  const int d = params.d();
  const int p = params.p();
  Coefficients c;
  c.t = params.t();
  c.p = p;
  for (std::size_t i = 0; i < sketch.num_registers(); ++i) {
    const std::uint64_t r = sketch.register_value(i);
    const std::uint64_t k = r >> d;
    c.a_scaled += scaled_tail_probability(k, params);
    if (k == 0) continue;
    c.b[update_exponent(k, params)] += 1;
    const std::uint64_t lowest = k > static_cast<std::uint64_t>(d) ? k - d : 1;
    for (std::uint64_t u = lowest; u < k; ++u) {
      const int j = update_exponent(u, params);
      if ((r & (std::uint64_t{1} << (d - (k - u)))) == 0) {
        c.a_scaled += std::uint64_t{1} << (64 - p - j);
      } else {
        c.b[j] += 1;
      }
    }
  }
  return c;
}

}  // namespace exaloglog

#endif  // EXALOGLOG_COEFFICIENTS_HPP
