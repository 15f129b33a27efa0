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

#ifndef EXALOGLOG_THEORY_HPP
#define EXALOGLOG_THEORY_HPP

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace exaloglog {

/// Hurwitz zeta function sum_{k>=0} (k + q)^-s for s > 1, q > 0.
///
/// 64 explicit terms plus an Euler-Maclaurin tail through the B6 term; the
/// truncation error is below 1e-14 for s <= 3.
inline double hurwitz_zeta(double s, double q) {
  if (!(s > 1.0)) throw std::domain_error("hurwitz_zeta requires s > 1");
  if (!(q > 0.0)) throw std::domain_error("hurwitz_zeta requires q > 0");
  constexpr int kTerms = 64;
  const double x = kTerms + q;
  const double xs = std::pow(x, -s);
  double tail = x * xs / (s - 1.0) + 0.5 * xs;
  const double x2 = 1.0 / (x * x);
  double deriv = s * xs / x;  // s x^(-s-1)
  tail += deriv / 12.0;
  deriv *= (s + 1.0) * (s + 2.0) * x2;
  tail -= deriv / 720.0;
  deriv *= (s + 3.0) * (s + 4.0) * x2;
  tail += deriv / 30240.0;
  double sum = tail;
  for (int k = kTerms - 1; k >= 0; --k) sum += std::pow(k + q, -s);
  return sum;
}

/// The (t, d) pair that determines all asymptotic error constants. The update
/// value distribution approximates a geometric one with base b = 2^(2^-t);
/// the max field needs 6 + t bits to reach 2^64.
struct TheoryConfig {
  int t;
  int d;

  TheoryConfig(int t_, int d_) : t(t_), d(d_) {
    if (t < 0 || d < 0) throw std::domain_error("t and d must be nonnegative");
  }

  double log_base() const noexcept { return std::numbers::ln2 * std::ldexp(1.0, -t); }
  double base() const noexcept { return std::exp(log_base()); }
  int max_bits() const noexcept { return 6 + t; }
  int register_bits() const noexcept { return max_bits() + d; }

  /// b^-d / (b - 1), the offset shared by all zeta arguments.
  double zeta_offset() const noexcept {
    return std::exp(-d * log_base()) / std::expm1(log_base());
  }
};

/// Memory-variance product of an efficient unbiased estimator on densely
/// packed registers.
inline double mvp_ml(int t, int d) {
  const TheoryConfig c(t, d);
  return c.register_bits() * c.log_base() / hurwitz_zeta(2.0, 1.0 + c.zeta_offset());
}

/// Memory-variance product of the martingale estimator on densely packed
/// registers.
inline double mvp_martingale(int t, int d) {
  const TheoryConfig c(t, d);
  return c.register_bits() * c.log_base() / 2.0 * (1.0 + c.zeta_offset());
}

/// Expected relative standard error sqrt(mvp / ((6 + t + d) * 2^p)).
inline double theoretical_rmse(double mvp, int t, int d, int p) {
  const TheoryConfig c(t, d);
  if (p < 0) throw std::domain_error("p must be nonnegative");
  return std::sqrt(mvp / (c.register_bits() * std::ldexp(1.0, p)));
}

enum class MvpKind { ml, martingale };

inline double mvp(MvpKind kind, int t, int d) {
  return kind == MvpKind::ml ? mvp_ml(t, d) : mvp_martingale(t, d);
}

struct MvpGridMinimum {
  int t;
  int d;
  double mvp;
};

/// Minimum over the inclusive grid [t_min, t_max] x [d_min, d_max].
inline MvpGridMinimum mvp_argmin(MvpKind kind, int t_min, int t_max, int d_min, int d_max) {
  if (t_min > t_max || d_min > d_max) throw std::domain_error("empty grid");
  MvpGridMinimum best{t_min, d_min, std::numeric_limits<double>::infinity()};
  for (int t = t_min; t <= t_max; ++t) {
    for (int d = d_min; d <= d_max; ++d) {
      const double value = mvp(kind, t, d);
      if (value < best.mvp) best = {t, d, value};
    }
  }
  return best;
}

}  // namespace exaloglog

#endif  // EXALOGLOG_THEORY_HPP
