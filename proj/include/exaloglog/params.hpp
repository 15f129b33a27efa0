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

#ifndef EXALOGLOG_PARAMS_HPP
#define EXALOGLOG_PARAMS_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace exaloglog {

/// Thrown when two sketches cannot be combined because their parameters differ.
class incompatible_params : public std::invalid_argument {
 public:
  incompatible_params(const std::string& field, int lhs, int rhs)
      : std::invalid_argument("incompatible parameter '" + field + "': " + std::to_string(lhs) +
                              " vs " + std::to_string(rhs)),
        field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Sketch configuration.
///
/// `t` is the number of hash bits that refine each update value (update
/// values follow a step distribution approximating a geometric one with base
/// 2^(2^-t)), `d` the number of indicator bits per register and `p` the
/// precision, i.e. there are 2^p registers of 6 + t + d bits each.
class Params {
 public:
  static constexpr int kMaxDefaultT = 3;
  static constexpr int kMinP = 2;

  /// Validates and creates a parameter set. Values of t above 3 are rejected
  /// unless `allow_large_t` is set.
  static Params create(int t, int d, int p, bool allow_large_t = false) {
    if (t < 0) throw std::domain_error("t must be nonnegative");
    if (!allow_large_t && t > kMaxDefaultT)
      throw std::domain_error("t > 3 requires an explicit override");
    if (d < 0) throw std::domain_error("d must be nonnegative");
    if (p < kMinP) throw std::domain_error("p must be at least 2");
    if (p + t > 63) throw std::domain_error("p + t must not exceed 63");
    if (6 + t + d > 64) throw std::domain_error("register width 6 + t + d must not exceed 64");
    return Params(t, d, p);
  }

  /// Recommended configuration for a given precision.
  static Params defaults(int p) { return create(2, 20, p); }

  int t() const noexcept { return t_; }
  int d() const noexcept { return d_; }
  int p() const noexcept { return p_; }

  std::uint64_t num_registers() const noexcept { return std::uint64_t{1} << p_; }
  int register_bits() const noexcept { return 6 + t_ + d_; }

  /// Largest update value a 64-bit hash can produce: (65 - p - t) * 2^t.
  std::uint64_t max_update_value() const noexcept {
    return static_cast<std::uint64_t>(65 - p_ - t_) << t_;
  }

  /// Largest register value: max_update_value() * 2^d + 2^d - 1.
  std::uint64_t max_register_value() const noexcept {
    return (max_update_value() << d_) | indicator_mask();
  }

  std::uint64_t indicator_mask() const noexcept { return (std::uint64_t{1} << d_) - 1; }

  friend bool operator==(const Params&, const Params&) = default;

 private:
  Params(int t, int d, int p) : t_(t), d_(d), p_(p) {}

  int t_;
  int d_;
  int p_;
};

/// e(u) = min(t + 1 + floor((u - 1) / 2^t), 64 - p). Also defined for u = 0,
/// where the floor evaluates to -1 and the result is t.
inline int update_exponent(std::uint64_t u, int t, int p) noexcept {
  const std::int64_t chunk = u == 0 ? -1 : static_cast<std::int64_t>((u - 1) >> t);
  const std::int64_t e = t + 1 + chunk;
  return static_cast<int>(e < 64 - p ? e : 64 - p);
}

inline int update_exponent(std::uint64_t u, const Params& params) noexcept {
  return update_exponent(u, params.t(), params.p());
}

/// Probability 2^-e(u) that a single insertion produces update value u.
inline double update_value_probability(std::uint64_t u, const Params& params) {
  if (u < 1 || u > params.max_update_value())
    throw std::domain_error("update value out of range");
  return std::ldexp(1.0, -update_exponent(u, params));
}

/// Probability mass of all update values greater than k, scaled by 2^(64-p).
/// The result is an integer; for k = 0 it equals 2^(64-p).
inline std::uint64_t scaled_tail_probability(std::uint64_t k, const Params& params) {
  if (k > params.max_update_value()) throw std::domain_error("max update value out of range");
  const int t = params.t();
  const int e = update_exponent(k, params);
  const std::uint64_t numerator =
      (static_cast<std::uint64_t>(1 - t + e) << t) - k;  // 2^t (1 - t + e) - k
  return numerator << (64 - params.p() - e);
}

/// Sum of update_value_probability(u) for u in (k, max_update_value()].
inline double tail_probability(std::uint64_t k, const Params& params) {
  return std::ldexp(static_cast<double>(scaled_tail_probability(k, params)), params.p() - 64);
}

}  // namespace exaloglog

#endif  // EXALOGLOG_PARAMS_HPP
