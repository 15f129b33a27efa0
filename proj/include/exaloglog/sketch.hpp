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

#ifndef EXALOGLOG_SKETCH_HPP
#define EXALOGLOG_SKETCH_HPP

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

#include "exaloglog/packed_array.hpp"
#include "exaloglog/params.hpp"

namespace exaloglog {

/// Result of a single insertion, consumed by the martingale estimator.
struct UpdateOutcome {
  std::uint64_t index = 0;
  std::uint64_t old_value = 0;
  std::uint64_t new_value = 0;
  bool changed = false;
};

namespace detail {

// floor(x / 2^shift) for any nonnegative shift.
constexpr std::uint64_t shift_right(std::uint64_t x, std::uint64_t shift) noexcept {
  return shift >= 64 ? 0 : x >> shift;
}

}  // namespace detail

/// Register update for update value u (>= 1).
///
/// The max field grows to u and previously recorded occurrences are shifted
/// down, or, if u is within d below the current max, the matching indicator
/// bit is set. Note that the first update of an empty register also records
/// an occurrence for the (nonexistent) value 0 at bit d - u when u <= d; all
/// other operations treat that bit consistently.
constexpr std::uint64_t update_register(std::uint64_t r, std::uint64_t u, int d) noexcept {
  const std::uint64_t k = r >> d;
  if (u > k) {
    const std::uint64_t low = r & ((std::uint64_t{1} << d) - 1);
    return (u << d) + detail::shift_right((std::uint64_t{1} << d) + low, u - k);
  }
  if (u < k && k - u <= static_cast<std::uint64_t>(d)) {
    return r | (std::uint64_t{1} << (d - (k - u)));
  }
  return r;
}

/// Merges two registers of sketches with identical parameters.
constexpr std::uint64_t merge_registers(std::uint64_t r1, std::uint64_t r2, int d) noexcept {
  const std::uint64_t k1 = r1 >> d;
  const std::uint64_t k2 = r2 >> d;
  const std::uint64_t low_mask = (std::uint64_t{1} << d) - 1;
  if (k1 > k2 && k2 > 0) {
    return r1 | detail::shift_right((std::uint64_t{1} << d) + (r2 & low_mask), k1 - k2);
  }
  if (k2 > k1 && k1 > 0) {
    return r2 | detail::shift_right((std::uint64_t{1} << d) + (r1 & low_mask), k2 - k1);
  }
  return r1 | r2;
}

/// True if `r` is reachable by insertions into a register with `params`:
/// k = r / 2^d must not exceed the maximum update value, an empty max
/// implies an empty register, and for 1 <= k <= d the occurrence bit of
/// value 0 (bit d - k) is set with all lower bits clear.
inline bool is_valid_register(std::uint64_t r, const Params& params) noexcept {
  const int d = params.d();
  const std::uint64_t k = r >> d;
  if (k > params.max_update_value()) return false;
  if (k == 0) return r == 0;
  if (k <= static_cast<std::uint64_t>(d)) {
    const std::uint64_t low = r & params.indicator_mask();
    const int zero_bit = d - static_cast<int>(k);
    return ((low >> zero_bit) & 1) == 1 && (low & ((std::uint64_t{1} << zero_bit) - 1)) == 0;
  }
  return true;
}

/// ExaLogLog sketch: 2^p registers of 6 + t + d bits, densely bit-packed.
///
/// Single writer. Concurrent readers are fine as long as nobody inserts.
class Sketch {
 public:
  explicit Sketch(const Params& params)
      : params_(params),
        registers_(static_cast<std::size_t>(params.num_registers()), params.register_bits()) {}

  const Params& params() const noexcept { return params_; }
  std::size_t num_registers() const noexcept { return registers_.size(); }

  std::uint64_t register_value(std::size_t i) const noexcept { return registers_.get(i); }

  /// Overwrites a register. Throws std::domain_error if the value is not a
  /// reachable register state.
  void set_register(std::size_t i, std::uint64_t value) {
    if (i >= registers_.size()) throw std::out_of_range("register index out of range");
    if (!is_valid_register(value, params_)) throw std::domain_error("invalid register value");
    registers_.set(i, value);
  }

  /// Inserts an element given its uniformly distributed 64-bit hash.
  ///
  /// Bits [t, p + t) select the register, the lowest t bits and the number of
  /// leading zeros of the bits above p + t form the update value
  /// nlz * 2^t + low + 1.
  UpdateOutcome insert_hash(std::uint64_t hash) noexcept {
    const int t = params_.t();
    const int pt = params_.p() + t;
    const std::uint64_t index = (hash >> t) & (params_.num_registers() - 1);
    const std::uint64_t masked = hash | ((std::uint64_t{1} << pt) - 1);
    const auto nlz = static_cast<std::uint64_t>(std::countl_zero(masked));
    const std::uint64_t u = (nlz << t) + (hash & ((std::uint64_t{1} << t) - 1)) + 1;
    return apply_update(index, u);
  }

  /// Applies update value u directly to register `index`, as if a hash with
  /// that register and update value had been inserted.
  UpdateOutcome apply_update(std::uint64_t index, std::uint64_t u) noexcept {
    const std::uint64_t old_value = registers_.get(index);
    const std::uint64_t new_value = update_register(old_value, u, params_.d());
    if (new_value != old_value) registers_.set(index, new_value);
    return {index, old_value, new_value, new_value != old_value};
  }

  /// Inserts an element by hashing its bytes with a caller-supplied 64-bit
  /// hash function.
  template <typename Hasher>
  UpdateOutcome insert_element(std::span<const std::byte> element, Hasher&& hasher) {
    return insert_hash(static_cast<std::uint64_t>(hasher(element)));
  }

  /// In-place merge. Parameters must be identical.
  Sketch& merge_from(const Sketch& other) {
    check_compatible(params_, other.params_);
    const int d = params_.d();
    for (std::size_t i = 0; i < registers_.size(); ++i) {
      const std::uint64_t r = registers_.get(i);
      const std::uint64_t merged = merge_registers(r, other.registers_.get(i), d);
      if (merged != r) registers_.set(i, merged);
    }
    return *this;
  }

  bool is_empty() const noexcept {
    for (std::size_t i = 0; i < registers_.size(); ++i)
      if (registers_.get(i) != 0) return false;
    return true;
  }

  const PackedArray& packed_registers() const noexcept { return registers_; }

  static Sketch from_packed(const Params& params, PackedArray registers) {
    if (registers.size() != params.num_registers() || registers.width() != params.register_bits())
      throw std::invalid_argument("packed register layout does not match parameters");
    for (std::size_t i = 0; i < registers.size(); ++i)
      if (!is_valid_register(registers.get(i), params))
        throw std::domain_error("invalid register value at index " + std::to_string(i));
    Sketch sketch(params, std::move(registers));
    return sketch;
  }

  static void check_compatible(const Params& a, const Params& b) {
    if (a.t() != b.t()) throw incompatible_params("t", a.t(), b.t());
    if (a.d() != b.d()) throw incompatible_params("d", a.d(), b.d());
    if (a.p() != b.p()) throw incompatible_params("p", a.p(), b.p());
  }

  friend bool operator==(const Sketch&, const Sketch&) = default;

 private:
  Sketch(const Params& params, PackedArray registers)
      : params_(params), registers_(std::move(registers)) {}

  Params params_;
  PackedArray registers_;
};

/// Element-wise merge of two sketches with identical parameters.
inline Sketch merge(const Sketch& a, const Sketch& b) {
  Sketch result = a;
  result.merge_from(b);
  return result;
}

/// Reduces a sketch to fewer indicator bits and/or a lower precision. The
/// result equals what direct recording with (t, new_d, new_p) would give.
inline Sketch reduce(const Sketch& sketch, int new_d, int new_p) {
  const Params& from = sketch.params();
  if (new_d < 0 || new_d > from.d()) throw std::domain_error("reduced d must be in [0, d]");
  if (new_p < Params::kMinP || new_p > from.p())
    throw std::domain_error("reduced p must be in [2, p]");
  const Params to = Params::create(from.t(), new_d, new_p, true);
  const int t = from.t();
  const int d_shift = from.d() - new_d;
  const int p_diff = from.p() - new_p;
  // update values >= threshold had the maximum NLZ 64 - t - p
  const std::int64_t threshold = (static_cast<std::int64_t>(64 - t - from.p()) << t) + 1;
  const std::uint64_t new_m = to.num_registers();
  const std::uint64_t group = std::uint64_t{1} << p_diff;

  Sketch result(to);
  for (std::uint64_t i = 0; i < new_m; ++i) {
    std::uint64_t merged = 0;
    for (std::uint64_t j = 0; j < group; ++j) {
      std::uint64_t r = sketch.register_value(i + j * new_m) >> d_shift;
      const auto k = static_cast<std::int64_t>(r >> new_d);
      if (k >= threshold) {
        // the former index bits j now extend the leading zero count
        const std::int64_t shift =
            (static_cast<std::int64_t>(p_diff) - (64 - std::countl_zero(j))) << t;
        if (shift > 0) {
          const std::int64_t num_bits = new_d + threshold - k;
          if (num_bits > 0) {
            const std::uint64_t low_mask = (std::uint64_t{1} << num_bits) - 1;
            r = (r & ~low_mask) + detail::shift_right(r & low_mask, static_cast<std::uint64_t>(shift));
          }
          r += static_cast<std::uint64_t>(shift) << new_d;
        }
      }
      merged = merge_registers(r, merged, new_d);
    }
    result.set_register(i, merged);
  }
  return result;
}

}  // namespace exaloglog

#endif  // EXALOGLOG_SKETCH_HPP
