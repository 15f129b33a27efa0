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

#ifndef EXALOGLOG_MARTINGALE_HPP
#define EXALOGLOG_MARTINGALE_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "exaloglog/params.hpp"
#include "exaloglog/sketch.hpp"

namespace exaloglog {

/// Probability that the next unseen element changes register r, scaled by
/// 2^64 (the scaled value never exceeds 2^(64-p)).
inline std::uint64_t scaled_change_probability(std::uint64_t r, const Params& params) {
  if (!is_valid_register(r, params)) throw std::domain_error("invalid register value");
  const int d = params.d();
  const int p = params.p();
  const std::uint64_t k = r >> d;
  std::uint64_t scaled = scaled_tail_probability(k, params);
  if (k >= 2) {
    const std::uint64_t lowest = k > static_cast<std::uint64_t>(d) ? k - d : 1;
    for (std::uint64_t u = lowest; u < k; ++u) {
      if (((r >> (d - (k - u))) & 1) == 0) scaled += std::uint64_t{1} << (64 - p - update_exponent(u, params));
    }
  }
  return scaled;
}

/// Probability that the next unseen element changes register r.
inline double change_probability(std::uint64_t r, const Params& params) {
  return std::ldexp(static_cast<double>(scaled_change_probability(r, params)), -64);
}

/// Probability that the next unseen element changes any register, computed
/// from scratch over all registers.
inline double state_change_probability(const Sketch& sketch) {
  unsigned __int128 sum = 0;
  for (std::size_t i = 0; i < sketch.num_registers(); ++i)
    sum += scaled_change_probability(sketch.register_value(i), sketch.params());
  // split to keep the conversion exact up to double rounding
  const auto high = static_cast<std::uint64_t>(sum >> 64);
  const auto low = static_cast<std::uint64_t>(sum);
  return static_cast<double>(high) + std::ldexp(static_cast<double>(low), -64);
}

/// Running martingale (HIP) estimate. Starts at estimate 0 with state change
/// probability 1; every state change adds 1 / xi and then lowers xi by the
/// change probability lost by the modified register.
struct MartingaleState {
  double estimate = 0.0;
  double xi = 1.0;

  friend bool operator==(const MartingaleState&, const MartingaleState&) = default;
};

inline MartingaleState martingale_update(MartingaleState state, const UpdateOutcome& outcome,
                                         const Params& params) {
  if (!outcome.changed) return state;
  const std::uint64_t before = scaled_change_probability(outcome.old_value, params);
  const std::uint64_t after = scaled_change_probability(outcome.new_value, params);
  if (after >= before) throw std::logic_error("register change did not lower its change probability");
  state.estimate += 1.0 / state.xi;
  state.xi -= std::ldexp(static_cast<double>(before - after), -64);
  // xi reaches exactly 0 only once every register is saturated
  if (state.xi < 0.0) throw std::logic_error("state change probability became negative");
  return state;
}

/// Sketch that maintains the martingale estimate alongside its registers.
/// Not mergeable in a meaningful way: the estimate depends on the insertion
/// history of this instance.
class MartingaleSketch {
 public:
  explicit MartingaleSketch(const Params& params) : sketch_(params) {}

  UpdateOutcome insert_hash(std::uint64_t hash) {
    const UpdateOutcome outcome = sketch_.insert_hash(hash);
    state_ = martingale_update(state_, outcome, sketch_.params());
    return outcome;
  }

  UpdateOutcome apply_update(std::uint64_t index, std::uint64_t u) {
    const UpdateOutcome outcome = sketch_.apply_update(index, u);
    state_ = martingale_update(state_, outcome, sketch_.params());
    return outcome;
  }

  double estimate() const noexcept { return state_.estimate; }
  const MartingaleState& state() const noexcept { return state_; }
  const Sketch& sketch() const noexcept { return sketch_; }

 private:
  Sketch sketch_;
  MartingaleState state_;
};

}  // namespace exaloglog

#endif  // EXALOGLOG_MARTINGALE_HPP
