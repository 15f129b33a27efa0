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

#ifndef EXALOGLOG_SIM_HPP
#define EXALOGLOG_SIM_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "exaloglog/estimator.hpp"
#include "exaloglog/martingale.hpp"
#include "exaloglog/params.hpp"
#include "exaloglog/sketch.hpp"
#include "exaloglog/theory.hpp"
#include "exaloglog/tokens.hpp"

namespace exaloglog {

/// SplitMix64: a seedable 64-bit generator that splits into independent
/// streams by seeding a fresh generator with a mixed (seed, stream) pair.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return mix(state_ += kGamma); }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

 private:
  std::uint64_t state_;
};

/// Seed of stream `stream` derived from `master`:
/// mix(master + (2 * stream + 1) * gamma) xor mix(stream).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return SplitMix64::mix(master + (2 * stream + 1) * SplitMix64::kGamma) ^ SplitMix64::mix(stream);
}

/// Uniform double in (0, 1].
template <typename Rng>
double uniform_open_closed(Rng& rng) {
  return std::ldexp(static_cast<double>((rng() >> 11) + 1), -53);
}

/// Number of Bernoulli trials up to and including the first success
/// (support 1, 2, ...), by inversion with log1p so that success
/// probabilities down to 2^-64 stay accurate. Saturates at 2^64 - 1.
template <typename Rng>
std::uint64_t sample_geometric(Rng& rng, double success_probability) {
  if (!(success_probability > 0.0 && success_probability <= 1.0))
    throw std::domain_error("success probability must be in (0, 1]");
  if (success_probability == 1.0) return 1;
  const double failures = std::floor(std::log(uniform_open_closed(rng)) / std::log1p(-success_probability));
  if (!(failures < 18446744073709549568.0)) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(failures) + 1;
}

enum class EstimatorKind { ml, martingale, tokens };

struct SimPlan {
  Params params = Params::defaults(8);
  EstimatorKind estimator = EstimatorKind::ml;
  int token_r = 26;  // only for EstimatorKind::tokens
  std::vector<std::uint64_t> checkpoints;
  int runs = 1000;
  std::uint64_t seed = 0;
  std::uint64_t direct_limit = 1'000'000;
  bool bias_correction = true;

  void validate() const {
    if (runs < 1) throw std::invalid_argument("runs must be positive");
    if (checkpoints.empty()) throw std::invalid_argument("at least one checkpoint required");
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end()) ||
        std::adjacent_find(checkpoints.begin(), checkpoints.end()) != checkpoints.end())
      throw std::invalid_argument("checkpoints must be strictly ascending");
    if (estimator == EstimatorKind::tokens) check_token_parameter(token_r);
  }
};

struct CheckpointEstimate {
  std::uint64_t n;
  double estimate;
};

namespace detail {

// Estimator under simulation: a sketch (with optional martingale state) or a
// token set with a pending buffer.
class SimulatedCounter {
 public:
  explicit SimulatedCounter(const SimPlan& plan)
      : plan_(plan), sketch_(plan.params), tokens_(plan.estimator == EstimatorKind::tokens ? plan.token_r : 1) {}

  void insert_hash(std::uint64_t hash) {
    if (plan_.estimator == EstimatorKind::tokens) {
      pending_.push_back(to_token(hash, plan_.token_r));
    } else {
      apply(sketch_.insert_hash(hash));
    }
  }

  void apply_update(std::uint64_t index, std::uint64_t u) { apply(sketch_.apply_update(index, u)); }

  double estimate() {
    switch (plan_.estimator) {
      case EstimatorKind::ml:
        return estimate_distinct(sketch_, {plan_.bias_correction});
      case EstimatorKind::martingale:
        return martingale_.estimate;
      case EstimatorKind::tokens:
        tokens_.insert_all(pending_);
        pending_.clear();
        return estimate_from_tokens(tokens_);
    }
    return 0.0;
  }

 private:
  void apply(const UpdateOutcome& outcome) {
    if (plan_.estimator == EstimatorKind::martingale)
      martingale_ = martingale_update(martingale_, outcome, sketch_.params());
  }

  const SimPlan& plan_;
  Sketch sketch_;
  MartingaleState martingale_;
  TokenSet tokens_;
  std::vector<Token> pending_;
};

// (register, update value) pair an insertion resolves to.
inline std::uint64_t pair_slot(std::uint64_t hash, const Params& params) {
  const int t = params.t();
  const std::uint64_t index = (hash >> t) & (params.num_registers() - 1);
  const std::uint64_t masked = hash | ((std::uint64_t{1} << (params.p() + t)) - 1);
  const auto nlz = static_cast<std::uint64_t>(std::countl_zero(masked));
  const std::uint64_t u = (nlz << t) + (hash & ((std::uint64_t{1} << t) - 1)) + 1;
  return (u - 1) * params.num_registers() + index;
}

}  // namespace detail

/// Inserts pseudorandom 64-bit hashes one by one and records the estimate at
/// every checkpoint. All checkpoints must be <= plan.direct_limit.
inline std::vector<CheckpointEstimate> simulate_direct(const SimPlan& plan, std::uint64_t run_seed) {
  plan.validate();
  if (plan.checkpoints.back() > plan.direct_limit)
    throw std::invalid_argument("direct simulation limited to checkpoints <= direct_limit");
  SplitMix64 rng(run_seed);
  detail::SimulatedCounter counter(plan);
  std::vector<CheckpointEstimate> out;
  out.reserve(plan.checkpoints.size());
  std::uint64_t n = 0;
  for (std::uint64_t checkpoint : plan.checkpoints) {
    for (; n < checkpoint; ++n) counter.insert_hash(rng());
    out.push_back({checkpoint, counter.estimate()});
  }
  return out;
}

/// Direct insertion up to plan.direct_limit, then jumps from one state-
/// relevant event to the next.
///
/// Every distinct insertion hits exactly one (register, update value) pair
/// with probability rho(u) / m, and only the first hit of a pair can change
/// the state. While a set S of pairs is still unhit, the number of further
/// insertions until one of them is hit is geometric with success probability
/// sum_{S} rho(u) / m, and the hit pair is drawn proportionally to its
/// probability. Each pair's first-hit time is therefore geometric with
/// success probability rho(u) / m, exactly as under direct insertion. Not
/// available for token estimation.
inline std::vector<CheckpointEstimate> simulate_fast(const SimPlan& plan, std::uint64_t run_seed) {
  plan.validate();
  if (plan.estimator == EstimatorKind::tokens)
    throw std::invalid_argument("fast simulation does not support token estimation");
  const Params& params = plan.params;
  const std::uint64_t m = params.num_registers();
  const std::uint64_t u_max = params.max_update_value();
  const std::uint64_t last = plan.checkpoints.back();
  const bool needs_fast_phase = last > plan.direct_limit;

  SplitMix64 rng(run_seed);
  detail::SimulatedCounter counter(plan);
  std::vector<CheckpointEstimate> out;
  out.reserve(plan.checkpoints.size());
  std::vector<bool> hit(needs_fast_phase ? m * u_max : 0, false);

  std::uint64_t n = 0;
  auto next = plan.checkpoints.begin();
  const std::uint64_t direct_end = std::min(last, plan.direct_limit);
  for (; next != plan.checkpoints.end() && *next <= direct_end; ++next) {
    for (; n < *next; ++n) {
      const std::uint64_t hash = rng();
      if (needs_fast_phase) hit[detail::pair_slot(hash, params)] = true;
      counter.insert_hash(hash);
    }
    out.push_back({*next, counter.estimate()});
  }
  if (next == plan.checkpoints.end()) return out;
  for (; n < direct_end; ++n) {
    const std::uint64_t hash = rng();
    hit[detail::pair_slot(hash, params)] = true;
    counter.insert_hash(hash);
  }

  // unhit registers per update value; weights are rho(u) / m scaled by 2^64
  std::vector<std::vector<std::uint32_t>> unhit(u_max + 1);
  std::vector<std::uint64_t> unit(u_max + 1, 0);
  unsigned __int128 total = 0;
  for (std::uint64_t u = 1; u <= u_max; ++u) {
    unit[u] = std::uint64_t{1} << (64 - params.p() - update_exponent(u, params));
    for (std::uint64_t i = 0; i < m; ++i)
      if (!hit[(u - 1) * m + i]) unhit[u].push_back(static_cast<std::uint32_t>(i));
    total += static_cast<unsigned __int128>(unhit[u].size()) * unit[u];
  }
  hit.clear();
  hit.shrink_to_fit();

  constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();
  while (next != plan.checkpoints.end()) {
    std::uint64_t event_time = kNever;
    if (total > 0) {
      const double probability = std::ldexp(static_cast<double>(total), -64);
      const std::uint64_t wait = sample_geometric(rng, std::min(probability, 1.0));
      event_time = wait > kNever - n ? kNever : n + wait;
    }
    for (; next != plan.checkpoints.end() && *next < event_time; ++next)
      out.push_back({*next, counter.estimate()});
    if (next == plan.checkpoints.end() || event_time == kNever) break;
    n = event_time;

    auto x = static_cast<unsigned __int128>(
        (static_cast<unsigned __int128>(rng()) * total) >> 64);  // uniform in [0, total)
    std::uint64_t u = 1;
    for (;; ++u) {
      const unsigned __int128 weight = static_cast<unsigned __int128>(unhit[u].size()) * unit[u];
      if (x < weight) break;
      x -= weight;
    }
    auto& registers = unhit[u];
    const auto slot = static_cast<std::size_t>(x / unit[u]);
    const std::uint32_t index = registers[slot];
    registers[slot] = registers.back();
    registers.pop_back();
    total -= unit[u];
    counter.apply_update(index, u);
  }
  return out;
}

/// One run of a plan: fast simulation for sketch estimators, direct
/// simulation for tokens. The run seed is derive_seed(plan.seed, run).
inline std::vector<CheckpointEstimate> simulate_run(const SimPlan& plan, std::uint64_t run) {
  const std::uint64_t seed = derive_seed(plan.seed, run);
  return plan.estimator == EstimatorKind::tokens ? simulate_direct(plan, seed) : simulate_fast(plan, seed);
}

struct ErrorRow {
  std::uint64_t n = 0;
  std::uint64_t runs = 0;
  double mean_estimate = 0.0;
  double rel_bias = 0.0;
  double rel_rmse = 0.0;
  double theoretical_rmse = std::numeric_limits<double>::quiet_NaN();
};

/// Empirical relative bias and RMSE of estimates for true count n. Relative
/// errors are undefined (NaN) for n = 0.
inline ErrorRow aggregate(std::span<const double> estimates, std::uint64_t n) {
  if (estimates.size() < 2) throw std::invalid_argument("aggregation requires at least 2 runs");
  const double count = static_cast<double>(n);
  double sum = 0.0;
  double sum_error = 0.0;
  double sum_squared_error = 0.0;
  for (double estimate : estimates) {
    sum += estimate;
    const double error = estimate - count;
    sum_error += error;
    sum_squared_error += error * error;
  }
  const double runs = static_cast<double>(estimates.size());
  ErrorRow row;
  row.n = n;
  row.runs = estimates.size();
  row.mean_estimate = sum / runs;
  if (n == 0) {
    row.rel_bias = row.rel_rmse = std::numeric_limits<double>::quiet_NaN();
  } else {
    row.rel_bias = sum_error / runs / count;
    row.rel_rmse = std::sqrt(sum_squared_error / runs) / count;
  }
  return row;
}

struct ErrorReport {
  std::vector<ErrorRow> rows;
};

/// Predicted relative RMSE of the plan's estimator, NaN for tokens.
inline double predicted_rmse(const SimPlan& plan) {
  const Params& params = plan.params;
  switch (plan.estimator) {
    case EstimatorKind::ml:
      return theoretical_rmse(mvp_ml(params.t(), params.d()), params.t(), params.d(), params.p());
    case EstimatorKind::martingale:
      return theoretical_rmse(mvp_martingale(params.t(), params.d()), params.t(), params.d(), params.p());
    case EstimatorKind::tokens:
      break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// Runs every run of the plan (optionally on several threads) and returns
/// the per-run estimates indexed [run][checkpoint].
inline std::vector<std::vector<double>> run_estimates(const SimPlan& plan, unsigned threads = 1) {
  plan.validate();
  std::vector<std::vector<double>> estimates(static_cast<std::size_t>(plan.runs));
  auto work = [&](unsigned worker, unsigned workers) {
    for (std::size_t run = worker; run < estimates.size(); run += workers) {
      const auto result = simulate_run(plan, run);
      estimates[run].reserve(result.size());
      for (const auto& point : result) estimates[run].push_back(point.estimate);
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(plan.runs)));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w, threads);
  }
  return estimates;
}

/// Aggregates all runs of a plan into one row per checkpoint.
inline ErrorReport run_plan(const SimPlan& plan, unsigned threads = 1) {
  if (plan.runs < 2) throw std::invalid_argument("aggregation requires at least 2 runs");
  const auto estimates = run_estimates(plan, threads);
  const double theory = predicted_rmse(plan);
  ErrorReport report;
  std::vector<double> column(estimates.size());
  for (std::size_t c = 0; c < plan.checkpoints.size(); ++c) {
    for (std::size_t run = 0; run < estimates.size(); ++run) column[run] = estimates[run][c];
    ErrorRow row = aggregate(column, plan.checkpoints[c]);
    row.theoretical_rmse = theory;
    report.rows.push_back(row);
  }
  return report;
}

namespace detail {

inline std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

}  // namespace detail

inline constexpr const char* kCsvHeader = "n,runs,mean_estimate,rel_bias,rel_rmse,theoretical_rmse";

/// CSV with header kCsvHeader, one row per checkpoint, shortest round-trip
/// formatting.
inline void write_csv(std::ostream& out, const ErrorReport& report) {
  out << kCsvHeader << '\n';
  for (const ErrorRow& row : report.rows) {
    out << row.n << ',' << row.runs << ',' << detail::format_double(row.mean_estimate) << ','
        << detail::format_double(row.rel_bias) << ',' << detail::format_double(row.rel_rmse) << ','
        << detail::format_double(row.theoretical_rmse) << '\n';
  }
}

}  // namespace exaloglog

#endif  // EXALOGLOG_SIM_HPP
