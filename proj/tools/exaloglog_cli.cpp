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

// exaloglog command line tool: error simulations, memory-variance tables and
// sketch file utilities.

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <thread>

#include "exaloglog/exaloglog.hpp"

namespace {

using namespace exaloglog;

class usage_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t parse_count(const std::string& text) {
  std::uint64_t value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec == std::errc() && ptr == end) return value;
  double real = 0;
  auto [rptr, rec] = std::from_chars(text.data(), end, real);
  if (rec != std::errc() || rptr != end || !(real >= 0) || real >= 0x1p64 || std::floor(real) != real)
    throw usage_error("invalid distinct count '" + text + "'");
  return static_cast<std::uint64_t>(real);
}

int parse_int(const std::string& text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw usage_error("invalid integer '" + text + "'");
  return value;
}

// "lo..hi" or a single value
std::pair<int, int> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const int v = parse_int(text);
    return {v, v};
  }
  const int lo = parse_int(text.substr(0, dots));
  const int hi = parse_int(text.substr(dots + 2));
  if (lo > hi) throw usage_error("empty range '" + text + "'");
  return {lo, hi};
}

// Comma separated counts; "ladder:a..b" expands to {1,2,5} x 10^k, k in [a, b].
std::vector<std::uint64_t> parse_checkpoints(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.rfind("ladder:", 0) == 0) {
      const auto [lo, hi] = parse_range(item.substr(7));
      if (lo < 0 || hi > 18) throw usage_error("ladder exponents must be in [0, 18]");
      for (int k = lo; k <= hi; ++k) {
        std::uint64_t power = 1;
        for (int i = 0; i < k; ++i) power *= 10;
        for (std::uint64_t mantissa : {1, 2, 5}) out.push_back(mantissa * power);
      }
    } else {
      out.push_back(parse_count(item));
    }
  }
  if (out.empty()) throw usage_error("no checkpoints given");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out.flush()) throw std::runtime_error("cannot write '" + path + "'");
}

void with_output(const std::string& path, const std::function<void(std::ostream&)>& body) {
  if (path == "-") {
    body(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  body(out);
  if (!out.flush()) throw std::runtime_error("cannot write '" + path + "'");
}

struct SimulationOptions {
  int runs = 1000;
  std::string checkpoints;
  std::uint64_t seed = 0;
  std::string out = "-";
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};

void add_simulation_options(CLI::App* cmd, SimulationOptions& o) {
  cmd->add_option("--runs", o.runs, "Simulation runs")->capture_default_str();
  cmd->add_option("--checkpoints", o.checkpoints, "Distinct counts, e.g. 1e3,1e4 or ladder:0..6")->required();
  cmd->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  cmd->add_option("--out", o.out, "Output CSV path, - for stdout")->capture_default_str();
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
}

void run_simulation(SimPlan plan, const SimulationOptions& o) {
  if (o.runs < 2) throw usage_error("--runs must be at least 2");
  plan.runs = o.runs;
  plan.seed = o.seed;
  plan.checkpoints = parse_checkpoints(o.checkpoints);
  if (plan.estimator == EstimatorKind::tokens) plan.direct_limit = plan.checkpoints.back();
  const ErrorReport report = run_plan(plan, o.threads);
  with_output(o.out, [&](std::ostream& out) { write_csv(out, report); });
}

void print_sketch_info(const Sketch& sketch) {
  const Params& params = sketch.params();
  std::size_t nonzero = 0, saturated = 0;
  for (std::size_t i = 0; i < sketch.num_registers(); ++i) {
    const std::uint64_t r = sketch.register_value(i);
    nonzero += r != 0;
    saturated += r == params.max_register_value();
  }
  const MlSolution corrected = ml_estimate(sketch);
  const MlSolution raw = ml_estimate(sketch, {.bias_correction = false});
  std::printf("type: sketch\n");
  std::printf("t: %d\nd: %d\np: %d\n", params.t(), params.d(), params.p());
  std::printf("registers: %zu\nregister_bits: %d\npayload_bytes: %zu\n", sketch.num_registers(),
              params.register_bits(), sketch.packed_registers().byte_size());
  std::printf("nonzero_registers: %zu\nsaturated_registers: %zu\n", nonzero, saturated);
  std::printf("estimate: %.17g\nml_estimate_uncorrected: %.17g\nsolver_iterations: %d\n", corrected.estimate,
              raw.estimate, raw.iterations);
}

void print_token_info(const TokenSet& set) {
  const MlSolution s = token_ml_estimate(set);
  std::printf("type: tokens\nr: %d\ntokens: %zu\nestimate: %.17g\nsolver_iterations: %d\n", set.r(), set.size(),
              s.estimate, s.iterations);
}

std::vector<std::uint64_t> read_hashes(std::istream& in) {
  std::vector<std::uint64_t> hashes;
  std::string word;
  while (in >> word) {
    std::string digits = word;
    if (digits.rfind("0x", 0) == 0 || digits.rfind("0X", 0) == 0) digits = digits.substr(2);
    std::uint64_t h = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), h, 16);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size())
      throw usage_error("invalid hex hash '" + word + "'");
    hashes.push_back(h);
  }
  return hashes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ExaLogLog distinct counting: simulations, theory tables and sketch files"};
  app.require_subcommand(1);

  int t = 2, d = 20, p = 8;
  auto add_params = [&](CLI::App* cmd) {
    cmd->add_option("--t", t, "Update value refinement bits")->capture_default_str();
    cmd->add_option("--d", d, "Indicator bits per register")->capture_default_str();
    cmd->add_option("--p", p, "Precision (log2 of the register count)")->capture_default_str();
  };

  SimulationOptions sim;
  std::string estimator = "ml";
  std::uint64_t direct_limit = 1000000;
  bool no_bias_correction = false;
  auto* simulate = app.add_subcommand("simulate-error", "Empirical bias and RMSE of sketch estimators (CSV)");
  add_params(simulate);
  simulate->add_option("--estimator", estimator, "ml or martingale")
      ->check(CLI::IsMember({"ml", "martingale"}))
      ->capture_default_str();
  simulate->add_option("--direct-limit", direct_limit, "Distinct count at which fast simulation takes over")
      ->capture_default_str();
  simulate->add_flag("--no-bias-correction", no_bias_correction, "Report raw ML estimates");
  add_simulation_options(simulate, sim);

  int r = 26;
  auto* token_error = app.add_subcommand("token-error", "Empirical bias and RMSE of token set estimation (CSV)");
  token_error->add_option("--r", r, "Token parameter")->check(CLI::Range(1, 26))->capture_default_str();
  add_simulation_options(token_error, sim);

  std::string kind = "ml", t_range = "0..3", d_range = "0..32";
  bool argmin = false;
  auto* mvp_table = app.add_subcommand("mvp-table", "Memory-variance products over a (t, d) grid");
  mvp_table->add_option("--kind", kind, "ml or martingale")
      ->check(CLI::IsMember({"ml", "martingale"}))
      ->capture_default_str();
  mvp_table->add_option("--t-range", t_range, "t values, lo..hi")->capture_default_str();
  mvp_table->add_option("--d-range", d_range, "d values, lo..hi")->capture_default_str();
  mvp_table->add_flag("--argmin", argmin, "Print only the grid minimum");

  std::string input;
  auto* info = app.add_subcommand("sketch-info", "Describe a serialized sketch or token set");
  info->add_option("file", input, "Input file")->required();

  std::string first, second, out;
  bool auto_reduce = false;
  auto* merge_files = app.add_subcommand("merge-files", "Merge two serialized sketches");
  merge_files->add_option("first", first, "First sketch")->required();
  merge_files->add_option("second", second, "Second sketch")->required();
  merge_files->add_option("--out", out, "Output sketch")->required();
  merge_files->add_flag("--auto-reduce", auto_reduce, "Reduce both to common (min d, min p) first");

  int new_d = 0, new_p = 0;
  auto* reduce_file = app.add_subcommand("reduce-file", "Reduce a serialized sketch to smaller d and p");
  reduce_file->add_option("file", input, "Input sketch")->required();
  reduce_file->add_option("--d", new_d, "Target indicator bits")->required();
  reduce_file->add_option("--p", new_p, "Target precision")->required();
  reduce_file->add_option("--out", out, "Output sketch")->required();

  int token_r = 0;
  auto* record_cmd = app.add_subcommand("record", "Build a sketch or token set from hex hashes");
  add_params(record_cmd);
  record_cmd->add_option("--tokens", token_r, "Write a token set with this r instead of a sketch")
      ->check(CLI::Range(1, 26));
  record_cmd->add_option("--input", input, "Whitespace separated hex hashes, - for stdin")->capture_default_str();
  record_cmd->add_option("--out", out, "Output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      SimPlan plan;
      plan.params = Params::create(t, d, p);
      plan.estimator = estimator == "ml" ? EstimatorKind::ml : EstimatorKind::martingale;
      plan.direct_limit = direct_limit;
      plan.bias_correction = !no_bias_correction;
      run_simulation(plan, sim);
    } else if (*token_error) {
      SimPlan plan;
      plan.estimator = EstimatorKind::tokens;
      plan.token_r = r;
      run_simulation(plan, sim);
    } else if (*mvp_table) {
      const auto [t_lo, t_hi] = parse_range(t_range);
      const auto [d_lo, d_hi] = parse_range(d_range);
      if (t_lo < 0 || t_hi > 3) throw usage_error("t must be in [0, 3]");
      if (d_lo < 0 || 6 + t_hi + d_hi > 64) throw usage_error("d must be in [0, 58 - t]");
      const MvpKind mvp_kind = kind == "ml" ? MvpKind::ml : MvpKind::martingale;
      if (argmin) {
        const MvpGridMinimum best = mvp_argmin(mvp_kind, t_lo, t_hi, d_lo, d_hi);
        std::printf("t=%d d=%d mvp=%.6f\n", best.t, best.d, best.mvp);
      } else {
        std::printf("t,d,mvp\n");
        for (int ti = t_lo; ti <= t_hi; ++ti)
          for (int di = d_lo; di <= d_hi; ++di) std::printf("%d,%d,%.6f\n", ti, di, mvp(mvp_kind, ti, di));
      }
    } else if (*info) {
      const auto bytes = read_file(input);
      if (!bytes.empty() && bytes[0] == kTokenMagic) {
        print_token_info(deserialize_tokens(bytes));
      } else {
        print_sketch_info(deserialize(bytes));
      }
    } else if (*merge_files) {
      Sketch a = deserialize(read_file(first));
      Sketch b = deserialize(read_file(second));
      if (auto_reduce) {
        if (a.params().t() != b.params().t()) throw incompatible_params("t", a.params().t(), b.params().t());
        const int common_d = std::min(a.params().d(), b.params().d());
        const int common_p = std::min(a.params().p(), b.params().p());
        a = reduce(a, common_d, common_p);
        b = reduce(b, common_d, common_p);
      }
      write_file(out, serialize(merge(a, b)));
    } else if (*reduce_file) {
      write_file(out, serialize(reduce(deserialize(read_file(input)), new_d, new_p)));
    } else if (*record_cmd) {
      std::vector<std::uint64_t> hashes;
      if (input.empty() || input == "-") {
        hashes = read_hashes(std::cin);
      } else {
        std::ifstream in(input);
        if (!in) throw std::runtime_error("cannot open '" + input + "'");
        hashes = read_hashes(in);
      }
      if (token_r > 0) {
        TokenSet set(token_r);
        for (std::uint64_t h : hashes) set.insert_hash(h);
        write_file(out, serialize_tokens(set));
      } else {
        Sketch sketch(Params::create(t, d, p));
        for (std::uint64_t h : hashes) sketch.insert_hash(h);
        write_file(out, serialize(sketch));
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
