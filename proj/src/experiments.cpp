// Copyright 2026 The swssb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "swssb/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "swssb/diagnostics.hpp"
#include "swssb/weingarten.hpp"

namespace swssb {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string mode_label(UnitaryMode mode) {
  switch (mode) {
    case UnitaryMode::kHaar:
      return "haar";
    case UnitaryMode::kClifford:
      return "clifford";
    case UnitaryMode::kPfc:
      return "pfc";
  }
  throw std::logic_error("unknown unitary mode");
}

UnitaryMode parse_mode(const std::string& text) {
  if (text == "haar") return UnitaryMode::kHaar;
  if (text == "clifford") return UnitaryMode::kClifford;
  if (text == "pfc") return UnitaryMode::kPfc;
  throw std::invalid_argument("unitary mode must be haar, clifford, or pfc: " +
                              text);
}

SymmetryKind parse_symmetry(const std::string& text) {
  if (text == "z2") return SymmetryKind::kZ2;
  if (text == "u1") return SymmetryKind::kU1;
  throw std::invalid_argument("symmetry must be z2 or u1: " + text);
}

// Canonical parameters field: fixed key order, ';' separated so the CSV
// stays comma-free.
std::string make_params(const ExperimentConfig& cfg, int n,
                        const std::string& r_text, int k, int q,
                        long samples) {
  std::ostringstream out;
  out << "N=" << n << ";r=" << r_text << ";k=" << k << ";Q=";
  if (q >= 0) {
    out << q;
  } else {
    out << '-';
  }
  out << ";mode=" << mode_label(cfg.unitary_mode)
      << ";keyed=" << (cfg.keyed ? "true" : "false") << ";samples=" << samples
      << ";seed=" << cfg.seed;
  return out.str();
}

std::string join_grid(const std::vector<long>& grid) {
  std::ostringstream out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i != 0) out << '|';
    out << grid[i];
  }
  return out.str();
}

bool is_power_of_two(long v) { return v >= 1 && (v & (v - 1)) == 0; }

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t c = 1;
  for (int i = 0; i < k; ++i) c = c * static_cast<std::uint64_t>(n - i) /
                                  static_cast<std::uint64_t>(i + 1);
  return c;
}

// Runs fn(0..count-1) over `threads` workers.  Every sample owns an
// independent seeded stream, so the output vector is identical for any
// thread count; reductions then happen in index order.
template <typename Fn>
auto parallel_map(long count, int threads, Fn fn)
    -> std::vector<decltype(fn(0L))> {
  using T = decltype(fn(0L));
  std::vector<T> out(static_cast<std::size_t>(count));
  if (threads <= 1 || count <= 1) {
    for (long i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = fn(i);
    return out;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      long i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        out[static_cast<std::size_t>(i)] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> guard(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  long n_workers = std::min<long>(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (long w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

EnsembleSpec base_spec(const ExperimentConfig& cfg, int n, long r, int q) {
  EnsembleSpec spec;
  spec.N = n;
  spec.r = r;
  spec.symmetry = cfg.symmetry;
  spec.Q = q;
  spec.unitary_mode = cfg.unitary_mode;
  spec.keyed = cfg.keyed;
  spec.seed = 0;  // randomness always flows through the per-sample stream
  return spec;
}

std::uint64_t run_master(const ExperimentConfig& cfg) {
  // Fresh mode replaces the configured seed with OS entropy once per run;
  // per-sample derivation below is unchanged, so a run is internally
  // consistent across thread counts either way.
  return cfg.keyed ? cfg.seed : RandomStream::fresh().next_u64();
}

ResultRecord make_record(const ExperimentConfig& cfg, std::string params,
                         std::string statistic, double estimate, double se,
                         std::optional<double> reference, bool pass) {
  ResultRecord rec;
  rec.experiment = cfg.experiment;
  rec.parameters = std::move(params);
  rec.statistic = std::move(statistic);
  rec.estimate = estimate;
  rec.stderr_value = se;
  rec.analytic_reference = reference;
  rec.pass = pass;
  return rec;
}

void stamp_time(std::vector<ResultRecord>& records, std::size_t from,
                double ms) {
  for (std::size_t i = from; i < records.size(); ++i)
    records[i].wall_time_ms = ms;
}

// Leave-one-block-out jackknife for the trace distance of a matrix mean to
// `reference`: streams sample(i) (i = 0..n-1, index order) into a total and
// `batches` block accumulators, so memory stays at (batches + 1) dense
// matrices however many samples there are.
template <typename Fn>
std::pair<double, double> jackknife_trace_distance(long n, int batches,
                                                   Index dim,
                                                   const Matrix& reference,
                                                   Fn sample) {
  if (n < 2) throw std::invalid_argument("jackknife needs >= 2 samples");
  int b = static_cast<int>(std::min<long>(batches, n));
  Matrix total = Matrix::Zero(dim, dim);
  std::vector<Matrix> block_sum(static_cast<std::size_t>(b),
                                Matrix::Zero(dim, dim));
  std::vector<long> block_count(static_cast<std::size_t>(b), 0);
  for (long i = 0; i < n; ++i) {
    Matrix m = sample(i);
    total += m;
    std::size_t blk = static_cast<std::size_t>(i % b);
    block_sum[blk] += m;
    ++block_count[blk];
  }
  double dist = trace_norm(total / static_cast<double>(n) - reference);
  std::vector<double> loo(static_cast<std::size_t>(b), 0.0);
  for (std::size_t blk = 0; blk < static_cast<std::size_t>(b); ++blk) {
    double m = static_cast<double>(n - block_count[blk]);
    loo[blk] = trace_norm((total - block_sum[blk]) / m - reference);
  }
  double mean = 0.0;
  for (double v : loo) mean += v;
  mean /= static_cast<double>(b);
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  double se = std::sqrt(ss * static_cast<double>(b - 1) /
                        static_cast<double>(b));
  return {dist, se};
}

double require_positive_knob(const ExperimentConfig& cfg,
                             const std::string& name) {
  double v = cfg.knob(name);
  if (!(v > 0.0))
    throw std::invalid_argument("knob must be positive: " + name);
  return v;
}

void check_common(const ExperimentConfig& cfg) {
  if (cfg.format != "csv" && cfg.format != "json")
    throw std::invalid_argument("format must be csv or json: " + cfg.format);
  if (cfg.threads < 1 || cfg.threads > 64)
    throw std::invalid_argument("threads must be in [1, 64]");
  if (cfg.r_grid.empty())
    throw std::invalid_argument("r_grid must not be empty");
  for (long r : cfg.r_grid)
    if (!is_power_of_two(r))
      throw std::invalid_argument("every r must be a power of two, got " +
                                  std::to_string(r));
  if (cfg.samples < 0) throw std::invalid_argument("samples must be >= 0");
}

void check_dense_mode(const ExperimentConfig& cfg, int n,
                      const std::string& field) {
  if (cfg.unitary_mode != UnitaryMode::kHaar && n > 8)
    throw std::invalid_argument(
        field + ": clifford/pfc modes build dense 2^N unitaries and stop at "
                "N = 8; use haar");
}

}  // namespace

double ExperimentConfig::knob(const std::string& name) const {
  auto it = knobs.find(name);
  if (it == knobs.end())
    throw std::logic_error("unknown knob for experiment '" + experiment +
                           "': " + name);
  return it->second;
}

std::vector<std::string> experiment_names() {
  return {"r1-decay", "indistinguishability", "u1-pipeline", "purity-scaling",
          "concentration"};
}

std::string experiment_description(const std::string& name) {
  if (name == "r1-decay")
    return "Monte-Carlo mean of the rank-1 Renyi correlator on rank-r flat "
           "states against its exact 2-design value, with aggregate and "
           "tail checks";
  if (name == "indistinguishability")
    return "trace distance between ensemble k-th moments and the reference "
           "state's, exact at k <= 2 via Weingarten calculus, Monte-Carlo "
           "beyond";
  if (name == "u1-pipeline")
    return "charge measurement + postselection pipeline: histogram, "
           "acceptance probability, and postselected correlators against "
           "the projected reference";
  if (name == "purity-scaling")
    return "SWAP-test shot counts needed to separate a rank-r state's "
           "purity from the reference, analytic / estimated / procedural, "
           "with the log-log growth exponent";
  if (name == "concentration")
    return "postselected-normalization concentration: Tr rho_tilde and "
           "Tr rho_tilde^2 means against exact Weingarten values, spectral "
           "flatness, and tail bounds";
  throw std::invalid_argument("unknown experiment: " + name);
}

ExperimentConfig default_config(const std::string& name) {
  ExperimentConfig cfg;
  cfg.experiment = name;
  cfg.knobs["mc_sigma"] = 3.0;
  cfg.knobs["exact_tol"] = 1e-10;
  if (name == "r1-decay") {
    cfg.symmetry = SymmetryKind::kZ2;
    cfg.N = 8;
    cfg.r_grid = {2, 4, 8, 16};
    cfg.k = 2;
    cfg.samples = 500;
    cfg.output = "r1_decay_results.csv";
    cfg.knobs["aggregate_threshold"] = 0.1;
    cfg.knobs["tail_delta_factor"] = 10.0;
  } else if (name == "indistinguishability") {
    cfg.symmetry = SymmetryKind::kZ2;
    cfg.N = 6;
    cfg.r_grid = {2, 4, 8, 16};
    cfg.k = 2;
    cfg.samples = 1000;
    cfg.output = "indistinguishability_results.csv";
    cfg.knobs["slope_min"] = -1.5;
    cfg.knobs["slope_max"] = -0.85;
    cfg.knobs["envelope_factor"] = 1.0;
    cfg.knobs["jackknife_batches"] = 10.0;
  } else if (name == "u1-pipeline") {
    cfg.symmetry = SymmetryKind::kU1;
    cfg.N = 8;
    cfg.Q = 4;
    cfg.r_grid = {16};
    cfg.k = 2;
    cfg.samples = 10000;
    cfg.output = "u1_pipeline_results.csv";
    cfg.knobs["chi2_pvalue_min"] = 0.01;
    cfg.knobs["aggregate_ratio_max"] = 0.1;
    cfg.knobs["residual_tol"] = 1e-8;
    cfg.knobs["post_N"] = 10.0;
    cfg.knobs["post_Q"] = 5.0;
    cfg.knobs["post_r"] = 16.0;
    cfg.knobs["post_samples"] = 200.0;
  } else if (name == "purity-scaling") {
    cfg.symmetry = SymmetryKind::kZ2;
    cfg.N = 8;
    cfg.r_grid = {2, 4, 8};
    cfg.k = 2;
    cfg.samples = 200;
    cfg.output = "purity_scaling_results.csv";
    cfg.knobs["slope_min"] = 1.7;
    cfg.knobs["slope_max"] = 2.3;
    cfg.knobs["calibration_shots"] = 4e6;
    cfg.knobs["procedural_factor"] = 2.0;
    cfg.knobs["shot_cap"] = 1e7;
  } else if (name == "concentration") {
    cfg.symmetry = SymmetryKind::kU1;
    cfg.N = 10;
    cfg.Q = 5;
    cfg.r_grid = {8};
    cfg.k = 2;
    cfg.samples = 1000;
    cfg.output = "concentration_results.csv";
    cfg.knobs["band_factor"] = 10.0;
    cfg.knobs["tail_delta_factor"] = 10.0;
  } else {
    throw std::invalid_argument("unknown experiment: " + name);
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("config parse error in " + path + ": " +
                             e.what());
  }
  if (!doc.is_object())
    throw std::runtime_error("config root must be a JSON object: " + path);
  if (!doc.contains("experiment") || !doc["experiment"].is_string())
    throw std::runtime_error("config needs a string 'experiment' field: " +
                             path);
  ExperimentConfig cfg = default_config(doc["experiment"].get<std::string>());
  for (const auto& [key, value] : doc.items()) {
    if (key == "experiment") {
      continue;
    } else if (key == "symmetry") {
      cfg.symmetry = parse_symmetry(value.get<std::string>());
    } else if (key == "N") {
      cfg.N = value.get<int>();
    } else if (key == "r_grid") {
      if (!value.is_array())
        throw std::runtime_error("r_grid must be an array of integers");
      cfg.r_grid.clear();
      for (const auto& v : value) cfg.r_grid.push_back(v.get<long>());
    } else if (key == "k") {
      cfg.k = value.get<int>();
    } else if (key == "Q") {
      cfg.Q = value.get<int>();
    } else if (key == "samples") {
      cfg.samples = value.get<long>();
    } else if (key == "seed") {
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "unitary_mode" || key == "mode") {
      cfg.unitary_mode = parse_mode(value.get<std::string>());
    } else if (key == "keyed") {
      cfg.keyed = value.get<bool>();
    } else if (key == "output") {
      cfg.output = value.get<std::string>();
    } else if (key == "format") {
      cfg.format = value.get<std::string>();
    } else if (key == "threads") {
      cfg.threads = value.get<int>();
    } else if (value.is_number()) {
      cfg.knobs[key] = value.get<double>();
    } else {
      throw std::runtime_error("unknown non-numeric config key: " + key);
    }
  }
  return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
  check_common(cfg);
  const long r_max_z2 = cfg.N >= 1 ? (1L << (cfg.N - 1)) : 1;
  const long r_max_u1 = 1L << cfg.N;
  if (cfg.experiment == "r1-decay") {
    if (cfg.symmetry != SymmetryKind::kZ2)
      throw std::invalid_argument("r1-decay runs on the z2 ensemble");
    if (cfg.N < 2 || cfg.N > 8)
      throw std::invalid_argument(
          "r1-decay: N must be in [2, 8] (full-space sqrt per draw)");
    if (cfg.samples < 2)
      throw std::invalid_argument("r1-decay: samples must be >= 2");
    for (long r : cfg.r_grid)
      if (r > r_max_z2)
        throw std::invalid_argument("r1-decay: r exceeds 2^{N-1}");
    check_dense_mode(cfg, cfg.N, "r1-decay");
  } else if (cfg.experiment == "indistinguishability") {
    if (cfg.k < 1 || cfg.k > 3)
      throw std::invalid_argument("indistinguishability: k must be 1, 2, 3");
    if (cfg.symmetry == SymmetryKind::kZ2) {
      if (cfg.N < 2 || cfg.N > 12)
        throw std::invalid_argument("indistinguishability: N in [2, 12]");
      long sector_dim = 1L << (cfg.N - 1);
      int exact_k = std::min(cfg.k, 2);
      double moment_dim = std::pow(static_cast<double>(sector_dim), exact_k);
      if (moment_dim > static_cast<double>(kMaxDim))
        throw std::invalid_argument(
            "indistinguishability: (2^{N-1})^k exceeds the dense cap 4096; "
            "reduce N or k");
      if (cfg.k == 3) {
        if (cfg.unitary_mode != UnitaryMode::kHaar)
          throw std::invalid_argument(
              "indistinguishability: k = 3 is Monte-Carlo and supports haar "
              "mode only");
        if (std::pow(static_cast<double>(sector_dim), 3) >
            static_cast<double>(kMaxDim))
          throw std::invalid_argument(
              "indistinguishability: k = 3 needs (2^{N-1})^3 <= 4096 "
              "(N <= 5)");
        if (cfg.samples < 10)
          throw std::invalid_argument(
              "indistinguishability: k = 3 needs samples >= 10");
      }
      for (long r : cfg.r_grid)
        if (r > r_max_z2)
          throw std::invalid_argument("indistinguishability: r > 2^{N-1}");
      check_dense_mode(cfg, cfg.N, "indistinguishability");
    } else {
      if (cfg.Q < 0 || cfg.Q > cfg.N)
        throw std::invalid_argument("indistinguishability: Q out of [0, N]");
      if (cfg.k > 2)
        throw std::invalid_argument(
            "indistinguishability: the u1 path is Monte-Carlo with k <= 2");
      double d_q = static_cast<double>(binomial(cfg.N, cfg.Q));
      if (std::pow(d_q, cfg.k) > 2048.0)
        throw std::invalid_argument(
            "indistinguishability: u1 moment dimension C(N,Q)^k must be <= "
            "2048 to keep jackknife accumulators in memory");
      if (cfg.samples < 10)
        throw std::invalid_argument(
            "indistinguishability: u1 path needs samples >= 10");
      for (long r : cfg.r_grid)
        if (r > r_max_u1)
          throw std::invalid_argument("indistinguishability: r > 2^N");
      check_dense_mode(cfg, cfg.N, "indistinguishability");
    }
  } else if (cfg.experiment == "u1-pipeline") {
    if (cfg.symmetry != SymmetryKind::kU1)
      throw std::invalid_argument("u1-pipeline runs on the u1 ensemble");
    if (cfg.N < 2 || cfg.N > 12)
      throw std::invalid_argument("u1-pipeline: N in [2, 12]");
    if (cfg.Q < 0 || cfg.Q > cfg.N)
      throw std::invalid_argument("u1-pipeline: Q out of [0, N]");
    if (cfg.samples < 100)
      throw std::invalid_argument(
          "u1-pipeline: the histogram needs samples >= 100");
    for (long r : cfg.r_grid)
      if (r > r_max_u1)
        throw std::invalid_argument("u1-pipeline: r > 2^N");
    check_dense_mode(cfg, cfg.N, "u1-pipeline");
    int post_n = static_cast<int>(cfg.knob("post_N"));
    int post_q = static_cast<int>(cfg.knob("post_Q"));
    long post_r = static_cast<long>(cfg.knob("post_r"));
    long post_samples = static_cast<long>(cfg.knob("post_samples"));
    if (post_n < 2 || post_n > 12)
      throw std::invalid_argument("u1-pipeline: post_N in [2, 12]");
    if (post_q < 1 || post_q > post_n - 1)
      throw std::invalid_argument(
          "u1-pipeline: post_Q must be in [1, post_N - 1] so both sites of "
          "a correlator pair can be charged");
    if (!is_power_of_two(post_r) || post_r > (1L << post_n))
      throw std::invalid_argument(
          "u1-pipeline: post_r must be a power of two <= 2^post_N");
    if (post_samples < 2)
      throw std::invalid_argument("u1-pipeline: post_samples >= 2");
    check_dense_mode(cfg, post_n, "u1-pipeline post block");
  } else if (cfg.experiment == "purity-scaling") {
    if (cfg.symmetry != SymmetryKind::kZ2)
      throw std::invalid_argument("purity-scaling runs on the z2 ensemble");
    if (cfg.N < 2 || cfg.N > 8)
      throw std::invalid_argument("purity-scaling: N in [2, 8]");
    if (cfg.samples < 10)
      throw std::invalid_argument(
          "purity-scaling: samples (procedural trials) must be >= 10");
    for (long r : cfg.r_grid)
      if (r > r_max_z2)
        throw std::invalid_argument("purity-scaling: r > 2^{N-1}");
    require_positive_knob(cfg, "calibration_shots");
    require_positive_knob(cfg, "shot_cap");
    check_dense_mode(cfg, cfg.N, "purity-scaling");
  } else if (cfg.experiment == "concentration") {
    if (cfg.symmetry != SymmetryKind::kU1)
      throw std::invalid_argument("concentration runs on the u1 ensemble");
    if (cfg.N < 2 || cfg.N > 12)
      throw std::invalid_argument("concentration: N in [2, 12]");
    if (cfg.Q < 0 || cfg.Q > cfg.N)
      throw std::invalid_argument("concentration: Q out of [0, N]");
    if (cfg.samples < 2)
      throw std::invalid_argument("concentration: samples >= 2");
    for (long r : cfg.r_grid)
      if (r > r_max_u1)
        throw std::invalid_argument("concentration: r > 2^N");
    check_dense_mode(cfg, cfg.N, "concentration");
  } else {
    throw std::invalid_argument("unknown experiment: " + cfg.experiment);
  }
}

std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (cfg.experiment == "r1-decay") return run_r1_decay(cfg);
  if (cfg.experiment == "indistinguishability")
    return run_indistinguishability(cfg);
  if (cfg.experiment == "u1-pipeline") return run_u1_pipeline(cfg);
  if (cfg.experiment == "purity-scaling") return run_purity_scaling(cfg);
  if (cfg.experiment == "concentration") return run_concentration(cfg);
  throw std::invalid_argument("unknown experiment: " + cfg.experiment);
}

// ---------------------------------------------------------------------------
// r1-decay

std::vector<ResultRecord> run_r1_decay(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const std::uint64_t master = run_master(cfg);
  const double mc_sigma = cfg.knob("mc_sigma");
  const double aggregate_threshold = cfg.knob("aggregate_threshold");
  const double tail_factor = cfg.knob("tail_delta_factor");

  struct Sample {
    double r1_pair = 0.0;
    double r1_aggregate = 0.0;
    double r2_pair = 0.0;
  };

  std::vector<ResultRecord> records;
  for (std::size_t ri = 0; ri < cfg.r_grid.size(); ++ri) {
    const long r = cfg.r_grid[ri];
    auto t0 = Clock::now();
    const double exact = exact_r1_z2(cfg.N, r);
    const std::uint64_t block_key = keyed_hash(master, 0xD1, ri);
    const EnsembleSpec espec = base_spec(cfg, cfg.N, r, -1);

    auto samples = parallel_map(cfg.samples, cfg.threads, [&](long i) {
      RandomStream stream(mix_seed(block_key, static_cast<std::uint64_t>(i)));
      PreparedState st =
          prepare_z2_state(espec, stream, PreparationPath::kFormula);
      CorrelatorSession session(std::move(st.rho));
      Sample out;
      out.r1_pair = session.r1(1, cfg.N, ChargedOp::kZ);
      out.r1_aggregate = session.aggregate_r1(ChargedOp::kZ);
      out.r2_pair = session.r2(1, cfg.N, ChargedOp::kZ);
      return out;
    });

    std::vector<double> r1s, aggs, r2s;
    r1s.reserve(samples.size());
    aggs.reserve(samples.size());
    r2s.reserve(samples.size());
    const double delta = tail_factor * exact;
    long tail_hits = 0;
    for (const Sample& s : samples) {
      r1s.push_back(s.r1_pair);
      aggs.push_back(s.r1_aggregate);
      r2s.push_back(s.r2_pair);
      if (s.r1_pair > delta) ++tail_hits;
    }
    MeanStderr r1 = mean_stderr(r1s);
    MeanStderr agg = mean_stderr(aggs);
    MeanStderr r2 = mean_stderr(r2s);
    double tail_freq =
        static_cast<double>(tail_hits) / static_cast<double>(cfg.samples);
    double tail_se = std::sqrt(tail_freq * (1.0 - tail_freq) /
                               static_cast<double>(cfg.samples));
    // Markov: P(R1 >= tail_factor * mean) <= 1 / tail_factor.
    double markov_bound = 1.0 / tail_factor;

    std::string params =
        make_params(cfg, cfg.N, std::to_string(r), cfg.k, -1, cfg.samples);
    std::size_t first = records.size();
    records.push_back(make_record(cfg, params, "r1_mean", r1.mean, r1.se,
                                  exact,
                                  std::abs(r1.mean - exact) <=
                                      mc_sigma * std::max(r1.se, 1e-15)));
    // Every ordered pair shares the same exact mean, so the aggregate is
    // gated on statistical consistency too.  Whether that mean is small
    // enough to hide the ensemble (the r / 2^{N-1} suppression regime) is
    // a property of the parameters; the row that asserts it compares the
    // exact mean against the threshold and checks the estimate only where
    // suppression is analytically expected.
    records.push_back(make_record(cfg, params, "r1_aggregate_mean", agg.mean,
                                  agg.se, exact,
                                  std::abs(agg.mean - exact) <=
                                      mc_sigma * std::max(agg.se, 1e-15)));
    // The symmetric reference state's aggregate is exactly 1, so the
    // estimate doubles as the suppression ratio.
    bool suppressed_exact = exact < aggregate_threshold;
    records.push_back(make_record(
        cfg, params, "r1_aggregate_suppressed", agg.mean, agg.se,
        aggregate_threshold,
        !suppressed_exact || agg.mean < aggregate_threshold));
    records.push_back(make_record(cfg, params, "r1_tail_frequency", tail_freq,
                                  tail_se, markov_bound,
                                  tail_freq <= markov_bound));
    records.push_back(make_record(cfg, params, "r2_mean", r2.mean, r2.se,
                                  exact,
                                  std::abs(r2.mean - exact) <=
                                      mc_sigma * std::max(r2.se, 1e-15)));
    stamp_time(records, first, elapsed_ms(t0));
  }
  return records;
}

// ---------------------------------------------------------------------------
// indistinguishability

namespace {

Matrix maximally_mixed(Index dim) {
  return Matrix::Identity(dim, dim) / static_cast<double>(dim);
}

// Sector representation of one Z2 draw: U Pi_r U^dag / r on 2^{N-1} dims.
Matrix z2_sector_draw(const EnsembleSpec& espec, RandomStream& rng) {
  Matrix u = draw_unitary(espec.N - 1, espec, rng);
  Matrix cols = u.leftCols(espec.r);
  return cols * cols.adjoint() / static_cast<double>(espec.r);
}

std::vector<ResultRecord> indistinguishability_z2(
    const ExperimentConfig& cfg) {
  const double exact_tol = cfg.knob("exact_tol");
  const double envelope_factor = cfg.knob("envelope_factor");
  const double slope_min = cfg.knob("slope_min");
  const double slope_max = cfg.knob("slope_max");
  const long sector_dim = 1L << (cfg.N - 1);
  const std::uint64_t master = run_master(cfg);

  std::vector<ResultRecord> records;
  std::vector<double> k2_dists;
  std::vector<double> k3_dists;
  std::vector<double> grid_r;
  for (std::size_t ri = 0; ri < cfg.r_grid.size(); ++ri) {
    const long r = cfg.r_grid[ri];
    grid_r.push_back(static_cast<double>(r));
    auto t0 = Clock::now();
    std::size_t first = records.size();

    for (int k = 1; k <= std::min(cfg.k, 2); ++k) {
      Index moment_dim = 1;
      for (int t = 0; t < k; ++t) moment_dim *= sector_dim;
      Matrix moment = exact_moment_z2(cfg.N, r, k);
      double dist = trace_norm(moment - maximally_mixed(moment_dim));
      std::string stat = "trace_distance_k" + std::to_string(k);
      std::string params =
          make_params(cfg, cfg.N, std::to_string(r), k, -1, 0);
      if (k == 1) {
        // The first moment is exactly the maximally mixed sector state.
        records.push_back(
            make_record(cfg, params, stat, dist, 0.0, 0.0, dist < exact_tol));
      } else {
        double envelope =
            envelope_factor * static_cast<double>(k) * k / static_cast<double>(r);
        records.push_back(
            make_record(cfg, params, stat, dist, 0.0, envelope,
                        dist <= envelope));
        k2_dists.push_back(dist);
      }
    }

    if (cfg.k == 3) {
      // Monte-Carlo third moment; the accumulator is one dense
      // (2^{N-1})^3 matrix, so no jackknife here (see README).
      Index moment_dim = sector_dim * sector_dim * sector_dim;
      const std::uint64_t block_key = keyed_hash(master, 0x1D3, ri);
      const EnsembleSpec espec = base_spec(cfg, cfg.N, r, -1);
      auto states = parallel_map(cfg.samples, cfg.threads, [&](long i) {
        RandomStream stream(
            mix_seed(block_key, static_cast<std::uint64_t>(i)));
        return z2_sector_draw(espec, stream);
      });
      Matrix total = Matrix::Zero(moment_dim, moment_dim);
      for (const Matrix& rho : states) total += kron(kron(rho, rho), rho);
      double dist = trace_norm(total / static_cast<double>(cfg.samples) -
                               maximally_mixed(moment_dim));
      double envelope = envelope_factor * 9.0 / static_cast<double>(r);
      std::string params =
          make_params(cfg, cfg.N, std::to_string(r), 3, -1, cfg.samples);
      records.push_back(make_record(cfg, params, "trace_distance_k3_mc", dist,
                                    0.0, envelope, dist <= envelope));
      k3_dists.push_back(dist);
    }
    stamp_time(records, first, elapsed_ms(t0));
  }

  if (cfg.r_grid.size() >= 2 && cfg.k >= 2) {
    auto t0 = Clock::now();
    std::size_t first = records.size();
    double slope = log_log_slope(grid_r, k2_dists);
    std::string params = make_params(cfg, cfg.N, join_grid(cfg.r_grid), 2, -1,
                                     0);
    records.push_back(make_record(cfg, params, "log_slope_k2", slope, 0.0,
                                  -1.0,
                                  slope >= slope_min && slope <= slope_max));
    if (cfg.k == 3) {
      double slope3 = log_log_slope(grid_r, k3_dists);
      std::string params3 =
          make_params(cfg, cfg.N, join_grid(cfg.r_grid), 3, -1, cfg.samples);
      records.push_back(
          make_record(cfg, params3, "log_slope_k3_mc", slope3, 0.0, -1.0,
                      slope3 >= slope_min && slope3 <= slope_max));
    }
    stamp_time(records, first, elapsed_ms(t0));
  }
  return records;
}

std::vector<ResultRecord> indistinguishability_u1(
    const ExperimentConfig& cfg) {
  const double envelope_factor = cfg.knob("envelope_factor");
  const double mc_sigma = cfg.knob("mc_sigma");
  const double slope_min = cfg.knob("slope_min");
  const double slope_max = cfg.knob("slope_max");
  const int batches = static_cast<int>(cfg.knob("jackknife_batches"));
  const std::uint64_t master = run_master(cfg);
  const SectorBasis basis = u1_sector(cfg.N, cfg.Q);
  const Index d_q = basis.dim_sector;

  std::vector<ResultRecord> records;
  std::vector<double> dists, ses, grid_r;
  for (std::size_t ri = 0; ri < cfg.r_grid.size(); ++ri) {
    const long r = cfg.r_grid[ri];
    grid_r.push_back(static_cast<double>(r));
    auto t0 = Clock::now();
    std::size_t first = records.size();
    const std::uint64_t block_key = keyed_hash(master, 0x1DF, ri);
    const EnsembleSpec espec = base_spec(cfg, cfg.N, r, cfg.Q);

    auto states = parallel_map(cfg.samples, cfg.threads, [&](long i) {
      RandomStream stream(mix_seed(block_key, static_cast<std::uint64_t>(i)));
      return prepare_u1_sector_state(espec, stream).rho;
    });

    std::string params = make_params(cfg, cfg.N, std::to_string(r), cfg.k,
                                     cfg.Q, cfg.samples);
    if (cfg.k == 1) {
      auto [dist, se] = jackknife_trace_distance(
          cfg.samples, batches, d_q, maximally_mixed(d_q), [&](long i) {
            return states[static_cast<std::size_t>(i)];
          });
      double envelope = envelope_factor / static_cast<double>(r);
      records.push_back(make_record(cfg, params, "trace_distance_k1_mc", dist,
                                    se, envelope,
                                    dist <= envelope + mc_sigma * se));
      dists.push_back(dist);
      ses.push_back(se);
    } else {
      auto [dist, se] = jackknife_trace_distance(
          cfg.samples, batches, d_q * d_q, maximally_mixed(d_q * d_q),
          [&](long i) {
            const Matrix& rho = states[static_cast<std::size_t>(i)];
            return kron(rho, rho);
          });
      double envelope = envelope_factor * 4.0 / static_cast<double>(r);
      records.push_back(make_record(cfg, params, "trace_distance_k2_mc", dist,
                                    se, envelope,
                                    dist <= envelope + mc_sigma * se));
      dists.push_back(dist);
      ses.push_back(se);
    }
    stamp_time(records, first, elapsed_ms(t0));
  }

  if (cfg.r_grid.size() >= 2) {
    auto t0 = Clock::now();
    std::size_t first = records.size();
    bool monotone = true;
    for (std::size_t i = 0; i + 1 < dists.size(); ++i)
      if (dists[i + 1] >= dists[i] + mc_sigma * (ses[i] + ses[i + 1]))
        monotone = false;
    std::string params = make_params(cfg, cfg.N, join_grid(cfg.r_grid), cfg.k,
                                     cfg.Q, cfg.samples);
    records.push_back(make_record(cfg, params, "monotone_decrease",
                                  monotone ? 1.0 : 0.0, 0.0, 1.0, monotone));
    double slope = log_log_slope(grid_r, dists);
    records.push_back(
        make_record(cfg, params,
                    cfg.k == 1 ? "log_slope_k1_mc" : "log_slope_k2_mc", slope,
                    0.0, -1.0, slope >= slope_min && slope <= slope_max));
    stamp_time(records, first, elapsed_ms(t0));
  }
  return records;
}

}  // namespace

std::vector<ResultRecord> run_indistinguishability(
    const ExperimentConfig& cfg) {
  validate_config(cfg);
  return cfg.symmetry == SymmetryKind::kZ2 ? indistinguishability_z2(cfg)
                                           : indistinguishability_u1(cfg);
}

// ---------------------------------------------------------------------------
// u1-pipeline

std::vector<ResultRecord> run_u1_pipeline(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const std::uint64_t master = run_master(cfg);
  const double mc_sigma = cfg.knob("mc_sigma");
  const double chi2_min = cfg.knob("chi2_pvalue_min");
  const double ratio_max = cfg.knob("aggregate_ratio_max");
  const double residual_tol = cfg.knob("residual_tol");
  const double exact_tol = cfg.knob("exact_tol");
  const int post_n = static_cast<int>(cfg.knob("post_N"));
  const int post_q = static_cast<int>(cfg.knob("post_Q"));
  const long post_r = static_cast<long>(cfg.knob("post_r"));
  const long post_samples = static_cast<long>(cfg.knob("post_samples"));

  std::vector<ResultRecord> records;

  // Block A: charge-measurement histogram and acceptance probability over
  // full draws at (N, Q, r_grid.front()).
  {
    auto t0 = Clock::now();
    std::size_t first = records.size();
    const long r = cfg.r_grid.front();
    const Index dim = Index{1} << cfg.N;
    const std::uint64_t block_key = keyed_hash(master, 0xA1, 0);
    const EnsembleSpec espec = base_spec(cfg, cfg.N, r, cfg.Q);

    struct Draw {
      int charge = 0;
      double p_target = 0.0;
    };
    auto draws = parallel_map(cfg.samples, cfg.threads, [&](long i) {
      RandomStream stream(mix_seed(block_key, static_cast<std::uint64_t>(i)));
      Matrix cols;
      if (cfg.unitary_mode == UnitaryMode::kHaar) {
        cols = haar_isometry(dim, espec.r, stream);
      } else {
        cols = draw_unitary(cfg.N, espec, stream).leftCols(espec.r);
      }
      // Charge distribution of U Pi_r U^dag / r: row norms binned by
      // Hamming weight.
      std::vector<double> mass(static_cast<std::size_t>(cfg.N) + 1, 0.0);
      for (Index x = 0; x < dim; ++x)
        mass[static_cast<std::size_t>(
            hamming_weight(static_cast<std::uint64_t>(x)))] +=
            cols.row(x).squaredNorm() / static_cast<double>(espec.r);
      Draw out;
      out.p_target = mass[static_cast<std::size_t>(cfg.Q)];
      double u = stream.uniform();
      double acc = 0.0;
      out.charge = cfg.N;
      for (int q = 0; q <= cfg.N; ++q) {
        acc += mass[static_cast<std::size_t>(q)];
        if (u < acc) {
          out.charge = q;
          break;
        }
      }
      return out;
    });

    std::vector<long> counts(static_cast<std::size_t>(cfg.N) + 1, 0);
    std::vector<double> p_targets;
    p_targets.reserve(draws.size());
    for (const auto& d : draws) {
      ++counts[static_cast<std::size_t>(d.charge)];
      p_targets.push_back(d.p_target);
    }
    double chi2 = 0.0;
    for (int q = 0; q <= cfg.N; ++q) {
      double expected = static_cast<double>(cfg.samples) *
                        static_cast<double>(binomial(cfg.N, q)) /
                        static_cast<double>(dim);
      double diff = static_cast<double>(counts[static_cast<std::size_t>(q)]) -
                    expected;
      chi2 += diff * diff / expected;
    }
    double pvalue = chi_squared_pvalue(chi2, cfg.N);
    MeanStderr acc = mean_stderr(p_targets);
    double acc_ref = static_cast<double>(binomial(cfg.N, cfg.Q)) /
                     static_cast<double>(dim);

    std::string params =
        make_params(cfg, cfg.N, std::to_string(r), cfg.k, cfg.Q, cfg.samples);
    records.push_back(make_record(cfg, params, "charge_histogram_chi2_pvalue",
                                  pvalue, 0.0, chi2_min, pvalue >= chi2_min));
    records.push_back(make_record(cfg, params, "acceptance_prob_mean",
                                  acc.mean, acc.se, acc_ref,
                                  std::abs(acc.mean - acc_ref) <=
                                      mc_sigma * std::max(acc.se, 1e-15)));
    stamp_time(records, first, elapsed_ms(t0));
  }

  // Block B: postselected ensemble against the projected reference at
  // (post_N, post_Q, post_r).
  {
    auto t0 = Clock::now();
    std::size_t first = records.size();
    const std::uint64_t block_key = keyed_hash(master, 0xB2, 0);
    const EnsembleSpec espec = base_spec(cfg, post_n, post_r, post_q);
    const double rho_q_r1 =
        static_cast<double>(post_q) * (post_n - post_q) /
        (static_cast<double>(post_n) * (post_n - 1));
    const double acc_ref = static_cast<double>(binomial(post_n, post_q)) /
                           static_cast<double>(Index{1} << post_n);

    // Reference check: the projected flat state's correlator, evaluated
    // numerically in the sector basis against the closed form.
    {
      SectorBasis basis = u1_sector(post_n, post_q);
      Matrix rho_q = maximally_mixed(basis.dim_sector);
      CorrelatorSession session(std::move(rho_q), std::move(basis));
      double est = session.aggregate_r1(ChargedOp::kSPlus);
      records.push_back(make_record(
          cfg,
          make_params(cfg, post_n, std::to_string(post_r), cfg.k, post_q, 0),
          "rhoQ_reference_r1", est, 0.0, rho_q_r1,
          std::abs(est - rho_q_r1) <= exact_tol));
    }

    struct PostDraw {
      double r1_pair = 0.0;
      double r1_aggregate = 0.0;
      double acceptance = 0.0;
      double residual = 0.0;
    };
    auto draws = parallel_map(post_samples, cfg.threads, [&](long i) {
      RandomStream stream(mix_seed(block_key, static_cast<std::uint64_t>(i)));
      PostDraw out;
      if (post_n <= 8) {
        PreparedState st = prepare_u1_state(espec, stream);
        out.acceptance = st.acceptance_probability;
        double trace_dev = std::abs(st.rho.trace().real() - 1.0) +
                           std::abs(st.rho.trace().imag());
        double strong = symmetry_residuals(st.rho, SymmetryKind::kU1).first;
        out.residual = std::max(trace_dev, strong);
        CorrelatorSession session(std::move(st.rho));
        out.r1_pair = session.r1(1, post_n, ChargedOp::kSPlus);
        out.r1_aggregate = session.aggregate_r1(ChargedOp::kSPlus);
      } else {
        PreparedState st = prepare_u1_sector_state(espec, stream);
        out.acceptance = st.acceptance_probability;
        double trace_dev = std::abs(st.rho.trace().real() - 1.0) +
                           std::abs(st.rho.trace().imag());
        double herm_dev = (st.rho - st.rho.adjoint()).cwiseAbs().maxCoeff();
        double min_eig = hermitian_eigenvalues(st.rho)(0);
        out.residual =
            std::max({trace_dev, herm_dev, std::max(0.0, -min_eig)});
        CorrelatorSession session(std::move(st.rho), std::move(*st.sector));
        out.r1_pair = session.r1(1, post_n, ChargedOp::kSPlus);
        out.r1_aggregate = session.aggregate_r1(ChargedOp::kSPlus);
      }
      return out;
    });

    std::vector<double> r1s, aggs, accs;
    double residual_max = 0.0;
    for (const auto& d : draws) {
      r1s.push_back(d.r1_pair);
      aggs.push_back(d.r1_aggregate);
      accs.push_back(d.acceptance);
      residual_max = std::max(residual_max, d.residual);
    }
    MeanStderr r1 = mean_stderr(r1s);
    MeanStderr agg = mean_stderr(aggs);
    MeanStderr acc = mean_stderr(accs);

    std::string params = make_params(cfg, post_n, std::to_string(post_r),
                                     cfg.k, post_q, post_samples);
    records.push_back(make_record(cfg, params, "postselected_r1_mean",
                                  r1.mean, r1.se, rho_q_r1,
                                  r1.mean < ratio_max * rho_q_r1));
    records.push_back(make_record(cfg, params,
                                  "postselected_aggregate_r1_mean", agg.mean,
                                  agg.se, rho_q_r1,
                                  agg.mean < ratio_max * rho_q_r1));
    records.push_back(make_record(cfg, params,
                                  "acceptance_prob_mean_postselected",
                                  acc.mean, acc.se, acc_ref,
                                  std::abs(acc.mean - acc_ref) <=
                                      mc_sigma * std::max(acc.se, 1e-15)));
    records.push_back(make_record(cfg, params, "state_residual_max",
                                  residual_max, 0.0, residual_tol,
                                  residual_max <= residual_tol));
    stamp_time(records, first, elapsed_ms(t0));
  }
  return records;
}

// ---------------------------------------------------------------------------
// purity-scaling

namespace {

struct PurityBlock {
  std::vector<ResultRecord> records;
  double analytic_shots = 0.0;
  double empirical_shots = 0.0;
  bool degenerate = false;
};

PurityBlock purity_block(const ExperimentConfig& cfg, std::size_t ri,
                         std::uint64_t master) {
  const long r = cfg.r_grid[ri];
  const long calibration_shots =
      static_cast<long>(cfg.knob("calibration_shots"));
  const double factor = cfg.knob("procedural_factor");
  const long shot_cap = static_cast<long>(cfg.knob("shot_cap"));
  const long trials = cfg.samples;

  PurityBlock block;
  auto t0 = Clock::now();
  std::string params =
      make_params(cfg, cfg.N, std::to_string(r), cfg.k, -1, trials);
  RandomStream stream(mix_seed(keyed_hash(master, 0x95, ri), 0));
  const EnsembleSpec espec = base_spec(cfg, cfg.N, r, -1);
  PreparedState st = prepare_z2_state(espec, stream, PreparationPath::kFormula);

  const double dim = static_cast<double>(Index{1} << cfg.N);
  const double p_ref = 2.0 / dim;           // purity of the symmetric state
  const double p_true = 1.0 / static_cast<double>(r);
  const double gap = p_true - p_ref;

  if (gap < 1e-15) {
    // At r = 2^{N-1} the rank-r state and the reference have identical
    // purity; no shot count can separate them, so the block reports the
    // detected degeneracy and nothing else.
    block.degenerate = true;
    block.records.push_back(make_record(cfg, params, "degenerate_gap_flagged",
                                        1.0, 0.0, std::nullopt, true));
    stamp_time(block.records, 0, elapsed_ms(t0));
    return block;
  }

  // Analytic shot count: the SWAP-test estimate has variance
  // 4 q (1 - q) / n at success probability q = (1 + Tr rho^2) / 2, so a
  // 3-sigma separation from the reference needs n = 36 q (1 - q) / gap^2.
  const double q_true = (1.0 + p_true) / 2.0;
  const double n_star = 36.0 * q_true * (1.0 - q_true) / (gap * gap);
  block.analytic_shots = n_star;
  block.records.push_back(make_record(cfg, params, "shots_to_3sigma_analytic",
                                      n_star, 0.0, std::nullopt, true));

  // Plug-in estimate from one long calibration run: invert the same
  // formula at the measured purity and propagate the binomial error.
  auto [p_hat, p_se] = swap_test_purity(st.rho, calibration_shots, stream);
  double q_hat = (1.0 + p_hat) / 2.0;
  double q_se = p_se / 2.0;
  double gap_hat = p_hat - p_ref;
  double n_emp = 0.0;
  double n_emp_se = 0.0;
  bool emp_ok = gap_hat > 0.0;
  if (emp_ok) {
    n_emp = 36.0 * q_hat * (1.0 - q_hat) / (gap_hat * gap_hat);
    double dn_dq = 36.0 * ((1.0 - 2.0 * q_hat) / (gap_hat * gap_hat) -
                           4.0 * q_hat * (1.0 - q_hat) /
                               (gap_hat * gap_hat * gap_hat));
    n_emp_se = std::abs(dn_dq) * q_se;
  }
  block.empirical_shots = n_emp;
  block.records.push_back(
      make_record(cfg, params, "shots_to_3sigma_empirical", n_emp, n_emp_se,
                  n_star,
                  emp_ok && n_emp >= n_star / factor && n_emp <= n_star * factor));

  // Procedural answer: smallest n whose own-error 3-sigma test succeeds in
  // at least half of `trials` repetitions (at the analytic n the expected
  // separation equals 3 sigma, making ~50% the crossing point).
  auto success_rate = [&](long shots) {
    long hits = 0;
    for (long t = 0; t < trials; ++t) {
      auto [est, se] = swap_test_purity(st.rho, shots, stream);
      bool hit = se > 0.0 ? (est - p_ref) >= 3.0 * se : est > p_ref;
      if (hit) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
  };
  long n_hi = 8;
  while (n_hi < shot_cap && success_rate(n_hi) < 0.5) n_hi *= 2;
  double n_proc;
  bool proc_ok;
  if (n_hi >= shot_cap) {
    n_proc = static_cast<double>(shot_cap);
    proc_ok = false;
  } else {
    long lo = n_hi / 2;
    long hi = n_hi;
    while (hi - lo > 1) {
      long mid = lo + (hi - lo) / 2;
      if (success_rate(mid) >= 0.5) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    n_proc = static_cast<double>(hi);
    proc_ok = n_proc >= n_star / factor && n_proc <= n_star * factor;
  }
  block.records.push_back(make_record(
      cfg, params, "shots_to_3sigma_procedural", n_proc, 0.0, n_star, proc_ok));

  stamp_time(block.records, 0, elapsed_ms(t0));
  return block;
}

}  // namespace

std::vector<ResultRecord> run_purity_scaling(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const double slope_min = cfg.knob("slope_min");
  const double slope_max = cfg.knob("slope_max");
  const std::uint64_t master = run_master(cfg);

  auto blocks = parallel_map(
      static_cast<long>(cfg.r_grid.size()), cfg.threads, [&](long ri) {
        return purity_block(cfg, static_cast<std::size_t>(ri), master);
      });

  std::vector<ResultRecord> records;
  std::vector<double> grid_r, analytic, empirical;
  for (std::size_t ri = 0; ri < blocks.size(); ++ri) {
    for (auto& rec : blocks[ri].records) records.push_back(std::move(rec));
    if (!blocks[ri].degenerate) {
      grid_r.push_back(static_cast<double>(cfg.r_grid[ri]));
      analytic.push_back(blocks[ri].analytic_shots);
      if (blocks[ri].empirical_shots > 0.0)
        empirical.push_back(blocks[ri].empirical_shots);
    }
  }

  if (grid_r.size() >= 2) {
    auto t0 = Clock::now();
    std::size_t first = records.size();
    std::string params =
        make_params(cfg, cfg.N, join_grid(cfg.r_grid), cfg.k, -1, cfg.samples);
    double slope_a = log_log_slope(grid_r, analytic);
    records.push_back(make_record(cfg, params, "log_slope_shots_analytic",
                                  slope_a, 0.0, 2.0,
                                  slope_a >= slope_min && slope_a <= slope_max));
    if (empirical.size() == grid_r.size()) {
      double slope_e = log_log_slope(grid_r, empirical);
      records.push_back(
          make_record(cfg, params, "log_slope_shots_empirical", slope_e, 0.0,
                      2.0, slope_e >= slope_min && slope_e <= slope_max));
    }
    stamp_time(records, first, elapsed_ms(t0));
  }
  return records;
}

// ---------------------------------------------------------------------------
// concentration

std::vector<ResultRecord> run_concentration(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const std::uint64_t master = run_master(cfg);
  const double mc_sigma = cfg.knob("mc_sigma");
  const double band_factor = cfg.knob("band_factor");
  const double tail_factor = cfg.knob("tail_delta_factor");
  const SectorBasis basis = u1_sector(cfg.N, cfg.Q);
  const Index d_q = basis.dim_sector;
  const Index dim = Index{1} << cfg.N;

  std::vector<ResultRecord> records;
  for (std::size_t ri = 0; ri < cfg.r_grid.size(); ++ri) {
    const long r = cfg.r_grid[ri];
    if (r >= d_q)
      std::fprintf(stderr,
                   "concentration: r = %ld >= C(N,Q) = %ld leaves no room "
                   "for spectral flatness; results will be trivial\n",
                   r, static_cast<long>(d_q));
    auto t0 = Clock::now();
    std::size_t first = records.size();
    const std::uint64_t block_key = keyed_hash(master, 0xC0, ri);
    const EnsembleSpec espec = base_spec(cfg, cfg.N, r, cfg.Q);
    const double c = static_cast<double>(dim) /
                     (static_cast<double>(r) * static_cast<double>(d_q));

    struct Sample {
      double t1 = 0.0;  // Tr rho_tilde
      double t2 = 0.0;  // Tr rho_tilde^2
      double flatness = 0.0;
    };
    auto samples = parallel_map(cfg.samples, cfg.threads, [&](long i) {
      RandomStream stream(mix_seed(block_key, static_cast<std::uint64_t>(i)));
      // Charge-sector rows of the drawn isometry; rho_tilde = c W W^dag.
      Matrix w(d_q, r);
      if (cfg.unitary_mode == UnitaryMode::kHaar) {
        Matrix iso = haar_isometry(dim, r, stream);
        for (Index s = 0; s < d_q; ++s)
          w.row(s) =
              iso.row(static_cast<Index>(basis.basis_index_map[
                  static_cast<std::size_t>(s)]));
      } else {
        Matrix u = draw_unitary(cfg.N, espec, stream);
        for (Index s = 0; s < d_q; ++s)
          w.row(s) =
              u.row(static_cast<Index>(basis.basis_index_map[
                  static_cast<std::size_t>(s)])).leftCols(r);
      }
      Sample out;
      out.t1 = c * w.squaredNorm();
      Matrix gram = w.adjoint() * w;  // r x r
      out.t2 = c * c * gram.squaredNorm();
      // Sum of squared deviations of rho_tilde's r nonzero eigenvalues
      // from 1/r, expanded as Tr rho_tilde^2 - 2 Tr rho_tilde / r + 1/r.
      out.flatness =
          out.t2 - 2.0 * out.t1 / static_cast<double>(r) +
          1.0 / static_cast<double>(r);
      return out;
    });

    std::vector<double> t1s, t2s, flats;
    for (const Sample& s : samples) {
      t1s.push_back(s.t1);
      t2s.push_back(s.t2);
      flats.push_back(s.flatness);
    }
    MeanStderr t1 = mean_stderr(t1s);
    MeanStderr t2 = mean_stderr(t2s);
    MeanStderr flat = mean_stderr(flats);

    const double t1_ref = f_moment_u1(cfg.N, cfg.Q, r, 1);
    const double t2_ref = u1_tilde_purity_mean(cfg.N, cfg.Q, r);
    const double flat_ref = t2_ref - 2.0 * t1_ref / static_cast<double>(r) +
                            1.0 / static_cast<double>(r);
    const double band_low = 1.0 / static_cast<double>(r);
    const double band_high = band_low + band_factor / static_cast<double>(d_q);
    const double delta = tail_factor * flat_ref;
    long tail_hits = 0;
    for (double v : flats)
      if (v > delta) ++tail_hits;
    double tail_freq =
        static_cast<double>(tail_hits) / static_cast<double>(cfg.samples);
    double tail_se = std::sqrt(tail_freq * (1.0 - tail_freq) /
                               static_cast<double>(cfg.samples));

    std::string params =
        make_params(cfg, cfg.N, std::to_string(r), cfg.k, cfg.Q, cfg.samples);
    records.push_back(make_record(cfg, params, "tr_rhotilde_mean", t1.mean,
                                  t1.se, t1_ref,
                                  std::abs(t1.mean - t1_ref) <=
                                      mc_sigma * std::max(t1.se, 1e-15)));
    records.push_back(make_record(cfg, params, "tr_rhotilde2_mean", t2.mean,
                                  t2.se, t2_ref,
                                  std::abs(t2.mean - t2_ref) <=
                                      mc_sigma * std::max(t2.se, 1e-15)));
    records.push_back(make_record(
        cfg, params, "tr_rhotilde2_band", t2.mean, t2.se, band_high,
        t2.mean >= band_low - mc_sigma * t2.se &&
            t2.mean <= band_high + mc_sigma * t2.se));
    records.push_back(make_record(cfg, params, "sum_delta_sq_mean", flat.mean,
                                  flat.se, flat_ref,
                                  std::abs(flat.mean - flat_ref) <=
                                      mc_sigma * std::max(flat.se, 1e-15)));
    records.push_back(make_record(cfg, params, "sum_delta_sq_tail", tail_freq,
                                  tail_se, 1.0 / tail_factor,
                                  tail_freq <= 1.0 / tail_factor));
    stamp_time(records, first, elapsed_ms(t0));
  }
  return records;
}

// ---------------------------------------------------------------------------
// emitters and numeric helpers

std::string render_results_csv(const std::vector<ResultRecord>& records) {
  std::ostringstream out;
  out << "experiment,parameters,statistic,estimate,stderr,"
         "analytic_reference,pass\n";
  for (const ResultRecord& rec : records) {
    out << rec.experiment << ',' << rec.parameters << ',' << rec.statistic
        << ',' << fmt17(rec.estimate) << ',' << fmt17(rec.stderr_value) << ',';
    if (rec.analytic_reference) out << fmt17(*rec.analytic_reference);
    out << ',' << (rec.pass ? "true" : "false") << '\n';
  }
  return out.str();
}

std::string render_results_json(const std::vector<ResultRecord>& records) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const ResultRecord& rec : records) {
    nlohmann::ordered_json row;
    row["experiment"] = rec.experiment;
    row["parameters"] = rec.parameters;
    row["statistic"] = rec.statistic;
    row["estimate"] = rec.estimate;
    row["stderr"] = rec.stderr_value;
    if (rec.analytic_reference) {
      row["analytic_reference"] = *rec.analytic_reference;
    } else {
      row["analytic_reference"] = nullptr;
    }
    row["pass"] = rec.pass;
    doc.push_back(std::move(row));
  }
  return doc.dump(2) + "\n";
}

void emit_results(const std::vector<ResultRecord>& records,
                  const std::string& format, const std::string& path) {
  if (path.empty()) throw std::invalid_argument("output path is empty");
  std::string body;
  if (format == "csv") {
    body = render_results_csv(records);
  } else if (format == "json") {
    body = render_results_json(records);
  } else {
    throw std::invalid_argument("format must be csv or json: " + format);
  }
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << body;
  if (!out) throw std::runtime_error("write failed: " + path);
}

double chi_squared_pvalue(double chi2, int dof) {
  if (dof < 1) throw std::invalid_argument("chi-squared dof must be >= 1");
  if (chi2 < 0.0) throw std::invalid_argument("chi-squared stat must be >= 0");
  double a = static_cast<double>(dof) / 2.0;
  double x = chi2 / 2.0;
  if (x == 0.0) return 1.0;
  double log_prefactor = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    // Lower series: P(a, x) = x^a e^-x / Gamma(a) sum_n x^n / (a)_{n+1}.
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < 1000; ++n) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    double p = sum * std::exp(log_prefactor);
    return std::clamp(1.0 - p, 0.0, 1.0);
  }
  // Upper continued fraction (modified Lentz).
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::clamp(std::exp(log_prefactor) * h, 0.0, 1.0);
}

double log_log_slope(const std::vector<double>& x,
                     const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("slope fit needs >= 2 matched points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw std::invalid_argument("slope fit needs positive values");
    double lx = std::log(x[i]);
    double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12)
    throw std::invalid_argument("slope fit needs distinct x values");
  return (n * sxy - sx * sy) / denom;
}

MeanStderr mean_stderr(const std::vector<double>& values) {
  if (values.empty())
    throw std::invalid_argument("mean_stderr needs at least one value");
  double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  double variance = ss / (n - 1.0);
  return {mean, std::sqrt(variance / n)};
}

}  // namespace swssb
