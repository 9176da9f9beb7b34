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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swssb/ensembles.hpp"

namespace swssb {

struct ExperimentConfig {
  std::string experiment;
  SymmetryKind symmetry = SymmetryKind::kZ2;
  int N = 0;
  std::vector<long> r_grid;
  int k = 2;
  int Q = -1;
  long samples = 0;
  std::uint64_t seed = 20260818ull;
  UnitaryMode unitary_mode = UnitaryMode::kHaar;
  bool keyed = true;
  std::string output;
  std::string format = "csv";
  int threads = 1;
  // Named tolerance/size knobs with per-experiment defaults; any numeric
  // key in a config file that is not a structural field lands here.
  std::map<std::string, double> knobs;

  double knob(const std::string& name) const;
};

struct ResultRecord {
  std::string experiment;
  std::string parameters;  // canonical "N=..;r=..;..." string
  std::string statistic;
  double estimate = 0.0;
  double stderr_value = 0.0;  // 0 exactly for Weingarten-exact rows
  std::optional<double> analytic_reference;
  bool pass = false;
  // Populated for console reporting only; never written to output files so
  // that identical (config, seed) runs emit identical bytes.
  double wall_time_ms = 0.0;
};

// Known experiment names, in listing order.
std::vector<std::string> experiment_names();
std::string experiment_description(const std::string& name);

// Built-in defaults (grids, seeds, knobs) for a named experiment.
ExperimentConfig default_config(const std::string& name);

// Reads a flat JSON config and merges it over the experiment's defaults.
ExperimentConfig load_config_file(const std::string& path);

// Checks every grid value against module preconditions; throws
// std::invalid_argument with a message naming the offending field.
void validate_config(const ExperimentConfig& config);

// Dispatches on config.experiment.
std::vector<ResultRecord> run_experiment(const ExperimentConfig& config);

std::vector<ResultRecord> run_r1_decay(const ExperimentConfig& config);
std::vector<ResultRecord> run_indistinguishability(
    const ExperimentConfig& config);
std::vector<ResultRecord> run_u1_pipeline(const ExperimentConfig& config);
std::vector<ResultRecord> run_purity_scaling(const ExperimentConfig& config);
std::vector<ResultRecord> run_concentration(const ExperimentConfig& config);

// Writes records as CSV (fixed header/column order, %.17g doubles) or JSON
// (array of objects, stable key order).  Identical records produce
// identical bytes.
void emit_results(const std::vector<ResultRecord>& records,
                  const std::string& format, const std::string& path);

// Serializations used by emit_results, exposed for tests.
std::string render_results_csv(const std::vector<ResultRecord>& records);
std::string render_results_json(const std::vector<ResultRecord>& records);

// Upper-tail p-value of the chi-squared distribution (regularized upper
// incomplete gamma Q(dof/2, chi2/2)).
double chi_squared_pvalue(double chi2, int dof);

// Least-squares slope of log(y) against log(x); x, y must be positive.
double log_log_slope(const std::vector<double>& x,
                     const std::vector<double>& y);

struct MeanStderr {
  double mean = 0.0;
  double se = 0.0;
};
MeanStderr mean_stderr(const std::vector<double>& values);

}  // namespace swssb
