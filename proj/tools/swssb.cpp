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

#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swssb/experiments.hpp"

namespace {

swssb::UnitaryMode parse_mode_arg(const std::string& text) {
  if (text == "haar") return swssb::UnitaryMode::kHaar;
  if (text == "clifford") return swssb::UnitaryMode::kClifford;
  if (text == "pfc") return swssb::UnitaryMode::kPfc;
  throw CLI::ValidationError("--mode", "must be haar, clifford, or pfc");
}

const char* mode_text(swssb::UnitaryMode mode) {
  switch (mode) {
    case swssb::UnitaryMode::kHaar:
      return "haar";
    case swssb::UnitaryMode::kClifford:
      return "clifford";
    case swssb::UnitaryMode::kPfc:
      return "pfc";
  }
  return "?";
}

int run_command(const swssb::ExperimentConfig& config) {
  std::printf("experiment %s: N=%d r=", config.experiment.c_str(), config.N);
  for (std::size_t i = 0; i < config.r_grid.size(); ++i)
    std::printf("%s%ld", i ? "," : "", config.r_grid[i]);
  std::printf(" mode=%s keyed=%s samples=%ld seed=%llu threads=%d\n",
              mode_text(config.unitary_mode), config.keyed ? "true" : "false",
              config.samples,
              static_cast<unsigned long long>(config.seed), config.threads);

  std::vector<swssb::ResultRecord> records = swssb::run_experiment(config);
  swssb::emit_results(records, config.format, config.output);

  long passed = 0;
  for (const auto& rec : records) {
    if (rec.pass) ++passed;
    std::printf("%-6s %-34s est=%- 14.6g se=%- 12.4g", rec.pass ? "[ok]" : "[FAIL]",
                rec.statistic.c_str(), rec.estimate, rec.stderr_value);
    if (rec.analytic_reference) {
      std::printf(" ref=%- 14.6g", *rec.analytic_reference);
    } else {
      std::printf(" ref=%-14s", "-");
    }
    std::printf(" %8.0f ms  %s\n", rec.wall_time_ms, rec.parameters.c_str());
  }
  std::printf("%ld/%zu statistics passed; results written to %s\n", passed,
              records.size(), config.output.c_str());
  return passed == static_cast<long>(records.size()) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "swssb: exact-numerics laboratory for symmetric random mixed states"};
  app.require_subcommand(1);

  auto* list_cmd =
      app.add_subcommand("list", "list available experiments and defaults");

  auto* run_cmd = app.add_subcommand(
      "run", "run one experiment and write a results file");
  std::string experiment;
  std::string config_path;
  std::optional<int> n_opt, k_opt, q_opt, threads_opt;
  std::optional<long> samples_opt;
  std::optional<std::uint64_t> seed_opt;
  std::vector<long> r_values;
  std::string mode_arg, out_path, format_arg;
  bool fresh = false;
  run_cmd->add_option("experiment", experiment, "experiment name (see list)")
      ->required();
  run_cmd->add_option("--config", config_path,
                      "JSON config file; flags below override its fields");
  run_cmd->add_option("--N", n_opt, "number of sites");
  run_cmd->add_option("--r", r_values,
                      "projector ranks (powers of two); repeat or "
                      "comma-separate for a grid")
      ->delimiter(',');
  run_cmd->add_option("--k", k_opt, "moment order");
  run_cmd->add_option("--Q", q_opt, "target charge (u1 ensembles)");
  run_cmd->add_option("--samples", samples_opt, "Monte-Carlo sample count");
  run_cmd->add_option("--seed", seed_opt, "master seed (keyed mode)");
  run_cmd->add_option("--mode", mode_arg, "unitary mode: haar|clifford|pfc");
  run_cmd->add_option("--out", out_path, "output file path");
  run_cmd->add_option("--format", format_arg, "output format: csv|json");
  run_cmd->add_option("--threads", threads_opt, "worker thread count");
  run_cmd->add_flag("--fresh", fresh,
                    "draw from OS entropy instead of the keyed seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list_cmd->parsed()) {
      for (const std::string& name : swssb::experiment_names()) {
        swssb::ExperimentConfig cfg = swssb::default_config(name);
        std::printf("%-22s %s\n", name.c_str(),
                    swssb::experiment_description(name).c_str());
        std::printf("%-22s   defaults: N=%d r=", "", cfg.N);
        for (std::size_t i = 0; i < cfg.r_grid.size(); ++i)
          std::printf("%s%ld", i ? "," : "", cfg.r_grid[i]);
        if (cfg.Q >= 0) std::printf(" Q=%d", cfg.Q);
        std::printf(" k=%d samples=%ld mode=%s out=%s\n", cfg.k, cfg.samples,
                    mode_text(cfg.unitary_mode), cfg.output.c_str());
      }
      return 0;
    }

    swssb::ExperimentConfig config =
        config_path.empty() ? swssb::default_config(experiment)
                            : swssb::load_config_file(config_path);
    if (!config_path.empty() && config.experiment != experiment)
      throw std::invalid_argument("config file is for experiment '" +
                                  config.experiment +
                                  "', command line says '" + experiment + "'");
    if (n_opt) config.N = *n_opt;
    if (!r_values.empty()) config.r_grid = r_values;
    if (k_opt) config.k = *k_opt;
    if (q_opt) config.Q = *q_opt;
    if (samples_opt) config.samples = *samples_opt;
    if (seed_opt) config.seed = *seed_opt;
    if (!mode_arg.empty()) config.unitary_mode = parse_mode_arg(mode_arg);
    if (!out_path.empty()) config.output = out_path;
    if (!format_arg.empty()) config.format = format_arg;
    if (threads_opt) config.threads = *threads_opt;
    if (fresh) config.keyed = false;
    swssb::validate_config(config);
    return run_command(config);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
