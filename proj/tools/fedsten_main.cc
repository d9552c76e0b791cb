/*
 * Copyright 2026 The fedsten Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line runner for the experiment matrix.
//
//   fedsten run --experiment <id> --config <path> --seed <u64> --out <dir>
//               [--paper-schedule] [--transport inproc|tcp] [--listen <addr>]
//   fedsten matrix --config <path> --out <dir> [--seed <u64>] [--paper-schedule]
//   fedsten report --in <dir>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "fedsten/common/error.h"
#include "fedsten/experiment/config.h"
#include "fedsten/experiment/runner.h"

namespace {

using namespace fedsten::experiment;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool paper_schedule = false;
};

ExperimentConfig load_config(const CommonFlags& flags) {
  ExperimentConfig config = desk_config();
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in) throw fedsten::Error("cannot read config " + flags.config_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    config = from_json(ss.str());
  }
  if (flags.seed) config.seed = *flags.seed;
  if (flags.paper_schedule) apply_paper_schedule(config);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-client federated stenosis detection experiments"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::string experiment, run_out, transport, listen;
  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("--experiment", experiment, "local, fl1, fl2, fl3 or proposed")->required();
  run->add_option("--config", run_flags.config_path, "JSON config; defaults apply when omitted");
  run->add_option("--seed", run_flags.seed, "Root seed");
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_flag("--paper-schedule", run_flags.paper_schedule, "Use the published epoch schedule");
  run->add_option("--transport", transport, "inproc or tcp");
  run->add_option("--listen", listen, "TCP listen address host:port");

  CommonFlags matrix_flags;
  std::string matrix_out;
  auto* matrix = app.add_subcommand("matrix", "Run local, fl1, fl2, fl3 and proposed");
  matrix->add_option("--config", matrix_flags.config_path, "JSON config");
  matrix->add_option("--seed", matrix_flags.seed, "Root seed");
  matrix->add_option("--out", matrix_out, "Output directory")->required();
  matrix->add_flag("--paper-schedule", matrix_flags.paper_schedule,
                   "Use the published epoch schedule");

  std::string report_in;
  auto* report = app.add_subcommand("report", "Print the comparison table of a matrix run");
  report->add_option("--in", report_in, "Matrix or run output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ExperimentConfig config = load_config(run_flags);
      config.experiment_id = parse_experiment_id(experiment);
      if (!transport.empty()) config.transport = parse_transport(transport);
      if (!listen.empty()) config.listen = listen;
      config.validate();
      const auto result = run_experiment(config);
      write_experiment(config, result, run_out);
      write_summary_csv(std::cout, result.summary);
    } else if (*matrix) {
      const ExperimentConfig config = load_config(matrix_flags);
      const auto result = run_matrix(config, matrix_out);
      write_comparison_csv(std::cout, result.comparison);
    } else if (*report) {
      std::cout << render_report(report_in);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fedsten: %s\n", e.what());
    return 1;
  }
  return 0;
}
