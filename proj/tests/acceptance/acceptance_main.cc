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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.
//
//   acceptance --fedsten <path to fedsten binary> --work <scratch dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedsten/aggregation/fedavg.h"
#include "fedsten/common/rng.h"
#include "fedsten/experiment/config.h"
#include "fedsten/experiment/runner.h"
#include "fedsten/metrics/detection_metrics.h"
#include "support/fedavg_oracle.h"
#include "support/gradcheck.h"
#include "support/match_oracle.h"
#include "support/recording_observer.h"
#include "support/tiny_config.h"

namespace {

namespace fs = std::filesystem;
using namespace fedsten;
using experiment::ExperimentConfig;
using experiment::ExperimentId;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

class Cli {
 public:
  explicit Cli(std::string binary) : binary_(std::move(binary)) {}

  // Runs `fedsten <args>` with stdout discarded; true on exit status 0.
  bool run(const std::string& args) const {
    const std::string cmd = "\"" + binary_ + "\" " + args + " > /dev/null";
    return std::system(cmd.c_str()) == 0;
  }

 private:
  std::string binary_;
};

Outcome aggregation_oracle() {
  const auto r = testing::run_fedavg_oracle(20240601, 1000, 5, 100, 1e-6);
  return {r.oracle_violations == 0 && r.hull_violations == 0 && r.seconds < 5.0,
          format("%d sets, %llu elements, max rel err %.2e, %llu oracle / %llu hull "
                 "violations, %.2f s",
                 r.trials, static_cast<unsigned long long>(r.elements), r.max_relative_error,
                 static_cast<unsigned long long>(r.oracle_violations),
                 static_cast<unsigned long long>(r.hull_violations), r.seconds)};
}

Outcome coefficient_fixture() {
  auto one = [](float v) {
    NamedParameterSet s;
    s.add("backbone.w", Role::kTrainable, Tensor({1}, {v}));
    return s;
  };
  const auto plan = experiment::builtin_plan(ExperimentId::kProposed, {"client1", "client2"});
  const auto out = agg::fedavg({{"client1", one(2.0f)}, {"client2", one(9.0f)}}, plan);
  const float got = out.at("backbone.w")[0];
  return {got == 8.0f, format("alpha=%g beta=%g: [2] and [9] -> [%.9g]",
                              plan.weights[0].coefficient, plan.weights[1].coefficient, got)};
}

ExperimentConfig three_round(ExperimentId id) {
  auto c = experiment::desk_config();
  c.experiment_id = id;
  c.seed = 1;
  c.schedule.total_rounds = 3;
  return c;
}

Outcome partial_sharing_isolation() {
  testing::RecordingObserver observer;
  const auto c = three_round(ExperimentId::kProposed);
  experiment::run_experiment(c, &observer);
  int head_changes = 0, backbone_mismatches = 0, checked = 0;
  for (std::uint32_t r = 1; r <= 3; ++r) {
    for (const auto& id : c.client_ids()) {
      const auto& u = observer.at(id, r);
      head_changes += static_cast<int>(
          diff_names(testing::select(u.before, "head."), testing::select(u.after, "head.")).size());
      ++checked;
    }
    if (testing::select(observer.at("client1", r).after, "backbone.") !=
        testing::select(observer.at("client2", r).after, "backbone.")) {
      ++backbone_mismatches;
    }
  }
  return {checked == 6 && head_changes == 0 && backbone_mismatches == 0,
          format("%d GlobalUpdates: %d head tensors changed, %d rounds with differing backbones",
                 checked, head_changes, backbone_mismatches)};
}

Outcome fl3_ablation() {
  testing::RecordingObserver observer;
  experiment::run_experiment(three_round(ExperimentId::kFl3), &observer);
  int stats_equal = 0, trainable_mismatches = 0;
  for (std::uint32_t r = 1; r <= 3; ++r) {
    const auto& a = observer.at("client1", r).after;
    const auto& b = observer.at("client2", r).after;
    if (a.at("backbone.norm.running_mean") == b.at("backbone.norm.running_mean")) ++stats_equal;
    if (a.at("backbone.norm.running_var") == b.at("backbone.norm.running_var")) ++stats_equal;
    if (testing::select(a, "backbone.", Role::kTrainable) !=
        testing::select(b, "backbone.", Role::kTrainable)) {
      ++trainable_mismatches;
    }
  }
  return {stats_equal == 0 && trainable_mismatches == 0,
          format("3 rounds: %d identical statistic tensors across clients, %d rounds with "
                 "differing trainable backbones",
                 stats_equal, trainable_mismatches)};
}

Outcome schedule_conformance(const Cli& cli, const fs::path& work) {
  // Small data keeps the full 20-round protocol quick; the schedule does not
  // depend on dataset size.
  const fs::path config = work / "schedule_config.json";
  {
    std::ofstream out(config);
    out << experiment::to_json(testing::tiny_config(ExperimentId::kProposed, 1));
  }
  const fs::path out = work / "schedule_run";
  if (!cli.run("run --experiment proposed --config \"" + config.string() +
               "\" --seed 1 --paper-schedule --out \"" + out.string() + "\"")) {
    return {false, "fedsten run --paper-schedule failed"};
  }
  std::set<std::uint32_t> rounds;
  int rows = 0, wrong = 0;
  for (const auto& row : read_csv(out / "schedule.csv")) {
    if (row.size() != 4) return {false, "malformed schedule.csv"};
    const auto round = static_cast<std::uint32_t>(std::stoul(row[0]));
    const auto epochs = std::stoul(row[2]);
    const bool first = row[1] == "client1";
    const unsigned long expected = round == 1 ? (first ? 40 : 16) : (first ? 20 : 4);
    if (epochs != expected) ++wrong;
    rounds.insert(round);
    ++rows;
  }
  std::set<std::uint32_t> metric_rounds;
  for (const auto& row : read_csv(out / "rounds.csv")) metric_rounds.insert(std::stoul(row[0]));
  const bool twenty = rounds.size() == 20 && *rounds.begin() == 1 && *rounds.rbegin() == 20 &&
                      metric_rounds == rounds && rows == 40;
  return {twenty && wrong == 0,
          format("%zu rounds, %d schedule rows, %d with unexpected epochs (client1 40 then 20, "
                 "client2 16 then 4)",
                 rounds.size(), rows, wrong)};
}

Outcome metric_oracle() {
  const auto r = testing::run_match_oracle(2025, 1000);
  const double fixture = metrics::iou(Box{0, 0, 10, 10}, Box{5, 0, 15, 10});
  const bool iou_ok = std::abs(fixture - 1.0 / 3.0) < 1e-12;
  return {r.agree >= 950 && r.violations == 0 && iou_ok,
          format("agreement %d/%d (pinned 995), %d conservation violations, IoU fixture %.12f",
                 r.agree, r.trials, r.violations, fixture)};
}

Outcome gradient_check() {
  Rng rng(4242);
  double worst = 0.0;
  int failing = 0, tensors = 0;
  for (int i = 0; i < 50; ++i) {
    const auto g = testing::random_grad_instance(rng);
    for (const auto& e : testing::gradient_errors(g, 1e-3)) {
      worst = std::max(worst, e.relative_error);
      if (e.relative_error > 1e-4) ++failing;
      ++tensors;
    }
  }
  return {failing == 0, format("50 instances, %d tensors, worst relative error %.2e, %d above "
                               "1e-4",
                               tensors, worst, failing)};
}

struct DeterminismOutcome {
  Outcome outcome;
  double matrix_seconds = 0.0;
};

DeterminismOutcome determinism(const Cli& cli, const fs::path& work) {
  const fs::path a = work / "matrix_a", b = work / "matrix_b", tcp = work / "tcp_proposed";
  const auto start = std::chrono::steady_clock::now();
  if (!cli.run("matrix --seed 1 --out \"" + a.string() + "\"")) return {{false, "matrix failed"}};
  const double seconds = seconds_since(start);
  if (!cli.run("matrix --seed 1 --out \"" + b.string() + "\"")) {
    return {{false, "second matrix failed"}, seconds};
  }
  if (!cli.run("run --experiment proposed --seed 1 --transport tcp --out \"" + tcp.string() +
               "\"")) {
    return {{false, "tcp run failed"}, seconds};
  }
  const std::string summary = slurp(a / "summary.csv");
  const bool matrix_same = !summary.empty() && summary == slurp(b / "summary.csv") &&
                           slurp(a / "comparison.csv") == slurp(b / "comparison.csv");
  bool tcp_same = true;
  for (const char* file : {"summary.csv", "rounds.csv", "schedule.csv"}) {
    const std::string inproc = slurp(a / "proposed" / file);
    tcp_same = tcp_same && !inproc.empty() && inproc == slurp(tcp / file);
  }
  return {{matrix_same && tcp_same,
           format("matrix summary.csv %s across runs; tcp vs inproc proposed outputs %s",
                  matrix_same ? "byte-identical" : "DIFFERS",
                  tcp_same ? "byte-identical" : "DIFFER")},
          seconds};
}

Outcome directional_trend(double matrix_seconds) {
  int wins = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto c = experiment::desk_config();
    c.seed = seed;
    c.experiment_id = ExperimentId::kLocal;
    const double local = experiment::run_experiment(c).headline("client1").report.recall;
    c.experiment_id = ExperimentId::kProposed;
    const double fed = experiment::run_experiment(c).headline("client1").report.recall;
    if (fed > local) ++wins;
    per_seed += format(" s%llu %.1f/%.1f", static_cast<unsigned long long>(seed), 100 * fed,
                       100 * local);
  }
  return {wins >= 4 && matrix_seconds > 0.0 && matrix_seconds < 600.0,
          format("client1 recall proposed > local in %d/5 seeds (proposed/local %%:%s); full "
                 "matrix %.0f s",
                 wins, per_seed.c_str(), matrix_seconds)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string fedsten_binary;
  std::string work_dir = (fs::temp_directory_path() / "fedsten_acceptance").string();
  app.add_option("--fedsten", fedsten_binary, "Path to the fedsten executable")->required();
  app.add_option("--work", work_dir, "Scratch directory, recreated on start");
  CLI11_PARSE(app, argc, argv);

  const fs::path work = work_dir;
  fs::remove_all(work);
  fs::create_directories(work);
  const Cli cli(fedsten_binary);

  int failures = 0;
  auto report = [&](const char* name, const std::function<Outcome()>& check) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(),
                seconds_since(start));
    std::fflush(stdout);
  };

  double matrix_seconds = 0.0;
  report("aggregation-oracle", aggregation_oracle);
  report("alpha-beta-fixture", coefficient_fixture);
  report("partial-sharing-isolation", partial_sharing_isolation);
  report("fl3-ablation", fl3_ablation);
  report("schedule-conformance", [&] { return schedule_conformance(cli, work); });
  report("metric-oracle", metric_oracle);
  report("gradient-check", gradient_check);
  report("determinism", [&] {
    auto d = determinism(cli, work);
    matrix_seconds = d.matrix_seconds;
    return d.outcome;
  });
  report("directional-trend", [&] { return directional_trend(matrix_seconds); });
  return failures == 0 ? 0 : 1;
}
