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

#ifndef FEDSTEN_EXPERIMENT_RUNNER_H_
#define FEDSTEN_EXPERIMENT_RUNNER_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fedsten/data/synth.h"
#include "fedsten/detector/trainer.h"
#include "fedsten/experiment/config.h"
#include "fedsten/metrics/detection_metrics.h"
#include "fedsten/protocol/client.h"
#include "fedsten/protocol/server.h"

namespace fedsten::experiment {

// Seed streams derived from the root seed with derive_seed():
//   "data/<client_id>"   synthetic dataset of that client
//   "init"               shared initial model
//   "train/<client_id>"  shuffling and flips of that client's trainer
std::uint64_t component_seed(std::uint64_t root, const std::string& label);

// One dataset per profile, in profile order.
std::vector<data::SplitDataset> make_datasets(const ExperimentConfig& config);

// Sees every GlobalUpdate a client applies. Called from client threads,
// possibly concurrently; implementations must synchronize.
class ClientObserver {
 public:
  virtual ~ClientObserver() = default;
  virtual void on_global_applied(const std::string& client_id, std::uint32_t round,
                                 const NamedParameterSet& before,
                                 const NamedParameterSet& after) = 0;
};

// ClientTrainer backed by the toy detector. Optimizer moments persist
// across rounds.
class DetectorClient : public proto::ClientTrainer {
 public:
  DetectorClient(std::string client_id, const data::SplitDataset& dataset,
                 const ExperimentConfig& config, agg::FilterRule filter,
                 ClientObserver* observer = nullptr);

  void load_model(const NamedParameterSet& full) override;
  std::uint64_t train(std::uint32_t round, std::uint32_t epochs) override;
  NamedParameterSet shared_parameters() const override;
  void apply_global(const NamedParameterSet& global_shared) override;
  metrics::Counts evaluate() override;

  // Throws ProtocolError before load_model().
  const NamedParameterSet& parameters() const;

 private:
  detector::TrainerState& state();
  const detector::TrainerState& state() const;

  std::string client_id_;
  const data::SplitDataset& dataset_;
  const ExperimentConfig& config_;
  agg::FilterRule filter_;
  ClientObserver* observer_;
  std::optional<detector::TrainerState> state_;
  std::uint32_t last_round_ = 0;
};

struct ScheduleRow {
  std::uint32_t round = 0;
  std::string client_id;
  std::uint32_t epochs = 0;
  std::uint64_t num_examples = 0;

  friend bool operator==(const ScheduleRow&, const ScheduleRow&) = default;
};

// Selection rules for summary rows.
inline constexpr const char* kCrossClientMean = "cross_client_mean";
inline constexpr const char* kPerClient = "per_client";

struct SummaryRow {
  std::string experiment;
  std::string selection;
  // report.round is the selected round (epoch for local runs).
  metrics::MetricsReport report;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

struct ExperimentResult {
  ExperimentId experiment_id = ExperimentId::kProposed;
  // Federated runs: one entry per round. Local runs: one entry per epoch,
  // with clients that trained fewer epochs absent from later entries.
  std::vector<metrics::RoundMetrics> history;
  std::vector<ScheduleRow> schedule_log;
  // Federated runs: cross_client_mean rows then per_client rows, in client
  // order. Local runs: per_client rows only.
  std::vector<SummaryRow> summary;
  // Empty for local runs.
  proto::FederationResult federation;

  // The row that enters comparisons for this client.
  const SummaryRow& headline(const std::string& client_id) const;
};

// Runs one experiment. Local runs train each client alone and evaluate
// after every epoch; federated runs start a server and one thread per
// client over the configured transport.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                ClientObserver* observer = nullptr);

// rounds.csv, schedule.csv, summary.csv and config.lock.json in `dir`,
// which is created if needed.
void write_experiment(const ExperimentConfig& config, const ExperimentResult& result,
                      const std::filesystem::path& dir);

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);

struct ComparisonRow {
  std::string experiment;
  std::string client_id;
  metrics::MetricsReport report;
  // FL minus local, in percentage points.
  double delta_precision = 0.0;
  double delta_recall = 0.0;
  double delta_f1 = 0.0;
};

struct MatrixResult {
  std::vector<ExperimentResult> results;
  std::vector<ComparisonRow> comparison;
};

// Headline rows of every federated result against the local result.
std::vector<ComparisonRow> compare(const std::vector<ExperimentResult>& results);

void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows);

// Every experiment of the matrix with `base`'s settings. Writes
// <out>/<experiment>/..., <out>/summary.csv and <out>/comparison.csv.
MatrixResult run_matrix(const ExperimentConfig& base, const std::filesystem::path& out);

// Renders <dir>/comparison.csv (a matrix directory) or <dir>/summary.csv
// (a single run) as an aligned text table.
std::string render_report(const std::filesystem::path& dir);

}  // namespace fedsten::experiment

#endif  // FEDSTEN_EXPERIMENT_RUNNER_H_
