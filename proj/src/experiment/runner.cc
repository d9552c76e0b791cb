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

#include "fedsten/experiment/runner.h"

#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include "fedsten/common/error.h"
#include "fedsten/common/rng.h"
#include "fedsten/protocol/channel.h"
#include "fedsten/protocol/tcp.h"

namespace fedsten::experiment {

namespace {

metrics::MetricsReport evaluate_report(const detector::ToyDetector& model,
                                       const data::SplitDataset& dataset,
                                       const ExperimentConfig& config, std::uint32_t round) {
  return metrics::compute_metrics(
      detector::evaluate_counts(model, dataset.test, config.confidence_threshold,
                                config.iou_threshold),
      round, dataset.client_id);
}

const metrics::MetricsReport& report_at(const std::vector<metrics::RoundMetrics>& history,
                                        std::uint32_t round, const std::string& client_id) {
  for (const auto& rm : history) {
    if (rm.round != round) continue;
    for (const auto& r : rm.clients) {
      if (r.client_id == client_id) return r;
    }
  }
  throw InvalidArgumentError("no report for client '" + client_id + "' in round " +
                             std::to_string(round));
}

void add_per_client_rows(ExperimentResult& result, const std::vector<std::string>& ids) {
  const auto best = metrics::best_round_per_client(result.history);
  for (const auto& id : ids) {
    result.summary.push_back(
        {experiment_name(result.experiment_id), kPerClient, report_at(result.history, best.at(id), id)});
  }
}

ExperimentResult run_local(const ExperimentConfig& config,
                           const std::vector<data::SplitDataset>& datasets) {
  ExperimentResult result;
  result.experiment_id = ExperimentId::kLocal;
  const auto init = detector::init_parameters(config.detector, component_seed(config.seed, "init"));
  const auto ids = config.client_ids();
  std::uint32_t max_epochs = 0;
  for (const auto& id : ids) max_epochs = std::max(max_epochs, config.local_epochs.at(id));
  result.history.resize(max_epochs);
  for (std::uint32_t e = 0; e < max_epochs; ++e) result.history[e].round = e + 1;

  for (std::size_t c = 0; c < ids.size(); ++c) {
    const auto& id = ids[c];
    detector::TrainerState state(detector::ToyDetector(config.detector, init),
                                 component_seed(config.seed, "train/" + id));
    const std::uint32_t epochs = config.local_epochs.at(id);
    for (std::uint32_t e = 1; e <= epochs; ++e) {
      detector::train_epochs(state, datasets[c].train, 1, config.training);
      result.history[e - 1].clients.push_back(
          evaluate_report(state.model(), datasets[c], config, e));
      result.schedule_log.push_back({e, id, 1, datasets[c].train.size()});
    }
  }
  add_per_client_rows(result, ids);
  return result;
}

// Client threads plus the server on the calling thread.
ExperimentResult run_federated(const ExperimentConfig& config,
                               const std::vector<data::SplitDataset>& datasets,
                               ClientObserver* observer) {
  const auto ids = config.client_ids();
  proto::ServerConfig server_config;
  server_config.initial_model =
      detector::init_parameters(config.detector, component_seed(config.seed, "init"));
  server_config.plan = config.plan();
  server_config.schedule = config.schedule;

  std::vector<std::unique_ptr<DetectorClient>> trainers;
  for (std::size_t c = 0; c < ids.size(); ++c) {
    trainers.push_back(std::make_unique<DetectorClient>(ids[c], datasets[c], config,
                                                        server_config.plan.filter, observer));
  }

  std::vector<std::unique_ptr<proto::Channel>> client_channels;
  std::vector<proto::ClientConnection> connections;
  std::unique_ptr<proto::TcpListener> listener;
  if (config.transport == Transport::kTcp) {
    listener = std::make_unique<proto::TcpListener>(proto::parse_endpoint(config.listen));
    proto::Endpoint target = proto::parse_endpoint(config.listen);
    if (target.host == "0.0.0.0") target.host = "127.0.0.1";
    target.port = listener->port();
    // Sequential connect/accept pairs bind ids in profile order.
    for (const auto& id : ids) {
      client_channels.push_back(proto::tcp_connect(target));
      connections.push_back({id, listener->accept()});
    }
  } else {
    for (const auto& id : ids) {
      auto [server_end, client_end] = proto::make_inproc_pair();
      connections.push_back({id, std::move(server_end)});
      client_channels.push_back(std::move(client_end));
    }
  }

  std::vector<std::unique_ptr<proto::FederatedClient>> clients;
  std::vector<std::exception_ptr> client_errors(ids.size());
  std::vector<std::thread> threads;
  for (std::size_t c = 0; c < ids.size(); ++c) {
    clients.push_back(
        std::make_unique<proto::FederatedClient>(ids[c], *trainers[c], *client_channels[c]));
  }
  for (std::size_t c = 0; c < ids.size(); ++c) {
    threads.emplace_back([&, c] {
      try {
        clients[c]->run();
      } catch (...) {
        client_errors[c] = std::current_exception();
      }
    });
  }

  ExperimentResult result;
  result.experiment_id = config.experiment_id;
  std::exception_ptr server_error;
  try {
    result.federation = proto::run_federation(server_config, std::move(connections));
  } catch (...) {
    server_error = std::current_exception();
  }
  for (auto& t : threads) t.join();
  // The server's error names the round and client; a client error is only
  // reported when the server completed.
  if (server_error) std::rethrow_exception(server_error);
  for (auto& e : client_errors) {
    if (e) std::rethrow_exception(e);
  }

  result.history = result.federation.metrics_history();
  for (const auto& record : result.federation.rounds) {
    for (const auto& log : record.clients) {
      result.schedule_log.push_back({record.round, log.client_id, 0, log.num_examples});
    }
  }
  // Epochs as actually trained by each client.
  for (std::size_t c = 0; c < ids.size(); ++c) {
    for (const auto& entry : clients[c]->log()) {
      for (auto& row : result.schedule_log) {
        if (row.round == entry.round && row.client_id == ids[c]) row.epochs = entry.epochs;
      }
    }
  }

  const std::uint32_t best = metrics::select_best_round(result.history);
  for (const auto& id : ids) {
    result.summary.push_back({experiment_name(config.experiment_id), kCrossClientMean,
                              report_at(result.history, best, id)});
  }
  add_per_client_rows(result, ids);
  return result;
}

std::string signed_points(double points) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.2f", points);
  std::string s = buf;
  return s == "-0.00" ? "+0.00" : s;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Error("cannot write " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::string align(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (width.size() < r.size()) width.resize(r.size(), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::ostringstream os;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t i = 0; i < rows[k].size(); ++i) {
      if (i > 0) os << "  ";
      os << rows[k][i];
      if (i + 1 < rows[k].size()) os << std::string(width[i] - rows[k][i].size(), ' ');
    }
    os << '\n';
    if (k == 0) {
      std::size_t total = 0;
      for (std::size_t i = 0; i < width.size(); ++i) total += width[i] + (i > 0 ? 2 : 0);
      os << std::string(total, '-') << '\n';
    }
  }
  return os.str();
}

}  // namespace

std::uint64_t component_seed(std::uint64_t root, const std::string& label) {
  return derive_seed(root, label);
}

std::vector<data::SplitDataset> make_datasets(const ExperimentConfig& config) {
  std::vector<data::SplitDataset> out;
  for (const auto& p : config.profiles) {
    out.push_back(data::generate(p, component_seed(config.seed, "data/" + p.client_id)));
  }
  return out;
}

DetectorClient::DetectorClient(std::string client_id, const data::SplitDataset& dataset,
                               const ExperimentConfig& config, agg::FilterRule filter,
                               ClientObserver* observer)
    : client_id_(std::move(client_id)),
      dataset_(dataset),
      config_(config),
      filter_(std::move(filter)),
      observer_(observer) {}

void DetectorClient::load_model(const NamedParameterSet& full) {
  state_.emplace(detector::ToyDetector(config_.detector, full),
                 component_seed(config_.seed, "train/" + client_id_));
}

std::uint64_t DetectorClient::train(std::uint32_t round, std::uint32_t epochs) {
  detector::train_epochs(state(), dataset_.train, epochs, config_.training);
  last_round_ = round;
  return dataset_.train.size();
}

NamedParameterSet DetectorClient::shared_parameters() const {
  return agg::filter_shared(state().model().parameters(), filter_);
}

void DetectorClient::apply_global(const NamedParameterSet& global_shared) {
  auto& model = state().model();
  NamedParameterSet after = agg::apply_global(model.parameters(), global_shared);
  if (observer_ != nullptr) {
    observer_->on_global_applied(client_id_, last_round_, model.parameters(), after);
  }
  model.set_parameters(std::move(after));
}

metrics::Counts DetectorClient::evaluate() {
  return detector::evaluate_counts(state().model(), dataset_.test, config_.confidence_threshold,
                                   config_.iou_threshold);
}

const NamedParameterSet& DetectorClient::parameters() const { return state().model().parameters(); }

detector::TrainerState& DetectorClient::state() {
  if (!state_) throw ProtocolError("client '" + client_id_ + "' has no model yet");
  return *state_;
}

const detector::TrainerState& DetectorClient::state() const {
  if (!state_) throw ProtocolError("client '" + client_id_ + "' has no model yet");
  return *state_;
}

const SummaryRow& ExperimentResult::headline(const std::string& client_id) const {
  const char* rule = is_federated(experiment_id) ? kCrossClientMean : kPerClient;
  for (const auto& row : summary) {
    if (row.selection == rule && row.report.client_id == client_id) return row;
  }
  throw InvalidArgumentError("no summary row for client '" + client_id + "'");
}

ExperimentResult run_experiment(const ExperimentConfig& config, ClientObserver* observer) {
  config.validate();
  const auto datasets = make_datasets(config);
  if (!is_federated(config.experiment_id)) return run_local(config, datasets);
  return run_federated(config, datasets, observer);
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "experiment,client_id,selection,round,precision,recall,f1,tp,fp,fn\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    os << row.experiment << ',' << r.client_id << ',' << row.selection << ',' << r.round << ','
       << metrics::percent(r.precision) << ',' << metrics::percent(r.recall) << ','
       << metrics::percent(r.f1) << ',' << r.counts.tp << ',' << r.counts.fp << ','
       << r.counts.fn << '\n';
  }
}

void write_experiment(const ExperimentConfig& config, const ExperimentResult& result,
                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream rounds;
  metrics::write_metrics_csv_header(rounds);
  for (const auto& rm : result.history) {
    for (const auto& r : rm.clients) metrics::write_metrics_csv_row(rounds, r);
  }
  write_file(dir / "rounds.csv", rounds.str());

  std::ostringstream schedule;
  schedule << "round,client_id,epochs,num_examples\n";
  for (const auto& row : result.schedule_log) {
    schedule << row.round << ',' << row.client_id << ',' << row.epochs << ',' << row.num_examples
             << '\n';
  }
  write_file(dir / "schedule.csv", schedule.str());

  std::ostringstream summary;
  write_summary_csv(summary, result.summary);
  write_file(dir / "summary.csv", summary.str());

  ExperimentConfig resolved = config;
  resolved.experiment_id = result.experiment_id;
  write_file(dir / "config.lock.json", to_json(resolved));
}

std::vector<ComparisonRow> compare(const std::vector<ExperimentResult>& results) {
  const ExperimentResult* local = nullptr;
  for (const auto& r : results) {
    if (r.experiment_id == ExperimentId::kLocal) local = &r;
  }
  if (local == nullptr) throw InvalidArgumentError("comparison needs a local result");
  std::vector<ComparisonRow> rows;
  for (const auto& r : results) {
    if (!is_federated(r.experiment_id)) continue;
    for (const auto& row : r.summary) {
      if (row.selection != kCrossClientMean) continue;
      const auto& base = local->headline(row.report.client_id).report;
      rows.push_back({experiment_name(r.experiment_id), row.report.client_id, row.report,
                      (row.report.precision - base.precision) * 100.0,
                      (row.report.recall - base.recall) * 100.0,
                      (row.report.f1 - base.f1) * 100.0});
    }
  }
  return rows;
}

void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows) {
  os << "experiment,client_id,round,precision,recall,f1,delta_precision_pp,delta_recall_pp,"
        "delta_f1_pp\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    os << row.experiment << ',' << row.client_id << ',' << r.round << ','
       << metrics::percent(r.precision) << ',' << metrics::percent(r.recall) << ','
       << metrics::percent(r.f1) << ',' << signed_points(row.delta_precision) << ','
       << signed_points(row.delta_recall) << ',' << signed_points(row.delta_f1) << '\n';
  }
}

MatrixResult run_matrix(const ExperimentConfig& base, const std::filesystem::path& out) {
  MatrixResult matrix;
  std::vector<SummaryRow> all_rows;
  for (ExperimentId id : all_experiments()) {
    ExperimentConfig config = base;
    config.experiment_id = id;
    auto result = run_experiment(config);
    write_experiment(config, result, out / experiment_name(id));
    all_rows.insert(all_rows.end(), result.summary.begin(), result.summary.end());
    matrix.results.push_back(std::move(result));
  }
  matrix.comparison = compare(matrix.results);

  std::ostringstream summary, comparison;
  write_summary_csv(summary, all_rows);
  write_comparison_csv(comparison, matrix.comparison);
  write_file(out / "summary.csv", summary.str());
  write_file(out / "comparison.csv", comparison.str());
  return matrix;
}

std::string render_report(const std::filesystem::path& dir) {
  const auto comparison = dir / "comparison.csv";
  if (std::filesystem::exists(comparison)) return align(parse_csv(read_file(comparison)));
  const auto summary = dir / "summary.csv";
  if (std::filesystem::exists(summary)) return align(parse_csv(read_file(summary)));
  throw Error("no comparison.csv or summary.csv in " + dir.string());
}

}  // namespace fedsten::experiment
