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

#ifndef FEDSTEN_EXPERIMENT_CONFIG_H_
#define FEDSTEN_EXPERIMENT_CONFIG_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fedsten/aggregation/fedavg.h"
#include "fedsten/data/synth.h"
#include "fedsten/detector/toy_detector.h"
#include "fedsten/detector/trainer.h"
#include "fedsten/protocol/schedule.h"

namespace fedsten::experiment {

enum class ExperimentId { kLocal, kFl1, kFl2, kFl3, kProposed };

// "local", "fl1", "fl2", "fl3", "proposed".
const char* experiment_name(ExperimentId id);
// Throws InvalidArgumentError for an unknown name.
ExperimentId parse_experiment_id(const std::string& name);
// Matrix order: local first, then fl1, fl2, fl3, proposed.
const std::vector<ExperimentId>& all_experiments();
bool is_federated(ExperimentId id);

enum class Transport { kInProcess, kTcp };

const char* transport_name(Transport transport);
Transport parse_transport(const std::string& name);

// Aggregation plan of a federated experiment. The first client gets the
// small-client coefficient (1), the second the large-client coefficient
// (6, or 1 for fl2):
//
//   proposed  include "backbone."                       1 : 6
//   fl1       full model                                1 : 6
//   fl2       include "backbone."                       1 : 1
//   fl3       include "backbone.", exclude statistics   1 : 6
//
// Throws InvalidArgumentError for kLocal or a client count other than two.
agg::AggregationPlan builtin_plan(ExperimentId id, const std::vector<std::string>& client_ids);

struct ExperimentConfig {
  ExperimentId experiment_id = ExperimentId::kProposed;
  std::uint64_t seed = 0;
  // Client order is significant: it fixes plan coefficients and TCP
  // connection order.
  std::vector<data::ClientProfile> profiles;
  // Active for federated experiments.
  proto::RoundSchedule schedule;
  // Active for kLocal: epochs per client id.
  std::map<std::string, std::uint32_t> local_epochs;
  detector::ToyDetectorConfig detector;
  detector::TrainOptions training;
  double confidence_threshold = 0.5;
  double iou_threshold = 0.5;
  Transport transport = Transport::kInProcess;
  // TCP listen address; port 0 picks an ephemeral port.
  std::string listen = "127.0.0.1:0";

  std::vector<std::string> client_ids() const;
  // The built-in plan for federated experiments.
  agg::AggregationPlan plan() const;
  // Throws InvalidArgumentError describing the first violated constraint.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Desk-scale defaults: 20 rounds, 5/1 epochs per round, 10/4 warm-up,
// 50/10 local epochs.
ExperimentConfig desk_config();
// Overwrites rounds, epochs, learning rate and batch size with the
// published protocol: 20 rounds, 20/4 epochs, 40/16 warm-up, local 200/50,
// Adam lr 1e-4, batch 16.
void apply_paper_schedule(ExperimentConfig& config);

// JSON text of the fully resolved config, including the derived plan.
std::string to_json(const ExperimentConfig& config);
// Missing keys keep their desk_config() values. Unknown keys, a "plan" that
// differs from the built-in one, or a config failing validate() throw
// InvalidArgumentError.
ExperimentConfig from_json(const std::string& text);

}  // namespace fedsten::experiment

#endif  // FEDSTEN_EXPERIMENT_CONFIG_H_
