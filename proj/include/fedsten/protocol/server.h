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

#ifndef FEDSTEN_PROTOCOL_SERVER_H_
#define FEDSTEN_PROTOCOL_SERVER_H_

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "fedsten/aggregation/fedavg.h"
#include "fedsten/metrics/detection_metrics.h"
#include "fedsten/params/named_parameter_set.h"
#include "fedsten/protocol/channel.h"
#include "fedsten/protocol/schedule.h"

namespace fedsten::proto {

struct ServerConfig {
  // Full model broadcast in InitModel.
  NamedParameterSet initial_model;
  agg::AggregationPlan plan;
  RoundSchedule schedule;
};

// A connected client. The id is bound by the caller (for TCP, in accept
// order) and every WeightUpdate/Metrics on this channel must carry it.
struct ClientConnection {
  std::string client_id;
  std::unique_ptr<Channel> channel;
};

struct ClientRoundLog {
  std::string client_id;
  std::uint32_t epochs = 0;
  std::uint64_t num_examples = 0;
  metrics::MetricsReport metrics;

  friend bool operator==(const ClientRoundLog&, const ClientRoundLog&) = default;
};

struct RoundRecord {
  std::uint32_t round = 0;
  // Aggregate broadcast in GlobalUpdate(round).
  NamedParameterSet global_shared;
  // Connection order.
  std::vector<ClientRoundLog> clients;

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

struct FederationResult {
  std::vector<RoundRecord> rounds;

  std::vector<metrics::RoundMetrics> metrics_history() const;
  friend bool operator==(const FederationResult&, const FederationResult&) = default;
};

// Canonical byte encoding of a result, for byte-level comparisons.
Bytes encode_result(const FederationResult& result);

enum class ServerPhase {
  kIdle,
  kBroadcasting,
  kAwaitingUpdates,
  kAggregating,
  kAwaitingMetrics,
  kFinished,
};

const char* phase_name(ServerPhase phase);

// Test and logging hook. Callbacks run on server threads; on_update runs
// under the state lock, on_phase on the coordinating thread.
class ServerObserver {
 public:
  virtual ~ServerObserver() = default;
  virtual void on_phase(ServerPhase /*phase*/, std::uint32_t /*round*/) {}
  virtual void on_update(const std::string& /*client_id*/, std::uint32_t /*round*/,
                         const std::set<std::string>& /*still_pending*/) {}
};

// Runs the synchronous protocol to completion:
//
//   InitModel -> for each round r:
//     TrainRequest(r) -> barrier on WeightUpdate(r) from every client ->
//     fedavg -> GlobalUpdate(r) -> barrier on Metrics(r)
//   -> Done
//
// Each connection is read on its own thread. Any disconnect, decode error,
// schema mismatch or out-of-order message aborts the whole run with a
// FederationError naming the round and client; all channels are closed on
// return either way.
FederationResult run_federation(const ServerConfig& config,
                                std::vector<ClientConnection> clients,
                                ServerObserver* observer = nullptr);

}  // namespace fedsten::proto

#endif  // FEDSTEN_PROTOCOL_SERVER_H_
