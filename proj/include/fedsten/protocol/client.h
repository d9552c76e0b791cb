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

#ifndef FEDSTEN_PROTOCOL_CLIENT_H_
#define FEDSTEN_PROTOCOL_CLIENT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fedsten/metrics/detection_metrics.h"
#include "fedsten/params/named_parameter_set.h"
#include "fedsten/protocol/channel.h"

namespace fedsten::proto {

// What a federation participant must provide. Calls arrive from a single
// thread in protocol order.
class ClientTrainer {
 public:
  virtual ~ClientTrainer() = default;

  // Adopts the full initial model. Throws SchemaMismatchError when it does
  // not fit the local architecture.
  virtual void load_model(const NamedParameterSet& full) = 0;
  // Trains locally; returns the number of training examples.
  virtual std::uint64_t train(std::uint32_t round, std::uint32_t epochs) = 0;
  // The subset of parameters that leaves the client.
  virtual NamedParameterSet shared_parameters() const = 0;
  virtual void apply_global(const NamedParameterSet& global_shared) = 0;
  // Counts on the local test set.
  virtual metrics::Counts evaluate() = 0;
};

struct ClientLogEntry {
  std::uint32_t round = 0;
  std::uint32_t epochs = 0;

  friend bool operator==(const ClientLogEntry&, const ClientLogEntry&) = default;
};

// Client side of the protocol: waits for InitModel, then serves
// TrainRequest / GlobalUpdate until Done.
class FederatedClient {
 public:
  FederatedClient(std::string client_id, ClientTrainer& trainer, Channel& channel)
      : client_id_(std::move(client_id)), trainer_(trainer), channel_(channel) {}

  // Returns after Done. Throws ProtocolError / TransportError / DecodeError;
  // the channel is closed before any exception propagates.
  void run();

  const std::string& client_id() const { return client_id_; }
  // Epochs actually trained per round.
  const std::vector<ClientLogEntry>& log() const { return log_; }

 private:
  void serve();

  std::string client_id_;
  ClientTrainer& trainer_;
  Channel& channel_;
  std::vector<ClientLogEntry> log_;
};

}  // namespace fedsten::proto

#endif  // FEDSTEN_PROTOCOL_CLIENT_H_
