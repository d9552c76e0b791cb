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

#include "fedsten/protocol/client.h"

#include <string>

#include "fedsten/common/error.h"

namespace fedsten::proto {

void FederatedClient::run() {
  try {
    serve();
  } catch (...) {
    channel_.close();
    throw;
  }
}

void FederatedClient::serve() {
  Message first = receive_message(channel_);
  auto* init = std::get_if<InitModel>(&first);
  if (init == nullptr) {
    if (std::holds_alternative<Done>(first)) return;
    throw ProtocolError(std::string("expected InitModel, got ") + type_name(type_of(first)));
  }
  trainer_.load_model(init->params);

  std::uint32_t trained_round = 0;
  std::uint32_t applied_round = 0;
  for (;;) {
    Message msg = receive_message(channel_);
    if (auto* req = std::get_if<TrainRequest>(&msg)) {
      if (req->round != trained_round + 1 || applied_round != trained_round) {
        throw ProtocolError("TrainRequest for round " + std::to_string(req->round) +
                            " out of order");
      }
      trained_round = req->round;
      const std::uint64_t n = trainer_.train(req->round, req->epochs);
      log_.push_back({req->round, req->epochs});
      send_message(channel_, WeightUpdate{req->round, client_id_, n, trainer_.shared_parameters()});
    } else if (auto* global = std::get_if<GlobalUpdate>(&msg)) {
      if (global->round != trained_round || applied_round == trained_round) {
        throw ProtocolError("GlobalUpdate for round " + std::to_string(global->round) +
                            " out of order");
      }
      applied_round = global->round;
      trainer_.apply_global(global->params);
      send_message(channel_, Metrics{metrics::compute_metrics(trainer_.evaluate(), global->round,
                                                              client_id_)});
    } else if (std::holds_alternative<Done>(msg)) {
      return;
    } else {
      throw ProtocolError(std::string("unexpected ") + type_name(type_of(msg)));
    }
  }
}

}  // namespace fedsten::proto
