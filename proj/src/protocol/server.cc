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

#include "fedsten/protocol/server.h"

#include <condition_variable>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "fedsten/common/error.h"
#include "fedsten/params/serialize.h"

namespace fedsten::proto {

std::vector<metrics::RoundMetrics> FederationResult::metrics_history() const {
  std::vector<metrics::RoundMetrics> out;
  out.reserve(rounds.size());
  for (const auto& r : rounds) {
    metrics::RoundMetrics m{r.round, {}};
    for (const auto& c : r.clients) m.clients.push_back(c.metrics);
    out.push_back(std::move(m));
  }
  return out;
}

Bytes encode_result(const FederationResult& result) {
  Bytes bytes;
  ByteWriter out(bytes);
  out.put_u32(static_cast<std::uint32_t>(result.rounds.size()));
  for (const auto& r : result.rounds) {
    out.put_u32(r.round);
    serialize_into(r.global_shared, out);
    out.put_u32(static_cast<std::uint32_t>(r.clients.size()));
    for (const auto& c : r.clients) {
      out.put_string(c.client_id);
      out.put_u32(c.epochs);
      out.put_u64(c.num_examples);
      out.put_raw(encode_message(Metrics{c.metrics}));
    }
  }
  return bytes;
}

const char* phase_name(ServerPhase phase) {
  switch (phase) {
    case ServerPhase::kIdle:
      return "Idle";
    case ServerPhase::kBroadcasting:
      return "Broadcasting";
    case ServerPhase::kAwaitingUpdates:
      return "AwaitingUpdates";
    case ServerPhase::kAggregating:
      return "Aggregating";
    case ServerPhase::kAwaitingMetrics:
      return "AwaitingMetrics";
    case ServerPhase::kFinished:
      return "Finished";
  }
  return "Unknown";
}

namespace {

// Everything the connection readers and the coordinator share. Guarded by
// `mu`; the coordinator only leaves a barrier once `pending` is empty.
struct ServerState {
  std::mutex mu;
  std::condition_variable cv;
  ServerPhase phase = ServerPhase::kIdle;
  std::uint32_t round = 0;
  std::set<std::string> pending;
  std::map<std::string, WeightUpdate> updates;
  std::map<std::string, metrics::MetricsReport> reports;
  std::string error;
  bool finished = false;
};

class Federation {
 public:
  Federation(const ServerConfig& config, std::vector<ClientConnection> clients,
             ServerObserver* observer)
      : config_(config), clients_(std::move(clients)), observer_(observer) {}

  ~Federation() { shutdown(); }

  FederationResult run() {
    validate();
    expected_shared_ = agg::filter_shared(config_.initial_model, config_.plan.filter);
    for (std::size_t i = 0; i < clients_.size(); ++i) {
      readers_.emplace_back([this, i] { read_loop(i); });
    }

    notify_phase(ServerPhase::kBroadcasting, 0);
    broadcast(Message{InitModel{config_.initial_model}}, 0);

    FederationResult result;
    for (std::uint32_t r = 1; r <= config_.schedule.total_rounds; ++r) {
      result.rounds.push_back(run_round(r));
    }

    notify_phase(ServerPhase::kFinished, config_.schedule.total_rounds);
    {
      std::lock_guard lock(state_.mu);
      state_.phase = ServerPhase::kFinished;
      state_.finished = true;
    }
    broadcast(Message{Done{}}, config_.schedule.total_rounds);
    shutdown();
    return result;
  }

 private:
  void validate() const {
    if (clients_.empty()) throw InvalidArgumentError("federation needs at least one client");
    config_.plan.validate();
    std::vector<std::string> ids;
    std::set<std::string> seen;
    for (const auto& c : clients_) {
      if (!c.channel) throw InvalidArgumentError("client '" + c.client_id + "' has no channel");
      if (!seen.insert(c.client_id).second) {
        throw InvalidArgumentError("client '" + c.client_id + "' connected twice");
      }
      if (config_.plan.find(c.client_id) == nullptr) {
        throw InvalidArgumentError("client '" + c.client_id + "' is not in the aggregation plan");
      }
      ids.push_back(c.client_id);
    }
    for (const auto& w : config_.plan.weights) {
      if (!seen.contains(w.client_id)) {
        throw InvalidArgumentError("plan client '" + w.client_id + "' is not connected");
      }
    }
    config_.schedule.validate(ids);
  }

  RoundRecord run_round(std::uint32_t r) {
    RoundRecord record;
    record.round = r;
    for (const auto& c : clients_) {
      record.clients.push_back({c.client_id, epochs_for(config_.schedule, r, c.client_id), 0, {}});
    }

    arm(ServerPhase::kAwaitingUpdates, r);
    notify_phase(ServerPhase::kBroadcasting, r);
    for (std::size_t i = 0; i < clients_.size(); ++i) {
      send_to(i, Message{TrainRequest{r, record.clients[i].epochs}}, r);
    }
    notify_phase(ServerPhase::kAwaitingUpdates, r);
    wait_barrier();

    std::vector<agg::ClientUpdate> updates;
    {
      std::lock_guard lock(state_.mu);
      state_.phase = ServerPhase::kAggregating;
      for (std::size_t i = 0; i < clients_.size(); ++i) {
        auto& u = state_.updates.at(clients_[i].client_id);
        record.clients[i].num_examples = u.num_examples;
        updates.emplace_back(u.client_id, std::move(u.params));
      }
      state_.updates.clear();
    }
    notify_phase(ServerPhase::kAggregating, r);
    record.global_shared = agg::fedavg(updates, config_.plan);

    arm(ServerPhase::kAwaitingMetrics, r);
    notify_phase(ServerPhase::kBroadcasting, r);
    broadcast(Message{GlobalUpdate{r, record.global_shared}}, r);
    notify_phase(ServerPhase::kAwaitingMetrics, r);
    wait_barrier();
    {
      std::lock_guard lock(state_.mu);
      for (std::size_t i = 0; i < clients_.size(); ++i) {
        record.clients[i].metrics = state_.reports.at(clients_[i].client_id);
      }
      state_.reports.clear();
    }
    return record;
  }

  // Opens a barrier before the triggering messages go out, so replies that
  // race ahead of the coordinator are never mistaken for early messages.
  void arm(ServerPhase phase, std::uint32_t r) {
    std::lock_guard lock(state_.mu);
    state_.phase = phase;
    state_.round = r;
    state_.pending.clear();
    for (const auto& c : clients_) state_.pending.insert(c.client_id);
  }

  void wait_barrier() {
    std::unique_lock lock(state_.mu);
    state_.cv.wait(lock, [&] { return state_.pending.empty() || !state_.error.empty(); });
    if (!state_.error.empty()) throw FederationError(state_.error);
  }

  void broadcast(const Message& msg, std::uint32_t r) {
    const Bytes frame = encode_message(msg);
    for (std::size_t i = 0; i < clients_.size(); ++i) send_frame(i, frame, type_of(msg), r);
  }

  void send_to(std::size_t i, const Message& msg, std::uint32_t r) {
    send_frame(i, encode_message(msg), type_of(msg), r);
  }

  void send_frame(std::size_t i, const Bytes& frame, MessageType type, std::uint32_t r) {
    try {
      clients_[i].channel->send(frame);
    } catch (const Error& e) {
      std::string what;
      {
        std::lock_guard lock(state_.mu);
        what = state_.error;
      }
      if (what.empty()) {
        what = "round " + std::to_string(r) + ": sending " + type_name(type) + " to client '" +
               clients_[i].client_id + "' failed: " + e.what();
      }
      throw FederationError(what);
    }
  }

  void read_loop(std::size_t i) {
    const std::string& id = clients_[i].client_id;
    for (;;) {
      Message msg;
      try {
        msg = receive_message(*clients_[i].channel);
      } catch (const Error& e) {
        std::lock_guard lock(state_.mu);
        if (!state_.finished) {
          const bool closed = dynamic_cast<const TransportError*>(&e) != nullptr;
          fail("round " + std::to_string(state_.round) + ": client '" + id + "' " +
               (closed ? "disconnected: " : "sent a malformed frame: ") + e.what());
        }
        return;
      }
      std::lock_guard lock(state_.mu);
      if (state_.finished || !state_.error.empty()) return;
      try {
        handle(id, std::move(msg));
      } catch (const Error& e) {
        fail("round " + std::to_string(state_.round) + ": client '" + id + "': " + e.what());
        return;
      }
    }
  }

  // Called with state_.mu held.
  void handle(const std::string& id, Message msg) {
    if (auto* u = std::get_if<WeightUpdate>(&msg)) {
      if (state_.phase != ServerPhase::kAwaitingUpdates || u->round != state_.round ||
          !state_.pending.contains(id)) {
        throw ProtocolError("unexpected WeightUpdate for round " + std::to_string(u->round));
      }
      if (u->client_id != id) {
        throw ProtocolError("WeightUpdate claims client id '" + u->client_id + "'");
      }
      require_same_schema(expected_shared_, u->params);
      state_.updates.emplace(id, std::move(*u));
      state_.pending.erase(id);
      if (observer_ != nullptr) observer_->on_update(id, state_.round, state_.pending);
    } else if (auto* m = std::get_if<Metrics>(&msg)) {
      if (state_.phase != ServerPhase::kAwaitingMetrics || m->report.round != state_.round ||
          !state_.pending.contains(id)) {
        throw ProtocolError("unexpected Metrics for round " + std::to_string(m->report.round));
      }
      if (m->report.client_id != id) {
        throw ProtocolError("Metrics claims client id '" + m->report.client_id + "'");
      }
      state_.reports.emplace(id, std::move(m->report));
      state_.pending.erase(id);
    } else {
      throw ProtocolError(std::string("unexpected ") + type_name(type_of(msg)) +
                          " from client");
    }
    if (state_.pending.empty()) state_.cv.notify_all();
  }

  // Called with state_.mu held. Keeps the first failure only.
  void fail(std::string what) {
    if (state_.error.empty()) state_.error = std::move(what);
    state_.cv.notify_all();
  }

  void notify_phase(ServerPhase phase, std::uint32_t r) {
    if (observer_ != nullptr) observer_->on_phase(phase, r);
  }

  void shutdown() {
    {
      std::lock_guard lock(state_.mu);
      state_.finished = true;
    }
    for (auto& c : clients_) {
      if (c.channel) c.channel->close();
    }
    for (auto& t : readers_) {
      if (t.joinable()) t.join();
    }
    readers_.clear();
  }

  const ServerConfig& config_;
  std::vector<ClientConnection> clients_;
  ServerObserver* observer_;
  NamedParameterSet expected_shared_;
  ServerState state_;
  std::vector<std::thread> readers_;
};

}  // namespace

FederationResult run_federation(const ServerConfig& config, std::vector<ClientConnection> clients,
                                ServerObserver* observer) {
  Federation federation(config, std::move(clients), observer);
  return federation.run();
}

}  // namespace fedsten::proto
