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

#include <algorithm>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "fedsten/aggregation/fedavg.h"
#include "fedsten/common/error.h"
#include "fedsten/protocol/channel.h"
#include "fedsten/protocol/client.h"
#include "fedsten/protocol/schedule.h"
#include "fedsten/protocol/server.h"
#include "fedsten/protocol/tcp.h"
#include "fedsten/protocol/wire.h"

namespace fedsten::proto {
namespace {

// Shared, ordered record of trainer calls across client threads.
class EventLog {
 public:
  void add(std::string e) {
    std::lock_guard lock(mu_);
    events_.push_back(std::move(e));
  }
  std::vector<std::string> events() const {
    std::lock_guard lock(mu_);
    return events_;
  }

 private:
  mutable std::mutex mu_;
  std::vector<std::string> events_;
};

NamedParameterSet small_model() {
  NamedParameterSet s;
  s.add("backbone.w", Role::kTrainable, Tensor({3}, {1, 2, 3}));
  s.add("backbone.norm.running_mean", Role::kStatistic, Tensor({1}, {0.5f}));
  s.add("head.w", Role::kTrainable, Tensor({2}, {-1, 1}));
  return s;
}

agg::FilterRule backbone_only() {
  agg::FilterRule f;
  f.include_prefixes = {"backbone."};
  return f;
}

// Adds `step * epochs` to every element on train(); reports round-based
// counts on evaluate().
class FakeTrainer : public ClientTrainer {
 public:
  FakeTrainer(std::string id, float step, agg::FilterRule filter, EventLog* log = nullptr)
      : id_(std::move(id)), step_(step), filter_(std::move(filter)), log_(log) {}

  void load_model(const NamedParameterSet& full) override {
    params_ = full;
    loaded_ = true;
  }
  std::uint64_t train(std::uint32_t round, std::uint32_t epochs) override {
    if (log_ != nullptr) log_->add("train " + id_ + " " + std::to_string(round));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      for (auto& v : params_.mutable_tensor(i).mutable_data()) v += step_ * epochs;
    }
    last_round_ = round;
    return 10 + id_.size();
  }
  NamedParameterSet shared_parameters() const override {
    return agg::filter_shared(params_, filter_);
  }
  void apply_global(const NamedParameterSet& global) override {
    if (log_ != nullptr) log_->add("apply " + id_ + " " + std::to_string(last_round_));
    params_ = agg::apply_global(params_, global);
    globals_.push_back(global);
  }
  metrics::Counts evaluate() override { return {last_round_, 1, 2}; }

  const NamedParameterSet& params() const { return params_; }
  const std::vector<NamedParameterSet>& globals() const { return globals_; }
  bool loaded() const { return loaded_; }

 protected:
  std::string id_;
  float step_;
  agg::FilterRule filter_;
  EventLog* log_;
  NamedParameterSet params_;
  std::vector<NamedParameterSet> globals_;
  std::uint32_t last_round_ = 0;
  bool loaded_ = false;
};

RoundSchedule schedule_for(const std::vector<std::string>& ids, std::uint32_t rounds,
                           std::uint32_t warmup = 2, std::uint32_t regular = 1) {
  RoundSchedule s;
  s.total_rounds = rounds;
  for (const auto& id : ids) {
    s.warmup_epochs[id] = warmup;
    s.epochs_per_round[id] = regular;
  }
  return s;
}

ServerConfig server_config(const std::vector<std::string>& ids, std::vector<double> coefficients,
                           std::uint32_t rounds, agg::FilterRule filter = backbone_only()) {
  ServerConfig c;
  c.initial_model = small_model();
  for (std::size_t i = 0; i < ids.size(); ++i) c.plan.weights.push_back({ids[i], coefficients[i]});
  c.plan.filter = std::move(filter);
  c.schedule = schedule_for(ids, rounds);
  return c;
}

enum class Link { kInProcess, kTcp };

struct RunOutcome {
  FederationResult result;
  std::string server_error;
  std::vector<std::string> client_errors;
  std::vector<std::vector<ClientLogEntry>> client_logs;
};

// Runs the server on this thread and one FederatedClient thread per
// trainer. Errors are captured instead of propagated.
RunOutcome run(const ServerConfig& config, const std::vector<std::string>& ids,
               const std::vector<ClientTrainer*>& trainers, Link link = Link::kInProcess,
               ServerObserver* observer = nullptr) {
  std::vector<std::unique_ptr<Channel>> client_ends;
  std::vector<ClientConnection> connections;
  std::unique_ptr<TcpListener> listener;
  if (link == Link::kTcp) {
    listener = std::make_unique<TcpListener>(Endpoint{"127.0.0.1", 0});
    for (const auto& id : ids) {
      client_ends.push_back(tcp_connect({"127.0.0.1", listener->port()}));
      connections.push_back({id, listener->accept()});
    }
  } else {
    for (const auto& id : ids) {
      auto [server_end, client_end] = make_inproc_pair();
      connections.push_back({id, std::move(server_end)});
      client_ends.push_back(std::move(client_end));
    }
  }
  RunOutcome out;
  out.client_errors.resize(ids.size());
  out.client_logs.resize(ids.size());
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    threads.emplace_back([&, i] {
      FederatedClient client(ids[i], *trainers[i], *client_ends[i]);
      try {
        client.run();
      } catch (const std::exception& e) {
        out.client_errors[i] = e.what();
      }
      out.client_logs[i] = client.log();
    });
  }
  try {
    out.result = run_federation(config, std::move(connections), observer);
  } catch (const FederationError& e) {
    out.server_error = e.what();
  }
  for (auto& t : threads) t.join();
  return out;
}

TEST(ScheduleTest, PublishedSchedule) {
  RoundSchedule s;
  s.total_rounds = 20;
  s.warmup_epochs = {{"client1", 40}, {"client2", 16}};
  s.epochs_per_round = {{"client1", 20}, {"client2", 4}};
  EXPECT_EQ(epochs_for(s, 1, "client1"), 40u);
  EXPECT_EQ(epochs_for(s, 1, "client2"), 16u);
  EXPECT_EQ(epochs_for(s, 2, "client2"), 4u);
  EXPECT_EQ(epochs_for(s, 20, "client1"), 20u);
  EXPECT_THROW(epochs_for(s, 0, "client1"), InvalidArgumentError);
  EXPECT_THROW(epochs_for(s, 21, "client1"), InvalidArgumentError);
  EXPECT_THROW(epochs_for(s, 1, "client3"), InvalidArgumentError);
}

TEST(ScheduleTest, WarmupEqualToRegularIsFlat) {
  const auto s = schedule_for({"a"}, 5, 3, 3);
  for (std::uint32_t r = 1; r <= 5; ++r) EXPECT_EQ(epochs_for(s, r, "a"), 3u);
}

TEST(ScheduleTest, Validation) {
  EXPECT_NO_THROW(schedule_for({"a", "b"}, 2).validate({"a", "b"}));
  EXPECT_THROW(schedule_for({"a"}, 2).validate({"a", "b"}), InvalidArgumentError);
  EXPECT_THROW(schedule_for({"a"}, 0).validate({"a"}), InvalidArgumentError);
  EXPECT_THROW(schedule_for({"a"}, 2, 0, 1).validate({"a"}), InvalidArgumentError);
  EXPECT_THROW(schedule_for({"a"}, 2, 1, 0).validate({"a"}), InvalidArgumentError);
}

TEST(InProcChannelTest, DeliversInOrderThenReportsClose) {
  auto [a, b] = make_inproc_pair();
  a->send({1});
  a->send({2, 3});
  a->close();
  EXPECT_EQ(b->receive(), Bytes{1});
  EXPECT_EQ(b->receive(), (Bytes{2, 3}));
  EXPECT_THROW(b->receive(), TransportError);
  EXPECT_THROW(b->send({4}), TransportError);
}

TEST(InProcChannelTest, CloseUnblocksPendingReceive) {
  auto [a, b] = make_inproc_pair();
  std::thread t([&] { EXPECT_THROW(b->receive(), TransportError); });
  a->close();
  t.join();
}

TEST(TcpTest, ParsesEndpoints) {
  const auto e = parse_endpoint("127.0.0.1:5050");
  EXPECT_EQ(e.host, "127.0.0.1");
  EXPECT_EQ(e.port, 5050);
  EXPECT_EQ(e.to_string(), "127.0.0.1:5050");
  EXPECT_THROW(parse_endpoint("localhost"), InvalidArgumentError);
  EXPECT_THROW(parse_endpoint("127.0.0.1:x"), InvalidArgumentError);
  EXPECT_THROW(parse_endpoint("127.0.0.1:70000"), InvalidArgumentError);
}

TEST(TcpTest, FramesCrossTheSocketIntact) {
  TcpListener listener({"127.0.0.1", 0});
  ASSERT_NE(listener.port(), 0);
  auto client = tcp_connect({"127.0.0.1", listener.port()});
  auto server = listener.accept();
  const Message big = InitModel{small_model()};
  send_message(*client, big);
  send_message(*client, Done{});
  EXPECT_EQ(receive_message(*server), big);
  EXPECT_EQ(type_of(receive_message(*server)), MessageType::kDone);
  client->close();
  EXPECT_THROW(server->receive(), TransportError);
}

TEST(TcpTest, ConnectToClosedPortFails) {
  std::uint16_t port;
  {
    TcpListener listener({"127.0.0.1", 0});
    port = listener.port();
  }
  EXPECT_THROW(tcp_connect({"127.0.0.1", port}), TransportError);
}

TEST(FederationTest, SingleClientGlobalEqualsItsUpdate) {
  FakeTrainer t("solo", 0.25f, backbone_only());
  const auto config = server_config({"solo"}, {3.0}, 1);
  const auto out = run(config, {"solo"}, {&t});
  ASSERT_EQ(out.server_error, "");
  ASSERT_EQ(out.result.rounds.size(), 1u);
  // Warm-up of 2 epochs: +0.5 everywhere before sharing.
  NamedParameterSet trained = small_model();
  for (std::size_t i = 0; i < trained.size(); ++i) {
    for (auto& v : trained.mutable_tensor(i).mutable_data()) v += 0.5f;
  }
  EXPECT_EQ(out.result.rounds[0].global_shared, agg::filter_shared(trained, backbone_only()));
}

TEST(FederationTest, FrozenTrainersKeepTheInitialSharedWeights) {
  FakeTrainer a("a", 0.0f, backbone_only()), b("b", 0.0f, backbone_only());
  const auto config = server_config({"a", "b"}, {1.0, 6.0}, 3);
  const auto out = run(config, {"a", "b"}, {&a, &b});
  ASSERT_EQ(out.server_error, "");
  for (const auto& r : out.result.rounds) {
    EXPECT_EQ(r.global_shared, agg::filter_shared(small_model(), backbone_only()));
  }
}

TEST(FederationTest, WeightsAreAveragedAndHeadsStayLocal) {
  FakeTrainer a("a", 1.0f, backbone_only()), b("b", 8.0f, backbone_only());
  const auto config = server_config({"a", "b"}, {1.0, 6.0}, 2);
  const auto out = run(config, {"a", "b"}, {&a, &b});
  ASSERT_EQ(out.server_error, "");
  // Round 1 (2 epochs): a adds 2, b adds 16; mean shift (2 + 6*16)/7 = 14.
  EXPECT_EQ(out.result.rounds[0].global_shared.at("backbone.w"), Tensor({3}, {15, 16, 17}));
  // Round 2 (1 epoch): a adds 1, b adds 8; mean shift (1 + 48)/7 = 7.
  EXPECT_EQ(out.result.rounds[1].global_shared.at("backbone.w"), Tensor({3}, {22, 23, 24}));
  EXPECT_EQ(a.params().at("backbone.w"), b.params().at("backbone.w"));
  EXPECT_EQ(a.params().at("head.w"), Tensor({2}, {2, 4}));
  EXPECT_EQ(b.params().at("head.w"), Tensor({2}, {23, 25}));
}

TEST(FederationTest, RecordsScheduleExamplesAndMetrics) {
  FakeTrainer a("a", 0.0f, backbone_only()), bb("bb", 0.0f, backbone_only());
  const auto config = server_config({"a", "bb"}, {1.0, 1.0}, 3);
  const auto out = run(config, {"a", "bb"}, {&a, &bb});
  ASSERT_EQ(out.server_error, "");
  ASSERT_EQ(out.result.rounds.size(), 3u);
  for (std::uint32_t r = 1; r <= 3; ++r) {
    const auto& rec = out.result.rounds[r - 1];
    EXPECT_EQ(rec.round, r);
    ASSERT_EQ(rec.clients.size(), 2u);
    EXPECT_EQ(rec.clients[0].client_id, "a");
    EXPECT_EQ(rec.clients[0].epochs, r == 1 ? 2u : 1u);
    EXPECT_EQ(rec.clients[0].num_examples, 11u);
    EXPECT_EQ(rec.clients[1].num_examples, 12u);
    EXPECT_EQ(rec.clients[1].metrics.counts, (metrics::Counts{r, 1, 2}));
    EXPECT_EQ(rec.clients[1].metrics.round, r);
  }
  const std::vector<ClientLogEntry> expected = {{1, 2}, {2, 1}, {3, 1}};
  EXPECT_EQ(out.client_logs[0], expected);
  EXPECT_EQ(out.client_logs[1], expected);
  EXPECT_EQ(out.result.metrics_history().size(), 3u);
}

TEST(FederationTest, SameSeedsGiveIdenticalResults) {
  auto once = [] {
    FakeTrainer a("a", 0.125f, backbone_only()), b("b", -0.5f, backbone_only());
    return run(server_config({"a", "b"}, {1.0, 6.0}, 2), {"a", "b"}, {&a, &b}).result;
  };
  const auto first = once();
  const auto second = once();
  EXPECT_EQ(first, second);
  EXPECT_EQ(encode_result(first), encode_result(second));
}

TEST(FederationTest, TcpAndInProcessAreEquivalent) {
  auto over = [](Link link) {
    FakeTrainer a("a", 0.125f, backbone_only()), b("b", -0.5f, backbone_only());
    auto out = run(server_config({"a", "b"}, {1.0, 6.0}, 3), {"a", "b"}, {&a, &b}, link);
    EXPECT_EQ(out.server_error, "");
    return encode_result(out.result);
  };
  EXPECT_EQ(over(Link::kInProcess), over(Link::kTcp));
}

// Checks the barrier from both sides: the observer sees every update before
// aggregation, and no client applies round r before all trained round r.
class BarrierObserver : public ServerObserver {
 public:
  void on_phase(ServerPhase phase, std::uint32_t round) override {
    std::lock_guard lock(mu_);
    events.push_back(std::string(phase_name(phase)) + " " + std::to_string(round));
  }
  void on_update(const std::string& id, std::uint32_t round,
                 const std::set<std::string>& pending) override {
    std::lock_guard lock(mu_);
    events.push_back("update " + id + " " + std::to_string(round) + " pending " +
                     std::to_string(pending.size()));
  }
  std::mutex mu_;
  std::vector<std::string> events;
};

TEST(FederationTest, GlobalUpdateWaitsForEveryClient) {
  EventLog log;
  FakeTrainer a("a", 1.0f, backbone_only(), &log), b("b", 2.0f, backbone_only(), &log);
  BarrierObserver observer;
  const auto out = run(server_config({"a", "b"}, {1.0, 1.0}, 4), {"a", "b"}, {&a, &b},
                       Link::kInProcess, &observer);
  ASSERT_EQ(out.server_error, "");

  for (std::uint32_t r = 1; r <= 4; ++r) {
    const std::string rs = std::to_string(r);
    const auto& ev = observer.events;
    const auto agg = std::find(ev.begin(), ev.end(), "Aggregating " + rs);
    ASSERT_NE(agg, ev.end());
    int updates = 0;
    for (auto it = ev.begin(); it != agg; ++it) {
      if (it->starts_with("update ") && it->find(" " + rs + " pending") != std::string::npos) {
        ++updates;
      }
    }
    EXPECT_EQ(updates, 2) << "round " << r;
    const bool last_cleared =
        std::find(ev.begin(), agg, "update a " + rs + " pending 0") != agg ||
        std::find(ev.begin(), agg, "update b " + rs + " pending 0") != agg;
    EXPECT_TRUE(last_cleared) << "round " << r;

    const auto calls = log.events();
    std::size_t last_train = 0, first_apply = calls.size();
    for (std::size_t i = 0; i < calls.size(); ++i) {
      if (calls[i] == "train a " + rs || calls[i] == "train b " + rs) last_train = i;
      if ((calls[i] == "apply a " + rs || calls[i] == "apply b " + rs) && first_apply > i) {
        first_apply = i;
      }
    }
    EXPECT_LT(last_train, first_apply) << "round " << r;
  }
  EXPECT_EQ(observer.events.back(), "Finished 4");
}

class DroppingTrainer : public FakeTrainer {
 public:
  using FakeTrainer::FakeTrainer;
  std::uint64_t train(std::uint32_t round, std::uint32_t epochs) override {
    if (round == 2) throw TransportError("simulated crash");
    return FakeTrainer::train(round, epochs);
  }
};

TEST(FederationTest, DisconnectMidRoundAbortsWithContext) {
  FakeTrainer a("a", 1.0f, backbone_only());
  DroppingTrainer b("b", 1.0f, backbone_only());
  const auto out = run(server_config({"a", "b"}, {1.0, 1.0}, 3), {"a", "b"}, {&a, &b});
  EXPECT_EQ(out.server_error.rfind("round 2: client 'b' disconnected", 0), 0u) << out.server_error;
  EXPECT_NE(out.client_errors[1].find("simulated crash"), std::string::npos);
  // The healthy client is released rather than left waiting.
  EXPECT_NE(out.client_errors[0], "");
  EXPECT_TRUE(out.result.rounds.empty());
}

class ExtraTensorTrainer : public FakeTrainer {
 public:
  using FakeTrainer::FakeTrainer;
  NamedParameterSet shared_parameters() const override {
    auto s = FakeTrainer::shared_parameters();
    s.add("backbone.extra", Role::kTrainable, Tensor::zeros({1}));
    return s;
  }
};

TEST(FederationTest, SchemaMismatchNamesRoundAndClient) {
  FakeTrainer a("a", 1.0f, backbone_only());
  ExtraTensorTrainer b("b", 1.0f, backbone_only());
  const auto out = run(server_config({"a", "b"}, {1.0, 1.0}, 2), {"a", "b"}, {&a, &b});
  EXPECT_EQ(out.server_error.rfind("round 1: client 'b'", 0), 0u) << out.server_error;
  EXPECT_NE(out.server_error.find("backbone.extra"), std::string::npos) << out.server_error;
}

TEST(FederationTest, ClientSharingTheWrongSubsetIsRejected) {
  // Client filters with the full-model rule while the plan shares the
  // backbone only.
  FakeTrainer a("a", 1.0f, backbone_only()), b("b", 1.0f, agg::FilterRule{});
  const auto out = run(server_config({"a", "b"}, {1.0, 1.0}, 1), {"a", "b"}, {&a, &b});
  EXPECT_NE(out.server_error.find("client 'b'"), std::string::npos) << out.server_error;
}

// Drives the server end with hand-written frames.
std::string scripted_error(const std::function<void(Channel&)>& script) {
  auto [server_end, client_end] = make_inproc_pair();
  std::vector<ClientConnection> conns;
  conns.push_back({"a", std::move(server_end)});
  const auto config = server_config({"a"}, {1.0}, 2);
  std::thread t([&, ch = client_end.get()] {
    try {
      script(*ch);
    } catch (const Error&) {
    }
  });
  std::string error;
  try {
    run_federation(config, std::move(conns));
  } catch (const FederationError& e) {
    error = e.what();
  }
  client_end->close();
  t.join();
  return error;
}

TEST(FederationTest, ImpersonationIsRejected) {
  const auto error = scripted_error([](Channel& ch) {
    receive_message(ch);  // InitModel
    receive_message(ch);  // TrainRequest
    send_message(ch, WeightUpdate{1, "someone-else", 1,
                                  agg::filter_shared(small_model(), backbone_only())});
    receive_message(ch);
  });
  EXPECT_NE(error.find("claims client id 'someone-else'"), std::string::npos) << error;
}

TEST(FederationTest, WrongRoundIsRejected) {
  const auto error = scripted_error([](Channel& ch) {
    receive_message(ch);
    receive_message(ch);
    send_message(ch, WeightUpdate{2, "a", 1, agg::filter_shared(small_model(), backbone_only())});
    receive_message(ch);
  });
  EXPECT_NE(error.find("unexpected WeightUpdate for round 2"), std::string::npos) << error;
}

TEST(FederationTest, MalformedFrameIsRejected) {
  const auto error = scripted_error([](Channel& ch) {
    receive_message(ch);
    ch.send({'J', 'U', 'N', 'K'});
    receive_message(ch);
  });
  EXPECT_NE(error.find("client 'a' sent a malformed frame"), std::string::npos) << error;
}

TEST(FederationTest, MetricsBeforeGlobalUpdateIsRejected) {
  const auto error = scripted_error([](Channel& ch) {
    receive_message(ch);
    receive_message(ch);
    metrics::MetricsReport r;
    r.round = 1;
    r.client_id = "a";
    send_message(ch, Metrics{r});
    receive_message(ch);
  });
  EXPECT_NE(error.find("unexpected Metrics"), std::string::npos) << error;
}

TEST(FederationTest, ConnectionsMustMatchThePlan) {
  auto attempt = [](std::vector<std::string> connected) {
    std::vector<ClientConnection> conns;
    std::vector<std::unique_ptr<Channel>> keep;
    for (const auto& id : connected) {
      auto [s, c] = make_inproc_pair();
      conns.push_back({id, std::move(s)});
      keep.push_back(std::move(c));
    }
    return run_federation(server_config({"a", "b"}, {1.0, 1.0}, 1), std::move(conns));
  };
  EXPECT_THROW(attempt({}), InvalidArgumentError);
  EXPECT_THROW(attempt({"a"}), InvalidArgumentError);
  EXPECT_THROW(attempt({"a", "c"}), InvalidArgumentError);
  EXPECT_THROW(attempt({"a", "a"}), InvalidArgumentError);
}

TEST(ClientTest, DoneBeforeInitModelExitsCleanly) {
  auto [server_end, client_end] = make_inproc_pair();
  FakeTrainer t("a", 1.0f, backbone_only());
  FederatedClient client("a", t, *client_end);
  send_message(*server_end, Done{});
  EXPECT_NO_THROW(client.run());
  EXPECT_FALSE(t.loaded());
  EXPECT_TRUE(client.log().empty());
}

TEST(ClientTest, FrozenTrainerSendsBackTheInitialSharedSubset) {
  auto [server_end, client_end] = make_inproc_pair();
  FakeTrainer t("a", 0.0f, backbone_only());
  FederatedClient client("a", t, *client_end);
  std::thread th([&] { client.run(); });
  send_message(*server_end, InitModel{small_model()});
  send_message(*server_end, TrainRequest{1, 4});
  const auto reply = receive_message(*server_end);
  const auto* update = std::get_if<WeightUpdate>(&reply);
  ASSERT_NE(update, nullptr);
  EXPECT_EQ(update->round, 1u);
  EXPECT_EQ(update->client_id, "a");
  EXPECT_EQ(update->params, agg::filter_shared(small_model(), backbone_only()));
  send_message(*server_end, Done{});
  th.join();
  EXPECT_EQ(client.log(), (std::vector<ClientLogEntry>{{1, 4}}));
}

TEST(ClientTest, OutOfOrderMessagesAreProtocolErrors) {
  auto expect_protocol_error = [](std::vector<Message> script) {
    auto [server_end, client_end] = make_inproc_pair();
    FakeTrainer t("a", 0.0f, backbone_only());
    FederatedClient client("a", t, *client_end);
    for (const auto& m : script) send_message(*server_end, m);
    EXPECT_THROW(client.run(), ProtocolError);
  };
  expect_protocol_error({TrainRequest{1, 1}});
  expect_protocol_error({InitModel{small_model()}, GlobalUpdate{1, {}}});
  expect_protocol_error({InitModel{small_model()}, TrainRequest{2, 1}});
  expect_protocol_error({InitModel{small_model()}, InitModel{small_model()}});
}

TEST(ClientTest, ServerVanishingIsATransportError) {
  auto [server_end, client_end] = make_inproc_pair();
  FakeTrainer t("a", 0.0f, backbone_only());
  FederatedClient client("a", t, *client_end);
  send_message(*server_end, InitModel{small_model()});
  server_end->close();
  EXPECT_THROW(client.run(), TransportError);
}

}  // namespace
}  // namespace fedsten::proto
