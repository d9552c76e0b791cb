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

#include "fedsten/experiment/config.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

#include "fedsten/common/error.h"
#include "fedsten/protocol/tcp.h"

namespace fedsten::experiment {

using nlohmann::json;

namespace {

constexpr const char* kBackbonePrefix = "backbone.";

[[noreturn]] void fail(const std::string& what) { throw InvalidArgumentError("config: " + what); }

// Rejects keys outside `allowed` so typos do not silently fall back to
// defaults.
void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      fail("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    fail("bad value for '" + std::string(key) + "' in " + where);
  }
}

Role parse_role(const std::string& name) {
  if (name == role_name(Role::kTrainable)) return Role::kTrainable;
  if (name == role_name(Role::kStatistic)) return Role::kStatistic;
  fail("unknown role '" + name + "'");
}

json profile_to_json(const data::ClientProfile& p) {
  return {{"client_id", p.client_id},
          {"n_patients", p.n_patients},
          {"min_images_per_patient", p.min_images_per_patient},
          {"max_images_per_patient", p.max_images_per_patient},
          {"sequential", p.sequential},
          {"intensity_mean", p.intensity_mean},
          {"intensity_std", p.intensity_std},
          {"min_boxes_per_image", p.min_boxes_per_image},
          {"max_boxes_per_image", p.max_boxes_per_image},
          {"test_fraction", p.test_fraction},
          {"image_size", p.image_size},
          {"grid", p.grid}};
}

void profile_from_json(const json& j, data::ClientProfile& p) {
  const std::string where = "client profile";
  check_keys(j, where,
             {"client_id", "n_patients", "min_images_per_patient", "max_images_per_patient",
              "sequential", "intensity_mean", "intensity_std", "min_boxes_per_image",
              "max_boxes_per_image", "test_fraction", "image_size", "grid"});
  read(j, "client_id", p.client_id, where);
  read(j, "n_patients", p.n_patients, where);
  read(j, "min_images_per_patient", p.min_images_per_patient, where);
  read(j, "max_images_per_patient", p.max_images_per_patient, where);
  read(j, "sequential", p.sequential, where);
  read(j, "intensity_mean", p.intensity_mean, where);
  read(j, "intensity_std", p.intensity_std, where);
  read(j, "min_boxes_per_image", p.min_boxes_per_image, where);
  read(j, "max_boxes_per_image", p.max_boxes_per_image, where);
  read(j, "test_fraction", p.test_fraction, where);
  read(j, "image_size", p.image_size, where);
  read(j, "grid", p.grid, where);
}

json plan_to_json(const agg::AggregationPlan& plan) {
  json weights = json::array();
  for (const auto& w : plan.weights) {
    weights.push_back({{"client_id", w.client_id}, {"coefficient", w.coefficient}});
  }
  json roles = json::array();
  for (Role r : plan.filter.exclude_roles) roles.push_back(role_name(r));
  return {{"weights", weights},
          {"include_prefixes", plan.filter.include_prefixes},
          {"exclude_roles", roles},
          {"exclude_patterns", plan.filter.exclude_patterns}};
}

agg::AggregationPlan plan_from_json(const json& j) {
  const std::string where = "plan";
  check_keys(j, where, {"weights", "include_prefixes", "exclude_roles", "exclude_patterns"});
  agg::AggregationPlan plan;
  if (auto it = j.find("weights"); it != j.end()) {
    if (!it->is_array()) fail("plan.weights must be an array");
    for (const auto& w : *it) {
      check_keys(w, "plan weight", {"client_id", "coefficient"});
      agg::ClientWeight cw;
      read(w, "client_id", cw.client_id, "plan weight");
      read(w, "coefficient", cw.coefficient, "plan weight");
      plan.weights.push_back(cw);
    }
  }
  read(j, "include_prefixes", plan.filter.include_prefixes, where);
  read(j, "exclude_patterns", plan.filter.exclude_patterns, where);
  std::vector<std::string> roles;
  read(j, "exclude_roles", roles, where);
  for (const auto& r : roles) plan.filter.exclude_roles.push_back(parse_role(r));
  return plan;
}

}  // namespace

const char* experiment_name(ExperimentId id) {
  switch (id) {
    case ExperimentId::kLocal: return "local";
    case ExperimentId::kFl1: return "fl1";
    case ExperimentId::kFl2: return "fl2";
    case ExperimentId::kFl3: return "fl3";
    case ExperimentId::kProposed: return "proposed";
  }
  return "?";
}

ExperimentId parse_experiment_id(const std::string& name) {
  for (ExperimentId id : all_experiments()) {
    if (name == experiment_name(id)) return id;
  }
  throw InvalidArgumentError("unknown experiment '" + name +
                             "' (expected local, fl1, fl2, fl3 or proposed)");
}

const std::vector<ExperimentId>& all_experiments() {
  static const std::vector<ExperimentId> ids = {ExperimentId::kLocal, ExperimentId::kFl1,
                                                ExperimentId::kFl2, ExperimentId::kFl3,
                                                ExperimentId::kProposed};
  return ids;
}

bool is_federated(ExperimentId id) { return id != ExperimentId::kLocal; }

const char* transport_name(Transport transport) {
  return transport == Transport::kTcp ? "tcp" : "inproc";
}

Transport parse_transport(const std::string& name) {
  if (name == "inproc") return Transport::kInProcess;
  if (name == "tcp") return Transport::kTcp;
  throw InvalidArgumentError("unknown transport '" + name + "' (expected inproc or tcp)");
}

agg::AggregationPlan builtin_plan(ExperimentId id, const std::vector<std::string>& client_ids) {
  if (!is_federated(id)) throw InvalidArgumentError("the local experiment has no plan");
  if (client_ids.size() != 2) {
    throw InvalidArgumentError("built-in plans are defined for exactly two clients");
  }
  const double beta = id == ExperimentId::kFl2 ? 1.0 : 6.0;
  agg::AggregationPlan plan;
  plan.weights = {{client_ids[0], 1.0}, {client_ids[1], beta}};
  if (id != ExperimentId::kFl1) plan.filter.include_prefixes = {kBackbonePrefix};
  if (id == ExperimentId::kFl3) plan.filter.exclude_roles = {Role::kStatistic};
  return plan;
}

std::vector<std::string> ExperimentConfig::client_ids() const {
  std::vector<std::string> ids;
  for (const auto& p : profiles) ids.push_back(p.client_id);
  return ids;
}

agg::AggregationPlan ExperimentConfig::plan() const {
  return builtin_plan(experiment_id, client_ids());
}

void ExperimentConfig::validate() const {
  if (profiles.size() != 2) fail("exactly two client profiles are required");
  const auto ids = client_ids();
  if (std::set<std::string>(ids.begin(), ids.end()).size() != ids.size()) {
    fail("client ids must be unique");
  }
  detector.validate();
  for (const auto& p : profiles) {
    p.validate();
    if (p.image_size != detector.image_size || p.grid != detector.grid) {
      fail("profile '" + p.client_id + "' image_size/grid differ from the detector's");
    }
  }
  const auto& adam = training.adam;
  if (!(adam.learning_rate > 0.0) || !std::isfinite(adam.learning_rate)) {
    fail("learning_rate must be positive");
  }
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    fail("Adam betas must lie in [0, 1)");
  }
  if (!(adam.epsilon > 0.0)) fail("Adam epsilon must be positive");
  if (training.batch_size == 0) fail("batch_size must be positive");
  if (!(training.flip_probability >= 0.0 && training.flip_probability <= 1.0)) {
    fail("flip_probability must lie in [0, 1]");
  }
  if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0)) {
    fail("confidence_threshold must lie in [0, 1]");
  }
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) fail("iou_threshold must lie in (0, 1]");
  proto::parse_endpoint(listen);

  if (is_federated(experiment_id)) {
    schedule.validate(ids);
  } else {
    if (local_epochs.size() != ids.size()) fail("local_epochs needs one entry per client");
    for (const auto& id : ids) {
      auto it = local_epochs.find(id);
      if (it == local_epochs.end() || it->second == 0) {
        fail("local_epochs needs a positive entry for '" + id + "'");
      }
    }
  }
}

ExperimentConfig desk_config() {
  ExperimentConfig c;
  c.profiles = {data::default_client1_profile(), data::default_client2_profile()};
  const std::string a = c.profiles[0].client_id, b = c.profiles[1].client_id;
  c.schedule.total_rounds = 20;
  c.schedule.epochs_per_round = {{a, 5}, {b, 1}};
  c.schedule.warmup_epochs = {{a, 10}, {b, 4}};
  c.local_epochs = {{a, 50}, {b, 10}};
  c.training.adam.learning_rate = 1e-3;
  return c;
}

void apply_paper_schedule(ExperimentConfig& c) {
  if (c.profiles.size() != 2) fail("the published schedule is defined for two clients");
  const std::string a = c.profiles[0].client_id, b = c.profiles[1].client_id;
  c.schedule.total_rounds = 20;
  c.schedule.epochs_per_round = {{a, 20}, {b, 4}};
  c.schedule.warmup_epochs = {{a, 40}, {b, 16}};
  c.local_epochs = {{a, 200}, {b, 50}};
  c.training.adam.learning_rate = 1e-4;
  c.training.batch_size = 16;
}

std::string to_json(const ExperimentConfig& c) {
  json profiles = json::array();
  for (const auto& p : c.profiles) profiles.push_back(profile_to_json(p));
  json j = {
      {"experiment_id", experiment_name(c.experiment_id)},
      {"seed", c.seed},
      {"clients", profiles},
      {"schedule",
       {{"total_rounds", c.schedule.total_rounds},
        {"epochs_per_round", c.schedule.epochs_per_round},
        {"warmup_epochs", c.schedule.warmup_epochs}}},
      {"local_epochs", c.local_epochs},
      {"detector",
       {{"image_size", c.detector.image_size},
        {"grid", c.detector.grid},
        {"backbone_widths", c.detector.backbone_widths},
        {"head_widths", c.detector.head_widths},
        {"norm_momentum", c.detector.norm_momentum},
        {"norm_eps", c.detector.norm_eps},
        {"loss_reg_weight", c.detector.loss_reg_weight}}},
      {"training",
       {{"learning_rate", c.training.adam.learning_rate},
        {"beta1", c.training.adam.beta1},
        {"beta2", c.training.adam.beta2},
        {"epsilon", c.training.adam.epsilon},
        {"batch_size", c.training.batch_size},
        {"flip_probability", c.training.flip_probability}}},
      {"evaluation",
       {{"confidence_threshold", c.confidence_threshold}, {"iou_threshold", c.iou_threshold}}},
      {"transport", transport_name(c.transport)},
      {"listen", c.listen},
  };
  if (is_federated(c.experiment_id) && c.profiles.size() == 2) j["plan"] = plan_to_json(c.plan());
  return j.dump(2) + "\n";
}

ExperimentConfig from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  check_keys(j, "config",
             {"experiment_id", "seed", "clients", "schedule", "local_epochs", "detector",
              "training", "evaluation", "transport", "listen", "plan"});
  ExperimentConfig c = desk_config();
  const std::string top = "config";

  std::string name = experiment_name(c.experiment_id);
  read(j, "experiment_id", name, top);
  c.experiment_id = parse_experiment_id(name);
  read(j, "seed", c.seed, top);

  if (auto it = j.find("clients"); it != j.end()) {
    if (!it->is_array()) fail("clients must be an array");
    const std::vector<data::ClientProfile> defaults = c.profiles;
    c.profiles.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      data::ClientProfile p = i < defaults.size() ? defaults[i] : data::ClientProfile{};
      profile_from_json((*it)[i], p);
      c.profiles.push_back(p);
    }
  }
  if (auto it = j.find("schedule"); it != j.end()) {
    check_keys(*it, "schedule", {"total_rounds", "epochs_per_round", "warmup_epochs"});
    read(*it, "total_rounds", c.schedule.total_rounds, "schedule");
    read(*it, "epochs_per_round", c.schedule.epochs_per_round, "schedule");
    read(*it, "warmup_epochs", c.schedule.warmup_epochs, "schedule");
  }
  read(j, "local_epochs", c.local_epochs, top);
  if (auto it = j.find("detector"); it != j.end()) {
    const std::string where = "detector";
    check_keys(*it, where,
               {"image_size", "grid", "backbone_widths", "head_widths", "norm_momentum",
                "norm_eps", "loss_reg_weight"});
    read(*it, "image_size", c.detector.image_size, where);
    read(*it, "grid", c.detector.grid, where);
    read(*it, "backbone_widths", c.detector.backbone_widths, where);
    read(*it, "head_widths", c.detector.head_widths, where);
    read(*it, "norm_momentum", c.detector.norm_momentum, where);
    read(*it, "norm_eps", c.detector.norm_eps, where);
    read(*it, "loss_reg_weight", c.detector.loss_reg_weight, where);
  }
  if (auto it = j.find("training"); it != j.end()) {
    const std::string where = "training";
    check_keys(*it, where,
               {"learning_rate", "beta1", "beta2", "epsilon", "batch_size", "flip_probability"});
    read(*it, "learning_rate", c.training.adam.learning_rate, where);
    read(*it, "beta1", c.training.adam.beta1, where);
    read(*it, "beta2", c.training.adam.beta2, where);
    read(*it, "epsilon", c.training.adam.epsilon, where);
    read(*it, "batch_size", c.training.batch_size, where);
    read(*it, "flip_probability", c.training.flip_probability, where);
  }
  if (auto it = j.find("evaluation"); it != j.end()) {
    check_keys(*it, "evaluation", {"confidence_threshold", "iou_threshold"});
    read(*it, "confidence_threshold", c.confidence_threshold, "evaluation");
    read(*it, "iou_threshold", c.iou_threshold, "evaluation");
  }
  std::string transport = transport_name(c.transport);
  read(j, "transport", transport, top);
  c.transport = parse_transport(transport);
  read(j, "listen", c.listen, top);

  c.validate();
  if (auto it = j.find("plan"); it != j.end()) {
    if (!is_federated(c.experiment_id)) fail("the local experiment takes no plan");
    if (plan_from_json(*it) != c.plan()) {
      fail(std::string("plan does not match the built-in plan for '") +
           experiment_name(c.experiment_id) + "'");
    }
  }
  return c;
}

}  // namespace fedsten::experiment
