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

#include "fedsten/aggregation/fedavg.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "fedsten/common/error.h"

namespace fedsten::agg {

bool FilterRule::shares(const ParameterEntry& entry) const {
  if (!include_prefixes.empty()) {
    const bool included = std::any_of(
        include_prefixes.begin(), include_prefixes.end(),
        [&](const std::string& prefix) { return entry.name.starts_with(prefix); });
    if (!included) return false;
  }
  if (std::find(exclude_roles.begin(), exclude_roles.end(), entry.role) != exclude_roles.end()) {
    return false;
  }
  return std::none_of(exclude_patterns.begin(), exclude_patterns.end(),
                      [&](const std::string& pattern) {
                        return entry.name.find(pattern) != std::string::npos;
                      });
}

void AggregationPlan::validate() const {
  std::set<std::string> seen;
  bool any_positive = false;
  for (const auto& w : weights) {
    if (!seen.insert(w.client_id).second) {
      throw InvalidArgumentError("duplicate client '" + w.client_id + "' in aggregation plan");
    }
    if (!std::isfinite(w.coefficient) || w.coefficient < 0.0) {
      throw InvalidArgumentError("coefficient for '" + w.client_id +
                                 "' must be finite and non-negative");
    }
    any_positive = any_positive || w.coefficient > 0.0;
  }
  if (!any_positive) throw InvalidArgumentError("all aggregation coefficients are zero");
}

const ClientWeight* AggregationPlan::find(const std::string& client_id) const {
  for (const auto& w : weights) {
    if (w.client_id == client_id) return &w;
  }
  return nullptr;
}

NamedParameterSet filter_shared(const NamedParameterSet& set, const FilterRule& rule) {
  NamedParameterSet out;
  for (const auto& entry : set) {
    if (rule.shares(entry)) out.add(entry);
  }
  return out;
}

NamedParameterSet fedavg(const std::vector<ClientUpdate>& updates, const AggregationPlan& plan) {
  if (updates.empty()) throw InvalidArgumentError("fedavg needs at least one update");
  plan.validate();

  // Order the contributions by plan order.
  std::vector<std::pair<const NamedParameterSet*, double>> ordered;
  std::set<std::string> seen;
  for (const auto& [id, params] : updates) {
    if (plan.find(id) == nullptr) throw InvalidArgumentError("unknown client '" + id + "'");
    if (!seen.insert(id).second) throw InvalidArgumentError("duplicate update from '" + id + "'");
  }
  double total = 0.0;
  for (const auto& w : plan.weights) {
    auto it = std::find_if(updates.begin(), updates.end(),
                           [&](const ClientUpdate& u) { return u.first == w.client_id; });
    if (it == updates.end()) continue;
    ordered.emplace_back(&it->second, w.coefficient);
    total += w.coefficient;
  }
  if (!(total > 0.0)) throw InvalidArgumentError("all participating coefficients are zero");

  const NamedParameterSet& first = *ordered.front().first;
  for (const auto& [params, c] : ordered) require_same_schema(first, *params);

  NamedParameterSet out;
  std::vector<double> acc;
  for (std::size_t e = 0; e < first.size(); ++e) {
    const auto& proto = first.entry(e);
    acc.assign(proto.tensor.size(), 0.0);
    for (const auto& [params, c] : ordered) {
      auto data = params->entry(e).tensor.data();
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c * static_cast<double>(data[i]);
    }
    std::vector<float> mean(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) mean[i] = static_cast<float>(acc[i] / total);
    out.add(proto.name, proto.role,
            Tensor(std::vector<std::uint64_t>(proto.tensor.dims().begin(), proto.tensor.dims().end()),
                   std::move(mean)));
  }
  return out;
}

NamedParameterSet apply_global(const NamedParameterSet& local,
                               const NamedParameterSet& global_shared) {
  NamedParameterSet out = local;
  for (const auto& entry : global_shared) {
    if (!local.contains(entry.name)) {
      throw SchemaMismatchError("unknown parameter '" + entry.name + "' in global update");
    }
    out.replace(entry.name, entry.tensor);
  }
  return out;
}

}  // namespace fedsten::agg
