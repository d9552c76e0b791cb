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

#ifndef FEDSTEN_AGGREGATION_FEDAVG_H_
#define FEDSTEN_AGGREGATION_FEDAVG_H_

#include <string>
#include <utility>
#include <vector>

#include "fedsten/params/named_parameter_set.h"

namespace fedsten::agg {

struct ClientWeight {
  std::string client_id;
  // Non-negative, finite.
  double coefficient = 1.0;

  friend bool operator==(const ClientWeight&, const ClientWeight&) = default;
};

// Selects the parameters that leave a client. An entry is shared iff
//   (include_prefixes is empty or its name starts with one of them)
//   and its role is not in exclude_roles
//   and its name contains none of exclude_patterns.
struct FilterRule {
  std::vector<std::string> include_prefixes;
  std::vector<Role> exclude_roles;
  std::vector<std::string> exclude_patterns;

  bool shares(const ParameterEntry& entry) const;

  friend bool operator==(const FilterRule&, const FilterRule&) = default;
};

// Coefficients are always normalized by their sum: the aggregate is the
// weighted mean sum(c_i * x_i) / sum(c_i).
struct AggregationPlan {
  std::vector<ClientWeight> weights;
  FilterRule filter;

  // Throws InvalidArgumentError on duplicate ids, negative or non-finite
  // coefficients, or when no coefficient is positive.
  void validate() const;
  // nullptr if the client is not part of the plan.
  const ClientWeight* find(const std::string& client_id) const;

  friend bool operator==(const AggregationPlan&, const AggregationPlan&) = default;
};

using ClientUpdate = std::pair<std::string, NamedParameterSet>;

// Subset of `set` passing `rule`, in the original order.
NamedParameterSet filter_shared(const NamedParameterSet& set, const FilterRule& rule);

// Normalized weighted mean of the updates, element by element. Accumulation
// runs in double in the order of plan.weights, so the result does not depend
// on the order of `updates`.
//
// Throws SchemaMismatchError if the updates disagree on schema,
// InvalidArgumentError for an unknown or duplicate client, an empty update
// list, or when the participating coefficients sum to zero.
NamedParameterSet fedavg(const std::vector<ClientUpdate>& updates, const AggregationPlan& plan);

// `local` with every entry of `global_shared` substituted. Entries not in
// `global_shared` are carried over bitwise. Throws SchemaMismatchError for a
// name missing from `local` or a dims mismatch.
NamedParameterSet apply_global(const NamedParameterSet& local,
                               const NamedParameterSet& global_shared);

}  // namespace fedsten::agg

#endif  // FEDSTEN_AGGREGATION_FEDAVG_H_
