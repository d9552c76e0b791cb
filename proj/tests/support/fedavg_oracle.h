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

#ifndef FEDSTEN_TESTS_SUPPORT_FEDAVG_ORACLE_H_
#define FEDSTEN_TESTS_SUPPORT_FEDAVG_ORACLE_H_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fedsten/aggregation/fedavg.h"
#include "fedsten/common/rng.h"
#include "support/random_sets.h"

namespace fedsten::testing {

// Long double accumulation of sum(c_k x_k) / sum(c_k) for one entry.
inline std::vector<long double> fedavg_oracle(const std::vector<NamedParameterSet>& sets,
                                              const std::vector<double>& coefficients,
                                              std::size_t entry) {
  const std::size_t n = sets[0].entry(entry).tensor.size();
  std::vector<long double> num(n, 0.0L);
  long double den = 0.0L;
  for (std::size_t k = 0; k < sets.size(); ++k) {
    den += coefficients[k];
    for (std::size_t i = 0; i < n; ++i) {
      num[i] += static_cast<long double>(coefficients[k]) * sets[k].entry(entry).tensor[i];
    }
  }
  for (auto& v : num) v /= den;
  return num;
}

struct FedAvgOracleReport {
  int trials = 0;
  std::uint64_t elements = 0;
  // Elements outside 1e-6 relative error of the oracle.
  std::uint64_t oracle_violations = 0;
  // Elements outside [min, max] of the clients with nonzero coefficient.
  std::uint64_t hull_violations = 0;
  double max_relative_error = 0.0;
  double seconds = 0.0;
};

// Random sets of up to `max_clients` clients and `max_elements` elements,
// each compared against the oracle and the convex hull of its inputs.
inline FedAvgOracleReport run_fedavg_oracle(std::uint64_t seed, int trials, int max_clients = 5,
                                            int max_elements = 100,
                                            double tolerance = 1e-6) {
  Rng rng(seed);
  FedAvgOracleReport r;
  r.trials = trials;
  const auto start = std::chrono::steady_clock::now();
  for (int trial = 0; trial < trials; ++trial) {
    const auto schema = random_schema(rng, 5, max_elements);
    const int clients = static_cast<int>(rng.uniform_int(1, max_clients));
    std::vector<NamedParameterSet> sets;
    std::vector<double> coefficients;
    std::vector<agg::ClientUpdate> updates;
    agg::AggregationPlan plan;
    for (int k = 0; k < clients; ++k) {
      sets.push_back(random_values(rng, schema, rng.uniform(0.1, 100.0)));
      // Occasional zero coefficient; the first client always counts.
      coefficients.push_back(k > 0 && rng.bernoulli(0.1) ? 0.0 : rng.uniform(0.01, 10.0));
      const std::string id = "c" + std::to_string(k);
      plan.weights.push_back({id, coefficients.back()});
      updates.emplace_back(id, sets.back());
    }
    const auto out = agg::fedavg(updates, plan);
    for (std::size_t e = 0; e < out.size(); ++e) {
      const auto expected = fedavg_oracle(sets, coefficients, e);
      const auto got = out.entry(e).tensor.data();
      for (std::size_t i = 0; i < got.size(); ++i) {
        ++r.elements;
        const long double err = std::fabs(got[i] - expected[i]);
        const long double scale = std::max(std::fabs(expected[i]), 1e-20L);
        r.max_relative_error = std::max(r.max_relative_error, static_cast<double>(err / scale));
        if (err > tolerance * scale) ++r.oracle_violations;
        float lo = std::numeric_limits<float>::infinity(), hi = -lo;
        for (std::size_t k = 0; k < sets.size(); ++k) {
          if (coefficients[k] == 0.0) continue;
          lo = std::min(lo, sets[k].entry(e).tensor[i]);
          hi = std::max(hi, sets[k].entry(e).tensor[i]);
        }
        if (got[i] < lo || got[i] > hi) ++r.hull_violations;
      }
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace fedsten::testing

#endif  // FEDSTEN_TESTS_SUPPORT_FEDAVG_ORACLE_H_
