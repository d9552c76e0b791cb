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

#ifndef FEDSTEN_METRICS_DETECTION_METRICS_H_
#define FEDSTEN_METRICS_DETECTION_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fedsten/metrics/box.h"

namespace fedsten::metrics {

inline constexpr double kDefaultIouThreshold = 0.5;

// Intersection over union with continuous areas. Throws InvalidArgumentError
// when either box has non-positive area.
double iou(const Box& a, const Box& b);

struct MatchedPair {
  std::size_t prediction = 0;
  std::size_t ground_truth = 0;
  double iou = 0.0;

  friend bool operator==(const MatchedPair&, const MatchedPair&) = default;
};

struct MatchResult {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  // Indices refer to the caller's (unsorted) prediction list.
  std::vector<MatchedPair> pairs;
};

// Greedy one-to-one matching. Predictions are visited by descending
// confidence (stable for ties); each takes the unmatched ground truth with
// the highest IoU if that IoU reaches the threshold. Unmatched predictions
// are false positives, unmatched ground truths false negatives.
MatchResult match(std::span<const Prediction> predictions, std::span<const Box> ground_truth,
                  double iou_threshold = kDefaultIouThreshold);

struct Counts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const Counts&, const Counts&) = default;
};

inline Counts counts_of(const MatchResult& m) { return {m.tp, m.fp, m.fn}; }

// Rates are fractions in [0, 1]; tables render them as percentages.
struct MetricsReport {
  std::uint32_t round = 0;
  std::string client_id;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  Counts counts;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

// Zero-division rules: precision is 1 when tp+fp == 0 and fn == 0, otherwise
// 0 when tp+fp == 0; recall is 1 when tp+fn == 0 and fp == 0, otherwise 0;
// f1 is 0 when precision + recall == 0.
MetricsReport compute_metrics(const Counts& counts, std::uint32_t round = 0,
                              std::string client_id = {});
MetricsReport compute_metrics(std::span<const MatchResult> per_image, std::uint32_t round = 0,
                              std::string client_id = {});

// Per-round reports of every client, in round order.
struct RoundMetrics {
  std::uint32_t round = 0;
  std::vector<MetricsReport> clients;
};

// Round maximizing the unweighted mean recall over clients; earliest wins
// ties. Throws InvalidArgumentError on empty history.
std::uint32_t select_best_round(std::span<const RoundMetrics> history);

// Reporting extra: each client's own recall argmax (earliest on ties).
std::map<std::string, std::uint32_t> best_round_per_client(std::span<const RoundMetrics> history);

// CSV with header "round,client_id,precision,recall,f1,tp,fp,fn"; rates as
// percentages with two decimals.
void write_metrics_csv_header(std::ostream& os);
void write_metrics_csv_row(std::ostream& os, const MetricsReport& report);

// Two-decimal percentage rendering used by every table.
std::string percent(double fraction);

}  // namespace fedsten::metrics

#endif  // FEDSTEN_METRICS_DETECTION_METRICS_H_
