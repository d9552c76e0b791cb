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

#include "fedsten/metrics/detection_metrics.h"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "fedsten/common/error.h"

namespace fedsten::metrics {

double iou(const Box& a, const Box& b) {
  if (!a.valid() || !b.valid()) throw InvalidArgumentError("iou: degenerate box");
  const double ix = std::max(0.0, static_cast<double>(std::min(a.x_max, b.x_max)) -
                                      static_cast<double>(std::max(a.x_min, b.x_min)));
  const double iy = std::max(0.0, static_cast<double>(std::min(a.y_max, b.y_max)) -
                                      static_cast<double>(std::max(a.y_min, b.y_min)));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

MatchResult match(std::span<const Prediction> predictions, std::span<const Box> ground_truth,
                  double iou_threshold) {
  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return predictions[a].confidence > predictions[b].confidence;
  });

  MatchResult result;
  std::vector<bool> taken(ground_truth.size(), false);
  for (std::size_t p : order) {
    double best = -1.0;
    std::size_t best_gt = 0;
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (taken[g]) continue;
      const double v = iou(predictions[p].box, ground_truth[g]);
      if (v > best) {
        best = v;
        best_gt = g;
      }
    }
    if (best >= iou_threshold) {
      taken[best_gt] = true;
      result.pairs.push_back({p, best_gt, best});
      ++result.tp;
    } else {
      ++result.fp;
    }
  }
  result.fn = ground_truth.size() - result.tp;
  return result;
}

MetricsReport compute_metrics(const Counts& counts, std::uint32_t round, std::string client_id) {
  MetricsReport r;
  r.round = round;
  r.client_id = std::move(client_id);
  r.counts = counts;
  const auto [tp, fp, fn] = counts;
  if (tp + fp == 0) {
    r.precision = fn == 0 ? 1.0 : 0.0;
  } else {
    r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  if (tp + fn == 0) {
    r.recall = fp == 0 ? 1.0 : 0.0;
  } else {
    r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  const double sum = r.precision + r.recall;
  r.f1 = sum > 0.0 ? 2.0 * r.precision * r.recall / sum : 0.0;
  return r;
}

MetricsReport compute_metrics(std::span<const MatchResult> per_image, std::uint32_t round,
                              std::string client_id) {
  Counts total;
  for (const auto& m : per_image) total += counts_of(m);
  return compute_metrics(total, round, std::move(client_id));
}

namespace {

double mean_recall(const RoundMetrics& r) {
  if (r.clients.empty()) return 0.0;
  double s = 0.0;
  for (const auto& c : r.clients) s += c.recall;
  return s / static_cast<double>(r.clients.size());
}

}  // namespace

std::uint32_t select_best_round(std::span<const RoundMetrics> history) {
  if (history.empty()) throw InvalidArgumentError("select_best_round: empty history");
  std::size_t best = 0;
  double best_recall = mean_recall(history[0]);
  for (std::size_t i = 1; i < history.size(); ++i) {
    const double v = mean_recall(history[i]);
    if (v > best_recall) {
      best_recall = v;
      best = i;
    }
  }
  return history[best].round;
}

std::map<std::string, std::uint32_t> best_round_per_client(std::span<const RoundMetrics> history) {
  std::map<std::string, std::uint32_t> best_round;
  std::map<std::string, double> best_recall;
  for (const auto& r : history) {
    for (const auto& c : r.clients) {
      auto it = best_recall.find(c.client_id);
      if (it == best_recall.end() || c.recall > it->second) {
        best_recall[c.client_id] = c.recall;
        best_round[c.client_id] = r.round;
      }
    }
  }
  return best_round;
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return buf;
}

void write_metrics_csv_header(std::ostream& os) {
  os << "round,client_id,precision,recall,f1,tp,fp,fn\n";
}

void write_metrics_csv_row(std::ostream& os, const MetricsReport& r) {
  os << r.round << ',' << r.client_id << ',' << percent(r.precision) << ','
     << percent(r.recall) << ',' << percent(r.f1) << ',' << r.counts.tp << ','
     << r.counts.fp << ',' << r.counts.fn << '\n';
}

}  // namespace fedsten::metrics
