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
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "fedsten/common/error.h"
#include "fedsten/common/rng.h"
#include "fedsten/metrics/detection_metrics.h"
#include "support/match_oracle.h"

namespace fedsten::metrics {
namespace {

TEST(IouTest, Fixtures) {
  const Box a{0, 0, 10, 10};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, Box{20, 20, 30, 30}), 0.0);
  EXPECT_DOUBLE_EQ(iou(a, Box{10, 0, 20, 10}), 0.0);  // shared edge only
  // Intersection 50, union 150.
  EXPECT_DOUBLE_EQ(iou(a, Box{5, 0, 15, 10}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(iou(a, Box{2, 2, 4, 4}), 4.0 / 100.0);
}

TEST(IouTest, IsSymmetricAndBounded) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    auto box = [&] {
      const float x = static_cast<float>(rng.uniform(0, 30));
      const float y = static_cast<float>(rng.uniform(0, 30));
      return Box{x, y, x + static_cast<float>(rng.uniform(0.5, 10)),
                 y + static_cast<float>(rng.uniform(0.5, 10))};
    };
    const Box a = box(), b = box();
    EXPECT_DOUBLE_EQ(iou(a, b), iou(b, a));
    EXPECT_GE(iou(a, b), 0.0);
    EXPECT_LE(iou(a, b), 1.0);
  }
}

TEST(IouTest, DegenerateBoxIsRejected) {
  EXPECT_THROW(iou(Box{0, 0, 0, 10}, Box{0, 0, 1, 1}), InvalidArgumentError);
  EXPECT_THROW(iou(Box{0, 0, 1, 1}, Box{5, 5, 4, 6}), InvalidArgumentError);
}

TEST(MatchTest, NoPredictions) {
  const std::vector<Box> gt = {{0, 0, 5, 5}, {10, 10, 15, 15}};
  const auto m = match({}, gt);
  EXPECT_EQ(counts_of(m), (Counts{0, 0, 2}));
}

TEST(MatchTest, PerfectSinglePrediction) {
  const std::vector<Box> gt = {{1, 2, 8, 9}};
  const std::vector<Prediction> preds = {{gt[0], 0.7f}};
  const auto m = match(preds, gt);
  EXPECT_EQ(counts_of(m), (Counts{1, 0, 0}));
  ASSERT_EQ(m.pairs.size(), 1u);
  EXPECT_DOUBLE_EQ(m.pairs[0].iou, 1.0);
}

TEST(MatchTest, DuplicateDetectionBecomesFalsePositive) {
  const std::vector<Box> gt = {{0, 0, 10, 10}};
  const std::vector<Prediction> preds = {{{0, 0, 10, 6}, 0.9f}, {{0, 0, 10, 5.5f}, 0.8f}};
  ASSERT_NEAR(iou(preds[0].box, gt[0]), 0.6, 1e-6);
  ASSERT_NEAR(iou(preds[1].box, gt[0]), 0.55, 1e-6);
  const auto m = match(preds, gt);
  EXPECT_EQ(counts_of(m), (Counts{1, 1, 0}));
  ASSERT_EQ(m.pairs.size(), 1u);
  EXPECT_EQ(m.pairs[0].prediction, 0u);
}

TEST(MatchTest, HigherConfidenceWinsRegardlessOfInputOrder) {
  const std::vector<Box> gt = {{0, 0, 10, 10}};
  const std::vector<Prediction> preds = {{{0, 0, 10, 9}, 0.3f}, {{0, 0, 10, 6}, 0.9f}};
  const auto m = match(preds, gt);
  ASSERT_EQ(m.pairs.size(), 1u);
  EXPECT_EQ(m.pairs[0].prediction, 1u);
}

TEST(MatchTest, ThresholdIsInclusive) {
  const std::vector<Box> gt = {{0, 0, 10, 10}};
  const std::vector<Prediction> half = {{{0, 0, 10, 5}, 0.9f}};
  EXPECT_EQ(match(half, gt).tp, 1u);
  EXPECT_EQ(match(half, gt, 0.51).tp, 0u);
}

TEST(MatchPropertyTest, AgreesWithBruteForceAndConservesCounts) {
  const auto r = testing::run_match_oracle(2025, 1000);
  EXPECT_EQ(r.violations, 0);
  EXPECT_GE(r.agree, r.trials * 95 / 100);
  // Pinned from the first run of this seed.
  EXPECT_EQ(r.agree, 995);
}

TEST(MatchPropertyTest, BruteForceOracleOnAHandCase) {
  // Greedy by confidence takes the middle ground truth first and strands
  // one prediction; the optimum pairs both.
  const std::vector<Box> gt = {{0, 0, 10, 10}, {4, 0, 14, 10}};
  const std::vector<Prediction> preds = {{{2, 0, 12, 10}, 0.9f}, {{0, 0, 10, 10}, 0.8f}};
  EXPECT_EQ(testing::brute_force_tp(preds, gt, 0.5), 2u);
  EXPECT_EQ(testing::brute_force_tp(preds, gt, 0.99), 1u);
  EXPECT_EQ(testing::brute_force_tp({}, gt, 0.5), 0u);
}

TEST(ComputeMetricsTest, DirectFormulas) {
  const auto r = compute_metrics(Counts{2, 1, 1}, 3, "client1");
  EXPECT_EQ(r.round, 3u);
  EXPECT_EQ(r.client_id, "client1");
  EXPECT_EQ(percent(r.precision), "66.67");
  EXPECT_EQ(percent(r.recall), "66.67");
  EXPECT_EQ(percent(r.f1), "66.67");
}

TEST(ComputeMetricsTest, ZeroDivisionRules) {
  const auto missed = compute_metrics(Counts{0, 0, 5});
  EXPECT_EQ(missed.precision, 0.0);
  EXPECT_EQ(missed.recall, 0.0);
  EXPECT_EQ(missed.f1, 0.0);

  const auto nothing = compute_metrics(Counts{0, 0, 0});
  EXPECT_EQ(nothing.precision, 1.0);
  EXPECT_EQ(nothing.recall, 1.0);
  EXPECT_EQ(nothing.f1, 1.0);

  const auto spurious = compute_metrics(Counts{0, 3, 0});
  EXPECT_EQ(spurious.precision, 0.0);
  EXPECT_EQ(spurious.recall, 0.0);
  EXPECT_EQ(spurious.f1, 0.0);
}

TEST(ComputeMetricsTest, PerImageResultsArePooled) {
  std::vector<MatchResult> per_image(2);
  per_image[0].tp = 1;
  per_image[0].fn = 1;
  per_image[1].tp = 1;
  per_image[1].fp = 1;
  EXPECT_EQ(compute_metrics(per_image).counts, (Counts{2, 1, 1}));
}

RoundMetrics round_with(std::uint32_t round, std::vector<double> recalls) {
  RoundMetrics rm;
  rm.round = round;
  for (std::size_t i = 0; i < recalls.size(); ++i) {
    MetricsReport r;
    r.round = round;
    r.client_id = "client" + std::to_string(i + 1);
    r.recall = recalls[i];
    rm.clients.push_back(r);
  }
  return rm;
}

TEST(BestRoundTest, SingleRound) {
  const std::vector<RoundMetrics> h = {round_with(1, {0.2, 0.4})};
  EXPECT_EQ(select_best_round(h), 1u);
}

TEST(BestRoundTest, ArgmaxOfClientMean) {
  const std::vector<RoundMetrics> h = {round_with(1, {0.4, 0.6}), round_with(2, {0.6, 0.8}),
                                       round_with(3, {0.9, 0.3})};
  EXPECT_EQ(select_best_round(h), 2u);
}

TEST(BestRoundTest, TiesGoToEarliestRound) {
  const std::vector<RoundMetrics> h = {round_with(1, {0.7}), round_with(2, {0.7})};
  EXPECT_EQ(select_best_round(h), 1u);
  EXPECT_THROW(select_best_round(std::vector<RoundMetrics>{}), InvalidArgumentError);
}

TEST(BestRoundTest, PerClientArgmax) {
  const std::vector<RoundMetrics> h = {round_with(1, {0.9, 0.1}), round_with(2, {0.2, 0.8}),
                                       round_with(3, {0.9, 0.8})};
  const auto best = best_round_per_client(h);
  EXPECT_EQ(best.at("client1"), 1u);
  EXPECT_EQ(best.at("client2"), 2u);
}

TEST(CsvTest, HeaderAndRowFormat) {
  std::ostringstream os;
  write_metrics_csv_header(os);
  MetricsReport r;
  r.round = 2;
  r.client_id = "client1";
  r.precision = 0.7356;
  r.recall = 0.6701;
  r.f1 = 0.7013;
  r.counts = {65, 23, 32};
  write_metrics_csv_row(os, r);
  EXPECT_EQ(os.str(),
            "round,client_id,precision,recall,f1,tp,fp,fn\n"
            "2,client1,73.56,67.01,70.13,65,23,32\n");
}

TEST(CsvTest, PercentRounding) {
  EXPECT_EQ(percent(0.0), "0.00");
  EXPECT_EQ(percent(1.0), "100.00");
  EXPECT_EQ(percent(2.0 / 3.0), "66.67");
}

}  // namespace
}  // namespace fedsten::metrics
