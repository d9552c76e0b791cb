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

#ifndef FEDSTEN_DETECTOR_TRAINER_H_
#define FEDSTEN_DETECTOR_TRAINER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "fedsten/common/rng.h"
#include "fedsten/data/synth.h"
#include "fedsten/detector/adam.h"
#include "fedsten/detector/toy_detector.h"
#include "fedsten/metrics/detection_metrics.h"

namespace fedsten::detector {

struct TrainOptions {
  AdamOptions adam;
  std::uint32_t batch_size = 16;
  // Probability of mirroring each training image (and its boxes).
  double flip_probability = 0.5;

  friend bool operator==(const TrainOptions&, const TrainOptions&) = default;
};

// Model, optimizer moments and the augmentation/shuffle stream of one client.
class TrainerState {
 public:
  TrainerState(ToyDetector model, std::uint64_t seed);

  ToyDetector& model() { return model_; }
  const ToyDetector& model() const { return model_; }
  std::uint64_t step_count() const { return steps_; }
  // Aligned with the parameter entries; empty for statistic entries.
  const std::vector<AdamMoments>& moments() const { return moments_; }

  friend bool operator==(const TrainerState& a, const TrainerState& b) {
    return a.model_ == b.model_ && a.moments_ == b.moments_ && a.steps_ == b.steps_;
  }

 private:
  friend double train_step(TrainerState&, std::span<const data::DetectionSample>, NormMode,
                           const TrainOptions&);
  friend void train_epochs(TrainerState&, std::span<const data::DetectionSample>, std::uint32_t,
                           const TrainOptions&);

  ToyDetector model_;
  std::vector<AdamMoments> moments_;
  std::uint64_t steps_ = 0;
  Rng rng_;
};

// One Adam step on `batch` as given (no augmentation). Statistic entries are
// updated by the running-average rule in train mode and left untouched in
// eval mode; they never receive gradients. Returns the batch loss.
double train_step(TrainerState& state, std::span<const data::DetectionSample> batch, NormMode mode,
                  const TrainOptions& options);

// epochs x ceil(N / batch_size) steps. Each epoch shuffles the data and
// mirrors each image with options.flip_probability. epochs == 0 leaves the
// state untouched. Throws InvalidArgumentError on an empty dataset.
void train_epochs(TrainerState& state, std::span<const data::DetectionSample> dataset,
                  std::uint32_t epochs, const TrainOptions& options);

// Detection counts of `model` over `samples` at the given thresholds.
metrics::Counts evaluate_counts(const ToyDetector& model,
                                std::span<const data::DetectionSample> samples,
                                double confidence_threshold = 0.5,
                                double iou_threshold = metrics::kDefaultIouThreshold);

}  // namespace fedsten::detector

#endif  // FEDSTEN_DETECTOR_TRAINER_H_
