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

#include "fedsten/detector/trainer.h"

#include <numeric>

#include "fedsten/common/error.h"

namespace fedsten::detector {

TrainerState::TrainerState(ToyDetector model, std::uint64_t seed)
    : model_(std::move(model)), moments_(model_.parameters().size()), rng_(seed) {}

double train_step(TrainerState& state, std::span<const data::DetectionSample> batch, NormMode mode,
                  const TrainOptions& options) {
  if (batch.empty()) throw InvalidArgumentError("train_step: empty batch");
  const auto& config = state.model_.config();
  std::vector<Tensor> images;
  std::vector<ImageTargets> targets;
  images.reserve(batch.size());
  targets.reserve(batch.size());
  for (const auto& s : batch) {
    images.push_back(s.image);
    targets.push_back(encode_targets(s.boxes, config));
  }

  NamedParameterSet& params = state.model_.mutable_parameters();
  Buffers grads;
  NormStats stats;
  const double loss =
      loss_and_gradients(config, to_buffers(params), images, targets, mode, &grads, &stats);

  ++state.steps_;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params.entry(i).role != Role::kTrainable) continue;
    adam_update(params.mutable_tensor(i).mutable_data(), std::span<const double>(grads[i]),
                state.moments_[i], state.steps_, options.adam);
  }
  if (mode == NormMode::kTrain) update_running_stats(config, params, stats);
  return loss;
}

void train_epochs(TrainerState& state, std::span<const data::DetectionSample> dataset,
                  std::uint32_t epochs, const TrainOptions& options) {
  if (dataset.empty()) throw InvalidArgumentError("train_epochs: empty dataset");
  if (options.batch_size == 0) throw InvalidArgumentError("train_epochs: batch_size is zero");
  const std::uint32_t image_size = state.model_.config().image_size;
  std::vector<std::size_t> order(dataset.size());
  std::vector<data::DetectionSample> batch;
  for (std::uint32_t e = 0; e < epochs; ++e) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    state.rng_.shuffle(order.begin(), order.end());
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) {
        const auto& src = dataset[order[i]];
        if (state.rng_.bernoulli(options.flip_probability)) {
          batch.push_back({flip_image(src.image), flip_boxes(src.boxes, image_size), src.patient_id});
        } else {
          batch.push_back(src);
        }
      }
      train_step(state, batch, NormMode::kTrain, options);
    }
  }
}

metrics::Counts evaluate_counts(const ToyDetector& model,
                                std::span<const data::DetectionSample> samples,
                                double confidence_threshold, double iou_threshold) {
  metrics::Counts total;
  for (const auto& s : samples) {
    const auto preds = model.predict(s.image, confidence_threshold);
    total += metrics::counts_of(metrics::match(preds, s.boxes, iou_threshold));
  }
  return total;
}

}  // namespace fedsten::detector
