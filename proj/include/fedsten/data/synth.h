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

#ifndef FEDSTEN_DATA_SYNTH_H_
#define FEDSTEN_DATA_SYNTH_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedsten/metrics/box.h"
#include "fedsten/params/tensor.h"

namespace fedsten::data {

// Generation parameters for one client's dataset.
struct ClientProfile {
  std::string client_id;
  std::uint32_t n_patients = 1;
  // Images per patient, uniform in [min, max].
  std::uint32_t min_images_per_patient = 1;
  std::uint32_t max_images_per_patient = 1;
  // Frames of a patient share geometry with small jitter (acquisition as a
  // contrast sequence) instead of being drawn independently (key frames).
  bool sequential = false;
  // Background pixel statistics before clamping to [0, 1].
  double intensity_mean = 0.5;
  double intensity_std = 0.1;
  std::uint32_t min_boxes_per_image = 1;
  std::uint32_t max_boxes_per_image = 1;
  double test_fraction = 0.1;
  std::uint32_t image_size = 32;
  // Box centers fall in distinct cells of a grid x grid partition.
  std::uint32_t grid = 4;

  // Throws InvalidArgumentError when a field is out of range.
  void validate() const;

  friend bool operator==(const ClientProfile&, const ClientProfile&) = default;
};

// Small, key-frame client with up to four stenoses per image and darker
// images: 25 patients, ~125 images.
ClientProfile default_client1_profile();
// Large, sequence client with exactly one stenosis per image and brighter
// low-variance images: 80 patients x 9 frames = 720 images.
ClientProfile default_client2_profile();

struct DetectionSample {
  // dims [1, H, W], values in [0, 1].
  Tensor image;
  std::vector<Box> boxes;
  std::string patient_id;

  friend bool operator==(const DetectionSample&, const DetectionSample&) = default;
};

// Train and test never share a patient.
struct SplitDataset {
  std::string client_id;
  std::vector<DetectionSample> train;
  std::vector<DetectionSample> test;

  std::size_t size() const { return train.size() + test.size(); }
  friend bool operator==(const SplitDataset&, const SplitDataset&) = default;
};

// Deterministic in (profile, seed). Images show bright curvilinear vessels;
// each ground-truth box is centered on a darker elliptical narrowing of a
// vessel. round(n_patients * test_fraction) patients go to the test split,
// chosen so the test image share is as close to test_fraction as possible.
SplitDataset generate(const ClientProfile& profile, std::uint64_t seed);

// Normalized pixel histogram over [0, 1] (value 1.0 falls in the last bin).
// Throws InvalidArgumentError on an empty sample list or n_bins == 0.
std::vector<double> intensity_histogram(std::span<const DetectionSample> samples,
                                        std::size_t n_bins);
std::vector<double> intensity_histogram(const SplitDataset& dataset, std::size_t n_bins);

// Kolmogorov-Smirnov distance between two histograms over the same bins:
// the largest absolute difference of their cumulative sums.
double ks_distance(std::span<const double> a, std::span<const double> b);

}  // namespace fedsten::data

#endif  // FEDSTEN_DATA_SYNTH_H_
