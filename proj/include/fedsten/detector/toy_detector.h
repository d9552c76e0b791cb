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

#ifndef FEDSTEN_DETECTOR_TOY_DETECTOR_H_
#define FEDSTEN_DETECTOR_TOY_DETECTOR_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fedsten/metrics/box.h"
#include "fedsten/params/named_parameter_set.h"

namespace fedsten::detector {

// Grid-cell detector over a [1, S, S] image.
//
// Backbone: 3x3 conv (1 -> backbone_widths[0]) -> per-channel norm -> 2x2
// average pool -> tanh, followed by 3x3 conv + tanh for each further backbone
// width, all at half resolution. The half-resolution map is cut into
// grid x grid tiles; each tile is one cell.
// Head: per cell, dense + tanh per head_widths entry, then a dense layer with
// 5 outputs: a presence logit and box offsets (tx, ty, tw, th).
struct ToyDetectorConfig {
  std::uint32_t image_size = 32;
  std::uint32_t grid = 4;
  std::vector<std::uint32_t> backbone_widths = {8, 8};
  std::vector<std::uint32_t> head_widths = {16};
  // running = (1 - m) * running + m * batch statistic.
  double norm_momentum = 0.1;
  double norm_eps = 1e-5;
  // Weight of the SmoothL1 box term relative to the presence cross-entropy.
  double loss_reg_weight = 1.0;

  void validate() const;
  std::uint32_t cell_size() const { return image_size / grid; }
  std::uint32_t cell_count() const { return grid * grid; }
  // Width of each cell's feature vector fed to the head.
  std::uint32_t cell_features() const;

  friend bool operator==(const ToyDetectorConfig&, const ToyDetectorConfig&) = default;
};

enum class NormMode {
  // Batch statistics; running statistics are updated by the caller.
  kTrain,
  // Running statistics, nothing updated.
  kEval,
};

struct CellOutput {
  double logit = 0.0;
  std::array<double, 4> offsets{};

  double probability() const;
};

// Cells in row-major order.
struct ImageOutput {
  std::vector<CellOutput> cells;
};

struct CellTarget {
  bool present = false;
  std::array<double, 4> offsets{};
};

using ImageTargets = std::vector<CellTarget>;

// Assigns each box to the cell containing its center; tx, ty are the center
// offset from the cell center in cell units, tw, th the log size in cell
// units. A second box landing in an occupied cell is ignored.
ImageTargets encode_targets(std::span<const Box> boxes, const ToyDetectorConfig& config);

// Inverse of the encoding, clamped so the box lies inside the image with
// positive area.
Box decode_box(std::size_t cell, const std::array<double, 4>& offsets,
               const ToyDetectorConfig& config);

// Per image: sum over cells of the presence cross-entropy plus
// reg_weight * SmoothL1(offset residuals) over positive cells. Averaged over
// images. Infinite logits are allowed and give exact zeros when correct.
double detection_loss(std::span<const ImageOutput> outputs, std::span<const ImageTargets> targets,
                      double reg_weight);

// Horizontal mirror of an image tensor [1, H, W] and of boxes.
Tensor flip_image(const Tensor& image);
std::vector<Box> flip_boxes(std::span<const Box> boxes, std::uint32_t image_size);
// Mirror of an output: cells swap columns and tx changes sign.
ImageOutput flip_output(const ImageOutput& output, const ToyDetectorConfig& config);

// Double-precision working copy of the parameters, aligned with the
// NamedParameterSet entry order.
using Buffers = std::vector<std::vector<double>>;

Buffers to_buffers(const NamedParameterSet& params);

// Names and shapes follow
//   backbone.l0.{w,b}        [C0, 1, 3, 3], [C0]
//   backbone.norm.{w,b}      [C0]
//   backbone.norm.running_{mean,var}  [C0]
//   backbone.l<i>.{w,b}      [Ci, Ci-1, 3, 3], [Ci]
//   head.l<j>.{w,b}          [Hj, in], [Hj]
//   head.out.{w,b}           [5, in], [5]
// with running statistics carrying Role::kStatistic. Weights are drawn
// uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) from `seed`, biases are zero, the
// norm scale is one, running_mean zero and running_var one.
NamedParameterSet init_parameters(const ToyDetectorConfig& config, std::uint64_t seed);

// Throws SchemaMismatchError unless `params` has exactly the layout above.
void check_schema(const ToyDetectorConfig& config, const NamedParameterSet& params);

struct NormStats {
  std::vector<double> mean;
  // Unbiased batch variance.
  std::vector<double> variance;
};

std::vector<ImageOutput> forward(const ToyDetectorConfig& config, const Buffers& params,
                                 std::span<const Tensor> images, NormMode mode,
                                 NormStats* batch_stats = nullptr);

// detection_loss of the forward pass; fills `grads` (same layout as params,
// zeros for statistics) when non-null.
double loss_and_gradients(const ToyDetectorConfig& config, const Buffers& params,
                          std::span<const Tensor> images, std::span<const ImageTargets> targets,
                          NormMode mode, Buffers* grads, NormStats* batch_stats = nullptr);

// Applies one running-average step to the statistic entries of `params`.
void update_running_stats(const ToyDetectorConfig& config, NamedParameterSet& params,
                          const NormStats& batch_stats);

class ToyDetector {
 public:
  ToyDetector(ToyDetectorConfig config, std::uint64_t seed);
  // Throws SchemaMismatchError if params do not fit the config.
  ToyDetector(ToyDetectorConfig config, NamedParameterSet params);

  const ToyDetectorConfig& config() const { return config_; }
  const NamedParameterSet& parameters() const { return params_; }
  NamedParameterSet& mutable_parameters() { return params_; }
  void set_parameters(NamedParameterSet params);

  // In train mode the batch statistics are folded into the running
  // statistics after the pass.
  std::vector<ImageOutput> forward(std::span<const Tensor> images, NormMode mode);
  ImageOutput evaluate(const Tensor& image) const;

  // Cells with probability >= threshold, decoded, by descending confidence.
  std::vector<Prediction> predict(const Tensor& image, double confidence_threshold = 0.5) const;

  friend bool operator==(const ToyDetector& a, const ToyDetector& b) {
    return a.config_ == b.config_ && a.params_ == b.params_;
  }

 private:
  ToyDetectorConfig config_;
  NamedParameterSet params_;
};

}  // namespace fedsten::detector

#endif  // FEDSTEN_DETECTOR_TOY_DETECTOR_H_
