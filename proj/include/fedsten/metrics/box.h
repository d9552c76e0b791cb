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

#ifndef FEDSTEN_METRICS_BOX_H_
#define FEDSTEN_METRICS_BOX_H_

namespace fedsten {

// Axis-aligned box in pixel coordinates; valid when x_min < x_max and
// y_min < y_max.
struct Box {
  float x_min = 0.0f;
  float y_min = 0.0f;
  float x_max = 0.0f;
  float y_max = 0.0f;

  float width() const { return x_max - x_min; }
  float height() const { return y_max - y_min; }
  double area() const { return static_cast<double>(width()) * static_cast<double>(height()); }
  float center_x() const { return 0.5f * (x_min + x_max); }
  float center_y() const { return 0.5f * (y_min + y_max); }
  bool valid() const { return x_min < x_max && y_min < y_max; }

  friend bool operator==(const Box&, const Box&) = default;
};

struct Prediction {
  Box box;
  float confidence = 0.0f;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

}  // namespace fedsten

#endif  // FEDSTEN_METRICS_BOX_H_
