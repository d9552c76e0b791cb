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

#ifndef FEDSTEN_DETECTOR_ADAM_H_
#define FEDSTEN_DETECTOR_ADAM_H_

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace fedsten::detector {

struct AdamOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamOptions&, const AdamOptions&) = default;
};

struct AdamMoments {
  std::vector<double> first;
  std::vector<double> second;

  friend bool operator==(const AdamMoments&, const AdamMoments&) = default;
};

// One bias-corrected Adam step; `step` is 1-based. Moments are kept in
// double whatever the parameter type.
template <typename T>
void adam_update(std::span<T> param, std::span<const double> grad, AdamMoments& moments,
                 std::uint64_t step, const AdamOptions& opt) {
  if (param.size() != grad.size()) throw std::invalid_argument("adam_update: size mismatch");
  if (moments.first.size() != param.size()) {
    moments.first.assign(param.size(), 0.0);
    moments.second.assign(param.size(), 0.0);
  }
  const double t = static_cast<double>(step);
  const double c1 = 1.0 - std::pow(opt.beta1, t);
  const double c2 = 1.0 - std::pow(opt.beta2, t);
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    double& m = moments.first[i];
    double& v = moments.second[i];
    m = opt.beta1 * m + (1.0 - opt.beta1) * g;
    v = opt.beta2 * v + (1.0 - opt.beta2) * g * g;
    const double m_hat = m / c1;
    const double v_hat = v / c2;
    param[i] = static_cast<T>(static_cast<double>(param[i]) -
                              opt.learning_rate * m_hat / (std::sqrt(v_hat) + opt.epsilon));
  }
}

}  // namespace fedsten::detector

#endif  // FEDSTEN_DETECTOR_ADAM_H_
