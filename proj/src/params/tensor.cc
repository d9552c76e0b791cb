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

#include "fedsten/params/tensor.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <utility>

#include "fedsten/common/error.h"

namespace fedsten {

std::uint64_t element_count(std::span<const std::uint64_t> dims) {
  if (dims.empty()) throw InvalidArgumentError("tensor must have at least one dim");
  std::uint64_t n = 1;
  for (std::uint64_t d : dims) {
    if (d == 0) throw InvalidArgumentError("tensor dims must be positive");
    if (n > std::numeric_limits<std::uint64_t>::max() / d) {
      throw InvalidArgumentError("tensor element count overflows");
    }
    n *= d;
  }
  return n;
}

Tensor::Tensor(std::vector<std::uint64_t> dims, std::vector<float> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  const std::uint64_t n = element_count(dims_);
  if (n != data_.size()) {
    throw InvalidArgumentError("tensor data length " + std::to_string(data_.size()) +
                               " does not match dims product " + std::to_string(n));
  }
  if (!all_finite()) throw InvalidArgumentError("tensor contains non-finite values");
}

Tensor Tensor::zeros(std::vector<std::uint64_t> dims) { return filled(std::move(dims), 0.0f); }

Tensor Tensor::filled(std::vector<std::uint64_t> dims, float value) {
  const std::uint64_t n = element_count(dims);
  return Tensor(std::move(dims), std::vector<float>(n, value));
}

bool Tensor::all_finite() const {
  for (float v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool operator==(const Tensor& a, const Tensor& b) {
  if (a.dims_ != b.dims_ || a.data_.size() != b.data_.size()) return false;
  return a.data_.empty() ||
         std::memcmp(a.data_.data(), b.data_.data(), a.data_.size() * sizeof(float)) == 0;
}

}  // namespace fedsten
