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

#ifndef FEDSTEN_PARAMS_TENSOR_H_
#define FEDSTEN_PARAMS_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fedsten {

// Dense row-major f32 tensor. Every dim is positive, data().size() equals
// the product of dims, and every element is finite.
class Tensor {
 public:
  Tensor() = default;
  // Throws InvalidArgumentError if the invariants do not hold.
  Tensor(std::vector<std::uint64_t> dims, std::vector<float> data);

  static Tensor zeros(std::vector<std::uint64_t> dims);
  static Tensor filled(std::vector<std::uint64_t> dims, float value);

  std::span<const std::uint64_t> dims() const { return dims_; }
  std::span<const float> data() const { return data_; }
  // Callers writing through this span must keep values finite.
  std::span<float> mutable_data() { return data_; }
  std::size_t size() const { return data_.size(); }
  float operator[](std::size_t i) const { return data_[i]; }

  bool same_shape(const Tensor& other) const { return dims_ == other.dims_; }
  bool all_finite() const;

  // Bitwise equality of dims and element bit patterns.
  friend bool operator==(const Tensor& a, const Tensor& b);

 private:
  std::vector<std::uint64_t> dims_;
  std::vector<float> data_;
};

// Product of dims; throws InvalidArgumentError on zero dims or overflow.
std::uint64_t element_count(std::span<const std::uint64_t> dims);

}  // namespace fedsten

#endif  // FEDSTEN_PARAMS_TENSOR_H_
