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

#ifndef FEDSTEN_PARAMS_NAMED_PARAMETER_SET_H_
#define FEDSTEN_PARAMS_NAMED_PARAMETER_SET_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fedsten/params/tensor.h"

namespace fedsten {

enum class Role : std::uint8_t {
  kTrainable = 0,
  // Non-trainable running statistics (normalization mean/variance).
  kStatistic = 1,
};

const char* role_name(Role role);

struct ParameterEntry {
  std::string name;
  Role role = Role::kTrainable;
  Tensor tensor;

  friend bool operator==(const ParameterEntry&, const ParameterEntry&) = default;
};

// Ordered collection of uniquely named tensors. Iteration order is
// insertion order; two sets built for the same architecture iterate
// identically.
class NamedParameterSet {
 public:
  using const_iterator = std::vector<ParameterEntry>::const_iterator;

  NamedParameterSet() = default;

  // Throws InvalidArgumentError on an empty or duplicate name.
  void add(std::string name, Role role, Tensor tensor);
  void add(ParameterEntry entry);

  bool contains(std::string_view name) const;
  // nullptr if absent.
  const ParameterEntry* find(std::string_view name) const;
  // Throws InvalidArgumentError if absent.
  const Tensor& at(std::string_view name) const;
  // Entry position; throws InvalidArgumentError if absent.
  std::size_t index_of(std::string_view name) const;

  // Replaces the tensor of an existing entry; dims must match.
  void replace(std::string_view name, Tensor tensor);
  Tensor& mutable_tensor(std::size_t index) { return entries_[index].tensor; }

  const ParameterEntry& entry(std::size_t index) const { return entries_[index]; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const_iterator begin() const { return entries_.begin(); }
  const_iterator end() const { return entries_.end(); }

  std::vector<std::string> names() const;
  std::size_t element_count() const;

  // Same names in the same order with the same roles and dims.
  bool same_schema(const NamedParameterSet& other) const;

  friend bool operator==(const NamedParameterSet& a, const NamedParameterSet& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<ParameterEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Throws SchemaMismatchError describing the first difference, if any.
void require_same_schema(const NamedParameterSet& a, const NamedParameterSet& b);

// Names whose tensors differ bitwise. Requires identical schemas; throws
// SchemaMismatchError otherwise.
std::vector<std::string> diff_names(const NamedParameterSet& a, const NamedParameterSet& b);

}  // namespace fedsten

#endif  // FEDSTEN_PARAMS_NAMED_PARAMETER_SET_H_
