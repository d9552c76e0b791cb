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

#include "fedsten/params/named_parameter_set.h"

#include <sstream>
#include <utility>

#include "fedsten/common/error.h"

namespace fedsten {

namespace {

std::string dims_string(std::span<const std::uint64_t> dims) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
  os << ']';
  return os.str();
}

}  // namespace

const char* role_name(Role role) {
  switch (role) {
    case Role::kTrainable:
      return "trainable";
    case Role::kStatistic:
      return "statistic";
  }
  return "unknown";
}

void NamedParameterSet::add(std::string name, Role role, Tensor tensor) {
  add(ParameterEntry{std::move(name), role, std::move(tensor)});
}

void NamedParameterSet::add(ParameterEntry entry) {
  if (entry.name.empty()) throw InvalidArgumentError("parameter name must not be empty");
  if (index_.contains(entry.name)) {
    throw InvalidArgumentError("duplicate parameter name '" + entry.name + "'");
  }
  index_.emplace(entry.name, entries_.size());
  entries_.push_back(std::move(entry));
}

bool NamedParameterSet::contains(std::string_view name) const {
  return find(name) != nullptr;
}

const ParameterEntry* NamedParameterSet::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

std::size_t NamedParameterSet::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) {
    throw InvalidArgumentError("unknown parameter '" + std::string(name) + "'");
  }
  return it->second;
}

const Tensor& NamedParameterSet::at(std::string_view name) const {
  return entries_[index_of(name)].tensor;
}

void NamedParameterSet::replace(std::string_view name, Tensor tensor) {
  auto& entry = entries_[index_of(name)];
  if (!entry.tensor.same_shape(tensor)) {
    throw SchemaMismatchError("shape mismatch for '" + entry.name + "': " +
                              dims_string(entry.tensor.dims()) + " vs " +
                              dims_string(tensor.dims()));
  }
  entry.tensor = std::move(tensor);
}

std::vector<std::string> NamedParameterSet::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

std::size_t NamedParameterSet::element_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.size();
  return n;
}

bool NamedParameterSet::same_schema(const NamedParameterSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.name != b.name || a.role != b.role || !a.tensor.same_shape(b.tensor)) return false;
  }
  return true;
}

void require_same_schema(const NamedParameterSet& a, const NamedParameterSet& b) {
  if (a.size() != b.size()) {
    const auto& longer = a.size() > b.size() ? a : b;
    const auto& shorter = a.size() > b.size() ? b : a;
    std::string extra;
    for (std::size_t i = 0; i < longer.size() && extra.empty(); ++i) {
      if (!shorter.contains(longer.entry(i).name)) extra = longer.entry(i).name;
    }
    throw SchemaMismatchError("schema mismatch: " + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + " entries" +
                              (extra.empty() ? "" : " ('" + extra + "' unmatched)"));
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.entry(i);
    const auto& y = b.entry(i);
    if (x.name != y.name) {
      throw SchemaMismatchError("schema mismatch at entry " + std::to_string(i) + ": '" +
                                x.name + "' vs '" + y.name + "'");
    }
    if (x.role != y.role) {
      throw SchemaMismatchError("schema mismatch: role of '" + x.name + "' differs");
    }
    if (!x.tensor.same_shape(y.tensor)) {
      throw SchemaMismatchError("schema mismatch: dims of '" + x.name + "' " +
                                dims_string(x.tensor.dims()) + " vs " +
                                dims_string(y.tensor.dims()));
    }
  }
}

std::vector<std::string> diff_names(const NamedParameterSet& a, const NamedParameterSet& b) {
  require_same_schema(a, b);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a.entry(i).tensor == b.entry(i).tensor)) out.push_back(a.entry(i).name);
  }
  return out;
}

}  // namespace fedsten
