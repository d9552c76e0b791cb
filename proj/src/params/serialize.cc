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

#include "fedsten/params/serialize.h"

#include <limits>
#include <string>
#include <utility>

#include "fedsten/common/error.h"

namespace fedsten {

void serialize_tensor(const Tensor& tensor, ByteWriter& out) {
  out.put_u8(static_cast<std::uint8_t>(tensor.dims().size()));
  for (std::uint64_t d : tensor.dims()) out.put_u64(d);
  for (float v : tensor.data()) out.put_f32(v);
}

void serialize_into(const NamedParameterSet& set, ByteWriter& out) {
  out.put_u32(static_cast<std::uint32_t>(set.size()));
  for (const auto& entry : set) {
    out.put_string(entry.name);
    out.put_u8(static_cast<std::uint8_t>(entry.role));
    serialize_tensor(entry.tensor, out);
  }
}

Bytes serialize(const NamedParameterSet& set) {
  Bytes bytes;
  ByteWriter out(bytes);
  serialize_into(set, out);
  return bytes;
}

Tensor deserialize_tensor(ByteReader& in) {
  const std::uint8_t ndim = in.get_u8();
  if (ndim == 0) throw DecodeError("tensor with zero dims");
  std::vector<std::uint64_t> dims(ndim);
  std::uint64_t count = 1;
  for (auto& d : dims) {
    d = in.get_u64();
    if (d == 0) throw DecodeError("tensor dim is zero");
    if (count > std::numeric_limits<std::uint64_t>::max() / d) {
      throw DecodeError("length overflow");
    }
    count *= d;
  }
  if (count > in.remaining() / sizeof(float)) {
    // Either absurdly large or simply cut short.
    if (count > std::numeric_limits<std::uint64_t>::max() / sizeof(float)) {
      throw DecodeError("length overflow");
    }
    throw DecodeError("truncated frame");
  }
  std::vector<float> data(count);
  for (auto& v : data) v = in.get_f32();
  try {
    return Tensor(std::move(dims), std::move(data));
  } catch (const InvalidArgumentError& e) {
    throw DecodeError(std::string("invalid tensor: ") + e.what());
  }
}

NamedParameterSet deserialize_from(ByteReader& in) {
  const std::uint32_t count = in.get_u32();
  NamedParameterSet set;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = in.get_string();
    const std::uint8_t role = in.get_u8();
    if (role > 1) throw DecodeError("invalid role " + std::to_string(role));
    Tensor tensor = deserialize_tensor(in);
    try {
      set.add(std::move(name), static_cast<Role>(role), std::move(tensor));
    } catch (const InvalidArgumentError& e) {
      throw DecodeError(e.what());
    }
  }
  return set;
}

NamedParameterSet deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  NamedParameterSet set = deserialize_from(in);
  if (!in.at_end()) throw DecodeError("trailing bytes after parameter set");
  return set;
}

}  // namespace fedsten
