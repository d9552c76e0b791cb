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

#ifndef FEDSTEN_PARAMS_SERIALIZE_H_
#define FEDSTEN_PARAMS_SERIALIZE_H_

#include <span>

#include "fedsten/common/bytes.h"
#include "fedsten/params/named_parameter_set.h"

namespace fedsten {

// Parameter-set encoding shared by the wire protocol and the dataset file:
//
//   entry_count u32
//   per entry: name_len u32 | name UTF-8 | role u8 | ndim u8 |
//              dims u64 x ndim | data f32 x prod(dims)
//
// All integers and floats little-endian.
Bytes serialize(const NamedParameterSet& set);
void serialize_into(const NamedParameterSet& set, ByteWriter& out);

// Tensor body alone: ndim u8 | dims u64 x ndim | data f32 x prod(dims).
void serialize_tensor(const Tensor& tensor, ByteWriter& out);
Tensor deserialize_tensor(ByteReader& in);

// Throws DecodeError on malformed input, including trailing bytes.
NamedParameterSet deserialize(std::span<const std::uint8_t> bytes);
NamedParameterSet deserialize_from(ByteReader& in);

}  // namespace fedsten

#endif  // FEDSTEN_PARAMS_SERIALIZE_H_
