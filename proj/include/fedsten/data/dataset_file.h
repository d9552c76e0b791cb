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

#ifndef FEDSTEN_DATA_DATASET_FILE_H_
#define FEDSTEN_DATA_DATASET_FILE_H_

#include <filesystem>
#include <span>

#include "fedsten/common/bytes.h"
#include "fedsten/data/synth.h"

namespace fedsten::data {

// Binary dataset export, little-endian:
//
//   magic "FLDS" | version u16 = 1 | client_id (u32 len + UTF-8) |
//   sample_count u32 | per sample:
//     split u8 (0 = train, 1 = test) | patient_id (u32 len + UTF-8) |
//     image tensor (ndim u8 | dims u64 x ndim | f32 data) |
//     box_count u32 | boxes as 4 x f32 (x_min, y_min, x_max, y_max)
//
// Train samples precede test samples, each in dataset order.
Bytes encode_dataset(const SplitDataset& dataset);
// Throws DecodeError on malformed input.
SplitDataset decode_dataset(std::span<const std::uint8_t> bytes);

void write_dataset_file(const std::filesystem::path& path, const SplitDataset& dataset);
SplitDataset read_dataset_file(const std::filesystem::path& path);

}  // namespace fedsten::data

#endif  // FEDSTEN_DATA_DATASET_FILE_H_
