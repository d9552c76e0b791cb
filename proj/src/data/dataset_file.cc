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

#include "fedsten/data/dataset_file.h"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "fedsten/common/error.h"
#include "fedsten/params/serialize.h"

namespace fedsten::data {

namespace {

constexpr std::uint8_t kFileMagic[4] = {'F', 'L', 'D', 'S'};
constexpr std::uint16_t kFileVersion = 1;

void put_sample(ByteWriter& out, const DetectionSample& s, std::uint8_t split) {
  out.put_u8(split);
  out.put_string(s.patient_id);
  serialize_tensor(s.image, out);
  out.put_u32(static_cast<std::uint32_t>(s.boxes.size()));
  for (const auto& b : s.boxes) {
    out.put_f32(b.x_min);
    out.put_f32(b.y_min);
    out.put_f32(b.x_max);
    out.put_f32(b.y_max);
  }
}

}  // namespace

Bytes encode_dataset(const SplitDataset& dataset) {
  Bytes bytes;
  ByteWriter out(bytes);
  out.put_raw(kFileMagic);
  out.put_u16(kFileVersion);
  out.put_string(dataset.client_id);
  out.put_u32(static_cast<std::uint32_t>(dataset.size()));
  for (const auto& s : dataset.train) put_sample(out, s, 0);
  for (const auto& s : dataset.test) put_sample(out, s, 1);
  return bytes;
}

SplitDataset decode_dataset(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  auto magic = in.get_raw(4);
  if (!std::equal(magic.begin(), magic.end(), std::begin(kFileMagic))) {
    throw DecodeError("bad magic");
  }
  if (in.get_u16() != kFileVersion) throw DecodeError("unsupported version");
  SplitDataset ds;
  ds.client_id = in.get_string();
  const std::uint32_t count = in.get_u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint8_t split = in.get_u8();
    if (split > 1) throw DecodeError("invalid split tag");
    DetectionSample s;
    s.patient_id = in.get_string();
    s.image = deserialize_tensor(in);
    const std::uint32_t n_boxes = in.get_u32();
    if (n_boxes > in.remaining() / 16) throw DecodeError("truncated frame");
    for (std::uint32_t b = 0; b < n_boxes; ++b) {
      Box box;
      box.x_min = in.get_f32();
      box.y_min = in.get_f32();
      box.x_max = in.get_f32();
      box.y_max = in.get_f32();
      s.boxes.push_back(box);
    }
    (split == 0 ? ds.train : ds.test).push_back(std::move(s));
  }
  if (!in.at_end()) throw DecodeError("trailing bytes after dataset");
  return ds;
}

void write_dataset_file(const std::filesystem::path& path, const SplitDataset& dataset) {
  const Bytes bytes = encode_dataset(dataset);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgumentError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InvalidArgumentError("failed writing " + path.string());
}

SplitDataset read_dataset_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgumentError("cannot open " + path.string());
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_dataset(bytes);
}

}  // namespace fedsten::data
