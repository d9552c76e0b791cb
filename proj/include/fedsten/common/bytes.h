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

#ifndef FEDSTEN_COMMON_BYTES_H_
#define FEDSTEN_COMMON_BYTES_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fedsten {

using Bytes = std::vector<std::uint8_t>;

// Appends little-endian encoded values to a byte buffer.
class ByteWriter {
 public:
  ByteWriter() = default;
  explicit ByteWriter(Bytes& out) : out_(&out) {}
  ByteWriter(const ByteWriter&) = delete;
  ByteWriter& operator=(const ByteWriter&) = delete;

  void put_u8(std::uint8_t v);
  void put_u16(std::uint16_t v);
  void put_u32(std::uint32_t v);
  void put_u64(std::uint64_t v);
  void put_f32(float v);
  void put_f64(double v);
  // u32 length prefix followed by the raw bytes.
  void put_string(std::string_view s);
  void put_raw(std::span<const std::uint8_t> bytes);

  Bytes& buffer() { return *out_; }
  Bytes release() { return std::move(*out_); }

 private:
  Bytes owned_;
  Bytes* out_ = &owned_;
};

// Bounds-checked little-endian reader. Every read past the end throws
// DecodeError("truncated frame").
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t get_u8();
  std::uint16_t get_u16();
  std::uint32_t get_u32();
  std::uint64_t get_u64();
  float get_f32();
  double get_f64();
  std::string get_string();
  std::span<const std::uint8_t> get_raw(std::size_t n);

  std::size_t remaining() const { return in_.size() - pos_; }
  std::size_t position() const { return pos_; }
  bool at_end() const { return pos_ == in_.size(); }

 private:
  void require(std::size_t n) const;

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace fedsten

#endif  // FEDSTEN_COMMON_BYTES_H_
