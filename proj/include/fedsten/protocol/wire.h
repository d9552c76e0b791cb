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

#ifndef FEDSTEN_PROTOCOL_WIRE_H_
#define FEDSTEN_PROTOCOL_WIRE_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <variant>

#include "fedsten/common/bytes.h"
#include "fedsten/metrics/detection_metrics.h"
#include "fedsten/params/named_parameter_set.h"

namespace fedsten::proto {

// Frame layout (little-endian):
//   magic "FLSD" | version u16 | msg_type u8 | payload_len u64 | payload
inline constexpr std::array<std::uint8_t, 4> kMagic = {'F', 'L', 'S', 'D'};
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 4 + 2 + 1 + 8;
// Upper bound accepted for payload_len; larger values are "length overflow".
inline constexpr std::uint64_t kMaxPayload = std::uint64_t{1} << 32;

enum class MessageType : std::uint8_t {
  kInitModel = 0,
  kTrainRequest = 1,
  kWeightUpdate = 2,
  kGlobalUpdate = 3,
  kDone = 4,
  kMetrics = 5,
};

// Full model sent once at the start of a run.
struct InitModel {
  NamedParameterSet params;
  friend bool operator==(const InitModel&, const InitModel&) = default;
};

struct TrainRequest {
  std::uint32_t round = 0;
  std::uint32_t epochs = 0;
  friend bool operator==(const TrainRequest&, const TrainRequest&) = default;
};

struct WeightUpdate {
  std::uint32_t round = 0;
  std::string client_id;
  std::uint64_t num_examples = 0;
  NamedParameterSet params;
  friend bool operator==(const WeightUpdate&, const WeightUpdate&) = default;
};

struct GlobalUpdate {
  std::uint32_t round = 0;
  NamedParameterSet params;
  friend bool operator==(const GlobalUpdate&, const GlobalUpdate&) = default;
};

struct Done {
  friend bool operator==(const Done&, const Done&) = default;
};

// Client evaluation after applying GlobalUpdate(round).
struct Metrics {
  metrics::MetricsReport report;
  friend bool operator==(const Metrics&, const Metrics&) = default;
};

using Message = std::variant<InitModel, TrainRequest, WeightUpdate, GlobalUpdate, Done, Metrics>;

MessageType type_of(const Message& msg);
const char* type_name(MessageType type);

Bytes encode_message(const Message& msg);

// Parsed fixed-size frame header.
struct FrameHeader {
  MessageType type = MessageType::kDone;
  std::uint64_t payload_len = 0;
};

// Validates magic, version, type and the payload length bound. `header`
// must hold at least kHeaderSize bytes.
FrameHeader decode_header(std::span<const std::uint8_t> header);

// Decodes exactly one complete frame. Throws DecodeError with one of
// "bad magic", "unsupported version", "unknown message type",
// "truncated frame", "length overflow", or a payload-specific reason.
Message decode_message(std::span<const std::uint8_t> frame);

}  // namespace fedsten::proto

#endif  // FEDSTEN_PROTOCOL_WIRE_H_
