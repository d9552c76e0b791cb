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

#include "fedsten/protocol/wire.h"

#include <algorithm>
#include <string>

#include "fedsten/common/error.h"
#include "fedsten/params/serialize.h"

namespace fedsten::proto {

MessageType type_of(const Message& msg) {
  return static_cast<MessageType>(msg.index());
}

const char* type_name(MessageType type) {
  switch (type) {
    case MessageType::kInitModel:
      return "InitModel";
    case MessageType::kTrainRequest:
      return "TrainRequest";
    case MessageType::kWeightUpdate:
      return "WeightUpdate";
    case MessageType::kGlobalUpdate:
      return "GlobalUpdate";
    case MessageType::kDone:
      return "Done";
    case MessageType::kMetrics:
      return "Metrics";
  }
  return "Unknown";
}

namespace {

struct PayloadEncoder {
  ByteWriter& out;

  void operator()(const InitModel& m) const { serialize_into(m.params, out); }
  void operator()(const TrainRequest& m) const {
    out.put_u32(m.round);
    out.put_u32(m.epochs);
  }
  void operator()(const WeightUpdate& m) const {
    out.put_u32(m.round);
    out.put_string(m.client_id);
    out.put_u64(m.num_examples);
    serialize_into(m.params, out);
  }
  void operator()(const GlobalUpdate& m) const {
    out.put_u32(m.round);
    serialize_into(m.params, out);
  }
  void operator()(const Done&) const {}
  void operator()(const Metrics& m) const {
    const auto& r = m.report;
    out.put_u32(r.round);
    out.put_string(r.client_id);
    out.put_f64(r.precision);
    out.put_f64(r.recall);
    out.put_f64(r.f1);
    out.put_u64(r.counts.tp);
    out.put_u64(r.counts.fp);
    out.put_u64(r.counts.fn);
  }
};

Message decode_payload(MessageType type, ByteReader& in) {
  switch (type) {
    case MessageType::kInitModel:
      return InitModel{deserialize_from(in)};
    case MessageType::kTrainRequest: {
      TrainRequest m;
      m.round = in.get_u32();
      m.epochs = in.get_u32();
      return m;
    }
    case MessageType::kWeightUpdate: {
      WeightUpdate m;
      m.round = in.get_u32();
      m.client_id = in.get_string();
      m.num_examples = in.get_u64();
      m.params = deserialize_from(in);
      return m;
    }
    case MessageType::kGlobalUpdate: {
      GlobalUpdate m;
      m.round = in.get_u32();
      m.params = deserialize_from(in);
      return m;
    }
    case MessageType::kDone:
      return Done{};
    case MessageType::kMetrics: {
      Metrics m;
      auto& r = m.report;
      r.round = in.get_u32();
      r.client_id = in.get_string();
      r.precision = in.get_f64();
      r.recall = in.get_f64();
      r.f1 = in.get_f64();
      r.counts.tp = in.get_u64();
      r.counts.fp = in.get_u64();
      r.counts.fn = in.get_u64();
      return m;
    }
  }
  throw DecodeError("unknown message type");
}

}  // namespace

Bytes encode_message(const Message& msg) {
  Bytes frame;
  ByteWriter out(frame);
  out.put_raw(kMagic);
  out.put_u16(kVersion);
  out.put_u8(static_cast<std::uint8_t>(type_of(msg)));
  out.put_u64(0);  // patched below
  std::visit(PayloadEncoder{out}, msg);
  const std::uint64_t len = frame.size() - kHeaderSize;
  for (int i = 0; i < 8; ++i) frame[7 + i] = static_cast<std::uint8_t>(len >> (8 * i));
  return frame;
}

FrameHeader decode_header(std::span<const std::uint8_t> header) {
  if (header.size() < kHeaderSize) throw DecodeError("truncated frame");
  ByteReader in(header.first(kHeaderSize));
  auto magic = in.get_raw(4);
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) throw DecodeError("bad magic");
  if (in.get_u16() != kVersion) throw DecodeError("unsupported version");
  const std::uint8_t type = in.get_u8();
  if (type > static_cast<std::uint8_t>(MessageType::kMetrics)) {
    throw DecodeError("unknown message type " + std::to_string(type));
  }
  const std::uint64_t len = in.get_u64();
  if (len > kMaxPayload) throw DecodeError("length overflow");
  return {static_cast<MessageType>(type), len};
}

Message decode_message(std::span<const std::uint8_t> frame) {
  const FrameHeader header = decode_header(frame);
  const auto body = frame.subspan(kHeaderSize);
  if (body.size() < header.payload_len) throw DecodeError("truncated frame");
  if (body.size() > header.payload_len) throw DecodeError("trailing bytes after frame");
  ByteReader in(body);
  Message msg = decode_payload(header.type, in);
  if (!in.at_end()) throw DecodeError("payload longer than message body");
  return msg;
}

}  // namespace fedsten::proto
