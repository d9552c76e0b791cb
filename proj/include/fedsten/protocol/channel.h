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

#ifndef FEDSTEN_PROTOCOL_CHANNEL_H_
#define FEDSTEN_PROTOCOL_CHANNEL_H_

#include <memory>
#include <utility>

#include "fedsten/common/bytes.h"
#include "fedsten/protocol/wire.h"

namespace fedsten::proto {

// Bidirectional, ordered, frame-oriented link between the server and one
// client. send() and receive() may be called from different threads; each
// direction is used by a single thread at a time.
class Channel {
 public:
  virtual ~Channel() = default;

  virtual void send(const Bytes& frame) = 0;
  // Blocks until a full frame arrives. Throws TransportError once the peer
  // has closed and no buffered frames remain.
  virtual Bytes receive() = 0;
  // Idempotent. Unblocks a pending receive() on either side.
  virtual void close() = 0;
};

void send_message(Channel& channel, const Message& msg);
Message receive_message(Channel& channel);

// Two connected in-process endpoints (server side, client side).
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_inproc_pair();

}  // namespace fedsten::proto

#endif  // FEDSTEN_PROTOCOL_CHANNEL_H_
