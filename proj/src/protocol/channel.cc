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

#include "fedsten/protocol/channel.h"

#include <condition_variable>
#include <deque>
#include <mutex>

#include "fedsten/common/error.h"

namespace fedsten::proto {

void send_message(Channel& channel, const Message& msg) { channel.send(encode_message(msg)); }

Message receive_message(Channel& channel) { return decode_message(channel.receive()); }

namespace {

struct Pipe {
  std::mutex mu;
  std::condition_variable cv;
  // queue[i] carries frames towards side i.
  std::deque<Bytes> queue[2];
  bool closed = false;
};

class InprocChannel : public Channel {
 public:
  InprocChannel(std::shared_ptr<Pipe> pipe, int side) : pipe_(std::move(pipe)), side_(side) {}
  ~InprocChannel() override { close(); }

  void send(const Bytes& frame) override {
    std::lock_guard lock(pipe_->mu);
    if (pipe_->closed) throw TransportError("in-process channel closed");
    pipe_->queue[1 - side_].push_back(frame);
    pipe_->cv.notify_all();
  }

  Bytes receive() override {
    std::unique_lock lock(pipe_->mu);
    auto& q = pipe_->queue[side_];
    pipe_->cv.wait(lock, [&] { return !q.empty() || pipe_->closed; });
    if (q.empty()) throw TransportError("peer closed connection");
    Bytes frame = std::move(q.front());
    q.pop_front();
    return frame;
  }

  void close() override {
    std::lock_guard lock(pipe_->mu);
    pipe_->closed = true;
    pipe_->cv.notify_all();
  }

 private:
  std::shared_ptr<Pipe> pipe_;
  int side_;
};

}  // namespace

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_inproc_pair() {
  auto pipe = std::make_shared<Pipe>();
  return {std::make_unique<InprocChannel>(pipe, 0), std::make_unique<InprocChannel>(pipe, 1)};
}

}  // namespace fedsten::proto
