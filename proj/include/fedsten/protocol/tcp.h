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

#ifndef FEDSTEN_PROTOCOL_TCP_H_
#define FEDSTEN_PROTOCOL_TCP_H_

#include <cstdint>
#include <memory>
#include <string>

#include "fedsten/protocol/channel.h"

namespace fedsten::proto {

// "host:port" split; host may be a dotted IPv4 address or "localhost".
struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  std::string to_string() const { return host + ":" + std::to_string(port); }
};

// Throws InvalidArgumentError on a malformed address.
Endpoint parse_endpoint(const std::string& address);

// One frame per message over a stream socket.
class TcpChannel : public Channel {
 public:
  explicit TcpChannel(int fd);
  ~TcpChannel() override;
  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;

  void send(const Bytes& frame) override;
  Bytes receive() override;
  void close() override;

 private:
  int fd_;
};

class TcpListener {
 public:
  // Binds and listens; port 0 picks an ephemeral port.
  explicit TcpListener(const Endpoint& endpoint);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  // Connections are returned in the order the kernel completed them.
  std::unique_ptr<Channel> accept();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

// Throws TransportError when the connection cannot be established.
std::unique_ptr<Channel> tcp_connect(const Endpoint& endpoint);

}  // namespace fedsten::proto

#endif  // FEDSTEN_PROTOCOL_TCP_H_
