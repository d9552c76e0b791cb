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

#include "fedsten/protocol/tcp.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "fedsten/common/error.h"

namespace fedsten::proto {

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
  throw TransportError(what + ": " + std::strerror(errno));
}

sockaddr_in to_sockaddr(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  const std::string host = ep.host == "localhost" ? "127.0.0.1" : ep.host;
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw InvalidArgumentError("invalid IPv4 address '" + ep.host + "'");
  }
  return addr;
}

void read_exact(int fd, std::uint8_t* dst, std::size_t n) {
  while (n > 0) {
    const ssize_t got = ::recv(fd, dst, n, 0);
    if (got == 0) throw TransportError("peer closed connection");
    if (got < 0) {
      if (errno == EINTR) continue;
      throw_errno("recv");
    }
    dst += got;
    n -= static_cast<std::size_t>(got);
  }
}

}  // namespace

Endpoint parse_endpoint(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon + 1 == address.size()) {
    throw InvalidArgumentError("address must be host:port, got '" + address + "'");
  }
  Endpoint ep;
  ep.host = colon == 0 ? "127.0.0.1" : address.substr(0, colon);
  const std::string port = address.substr(colon + 1);
  unsigned long value = 0;
  try {
    std::size_t used = 0;
    value = std::stoul(port, &used);
    if (used != port.size()) throw std::invalid_argument(port);
  } catch (const std::exception&) {
    throw InvalidArgumentError("invalid port in '" + address + "'");
  }
  if (value > 65535) throw InvalidArgumentError("port out of range in '" + address + "'");
  ep.port = static_cast<std::uint16_t>(value);
  to_sockaddr(ep);  // validates host
  return ep;
}

TcpChannel::TcpChannel(int fd) : fd_(fd) {
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

TcpChannel::~TcpChannel() {
  close();
  if (fd_ >= 0) ::close(fd_);
}

void TcpChannel::send(const Bytes& frame) {
  const std::uint8_t* p = frame.data();
  std::size_t n = frame.size();
  while (n > 0) {
    const ssize_t put = ::send(fd_, p, n, MSG_NOSIGNAL);
    if (put < 0) {
      if (errno == EINTR) continue;
      throw_errno("send");
    }
    p += put;
    n -= static_cast<std::size_t>(put);
  }
}

Bytes TcpChannel::receive() {
  Bytes frame(kHeaderSize);
  read_exact(fd_, frame.data(), kHeaderSize);
  const FrameHeader header = decode_header(frame);
  frame.resize(kHeaderSize + header.payload_len);
  read_exact(fd_, frame.data() + kHeaderSize, header.payload_len);
  return frame;
}

void TcpChannel::close() {
  // shutdown() wakes a receive() blocked in another thread; the descriptor
  // itself is released by the destructor.
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

TcpListener::TcpListener(const Endpoint& endpoint) {
  const sockaddr_in addr = to_sockaddr(endpoint);
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw_errno("socket");
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    const int err = errno;
    ::close(fd_);
    errno = err;
    throw_errno("bind " + endpoint.to_string());
  }
  if (::listen(fd_, 16) != 0) {
    const int err = errno;
    ::close(fd_);
    errno = err;
    throw_errno("listen");
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Channel> TcpListener::accept() {
  for (;;) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) return std::make_unique<TcpChannel>(fd);
    if (errno != EINTR) throw_errno("accept");
  }
}

std::unique_ptr<Channel> tcp_connect(const Endpoint& endpoint) {
  const sockaddr_in addr = to_sockaddr(endpoint);
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw_errno("socket");
  if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    const int err = errno;
    ::close(fd);
    errno = err;
    throw_errno("connect " + endpoint.to_string());
  }
  return std::make_unique<TcpChannel>(fd);
}

}  // namespace fedsten::proto
