// Copyright 2026 The netcompose Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "netcompose/transport.hpp"

#include <fcntl.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <string>

#include "netcompose/overloaded.hpp"

namespace netcompose {

std::optional<Message> Channel::receive() {
  for (;;) {
    std::span<const std::uint8_t> pending(rx_.data() + read_pos_, rx_.size() - read_pos_);
    auto result = decode_message(pending);
    if (auto* d = std::get_if<Decoded>(&result)) {
      read_pos_ += d->consumed;
      if (read_pos_ == rx_.size()) {
        rx_.clear();
        read_pos_ = 0;
      }
      return std::move(d->message);
    }
    if (auto* e = std::get_if<ProtocolError>(&result)) throw TransportError(e->reason);
    if (!fill()) return std::nullopt;
  }
}

void MemoryChannel::write(std::span<const std::uint8_t> bytes) {
  rx_.insert(rx_.end(), bytes.begin(), bytes.end());
  ++sent_;
}

SocketChannel::SocketChannel() {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
    throw TransportError(std::string("socketpair: ") + std::strerror(errno));
  }
  tx_fd_ = fds[0];
  rx_fd_ = fds[1];
  for (int fd : fds) ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK);
}

SocketChannel::~SocketChannel() {
  if (tx_fd_ >= 0) ::close(tx_fd_);
  if (rx_fd_ >= 0) ::close(rx_fd_);
}

void SocketChannel::write(std::span<const std::uint8_t> bytes) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    ssize_t n = ::send(tx_fd_, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
    if (n > 0) {
      done += static_cast<std::size_t>(n);
      continue;
    }
    if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
      // The peer is this same process; move queued bytes to the receive
      // buffer to make room.
      if (!fill()) throw TransportError("socket stalled");
      continue;
    }
    if (n < 0 && errno == EINTR) continue;
    throw TransportError(std::string("send: ") + std::strerror(errno));
  }
  ++sent_;
}

bool SocketChannel::fill() {
  std::uint8_t buf[16384];
  bool any = false;
  for (;;) {
    ssize_t n = ::recv(rx_fd_, buf, sizeof buf, 0);
    if (n > 0) {
      rx_.insert(rx_.end(), buf, buf + n);
      any = true;
      continue;
    }
    if (n < 0 && errno == EINTR) continue;
    return any;
  }
}

std::unique_ptr<Channel> make_channel(Transport transport) {
  if (transport == Transport::Socket) return std::make_unique<SocketChannel>();
  return std::make_unique<MemoryChannel>();
}

}  // namespace netcompose
