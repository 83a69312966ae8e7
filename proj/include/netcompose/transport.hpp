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

// One-directional ordered byte channels carrying encoded frames.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "netcompose/protocol.hpp"

namespace netcompose {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Channel {
 public:
  virtual ~Channel() = default;

  void send(const Message& msg) { write(encode_message(msg)); }

  /// Next complete frame, or nullopt when no full frame is buffered. Throws
  /// TransportError when the buffered bytes do not form a valid frame.
  std::optional<Message> receive();

  /// Drops everything buffered so far (after a framing error).
  void discard_input() {
    while (fill()) {
    }
    rx_.clear();
    read_pos_ = 0;
  }

  std::size_t frames_sent() const { return sent_; }

 protected:
  virtual void write(std::span<const std::uint8_t> bytes) = 0;
  /// Appends whatever the underlying transport has ready to `rx_`. Returns
  /// false when nothing was available.
  virtual bool fill() = 0;

  std::vector<std::uint8_t> rx_;
  std::size_t sent_ = 0;

 private:
  std::size_t read_pos_ = 0;
};

/// Bytes pass through a process-local buffer.
class MemoryChannel final : public Channel {
 protected:
  void write(std::span<const std::uint8_t> bytes) override;
  bool fill() override { return false; }
};

/// Bytes pass through a connected AF_UNIX stream socket pair.
class SocketChannel final : public Channel {
 public:
  SocketChannel();
  ~SocketChannel() override;
  SocketChannel(const SocketChannel&) = delete;
  SocketChannel& operator=(const SocketChannel&) = delete;

 protected:
  void write(std::span<const std::uint8_t> bytes) override;
  bool fill() override;

 private:
  int tx_fd_ = -1;
  int rx_fd_ = -1;
};

enum class Transport { InMemory, Socket };

std::unique_ptr<Channel> make_channel(Transport transport);

}  // namespace netcompose
