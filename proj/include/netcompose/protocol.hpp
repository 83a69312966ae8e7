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

// Intermediate protocol spoken between the shim, the core and the backends.
//
// Frame layout (big-endian throughout):
//
//   offset  size  field
//        0     1  version        always 0x01
//        1     1  msg_type       MsgType
//        2     2  payload_length
//        4     4  xid
//        8     4  module_id      0 = shim/network origin
//       12     8  datapath_id    0 = not applicable
//       20     n  payload
//
// Payloads:
//   HELLO                count:u8, count x (protocol_id:u8, version:u8)
//   ERROR                code:u16, UTF-8 text
//   MODULE_ANNOUNCEMENT  UTF-8 module name
//   MODULE_ACKNOWLEDGE   UTF-8 module name (assigned id in header.module_id)
//   FENCE                empty
//   SBI                  sbi_kind:u8, then TLVs tag:u8 length:u16 value in
//                        strictly ascending tag order
//
// SBI field tags: 0x10-0x18 header fields (ip fields carry addr:u32 +
// prefix:u8), 0x20 priority:u16, 0x21 idle_timeout:u16, 0x22
// hard_timeout:u16, 0x23 packet_count:u64, 0x24 removal reason:u8, 0x25 port
// up:u8, 0x30 action list. The action list is a sequence of length:u16
// followed by that many bytes: action_kind:u8 and its arguments (OUTPUT
// port:u32, SET_FIELD field tag:u8 + value in the field's natural width).
// STATS_REPLY carries one ascending TLV run per flow entry; every entry ends
// with its 0x30 action list, after which the next entry's run begins.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "netcompose/sbi.hpp"
#include "netcompose/types.hpp"

namespace netcompose {

inline constexpr std::uint8_t kProtocolVersion = 0x01;
inline constexpr std::size_t kHeaderSize = 20;
inline constexpr std::size_t kMaxPayload = 0xFFFF;
/// protocol_id of the simplified SBI spoken inside SBI frames.
inline constexpr std::uint8_t kSimplifiedSbi = 0x11;

enum class MsgType : std::uint8_t {
  Hello = 0x01,
  Error = 0x02,
  ModuleAnnouncement = 0x03,
  ModuleAcknowledge = 0x04,
  Fence = 0x06,
  Sbi = 0x11,
};

enum class SbiKind : std::uint8_t {
  PacketIn = 0x01,
  PacketOut = 0x02,
  FlowModAdd = 0x03,
  FlowModDelete = 0x04,
  FlowRemoved = 0x05,
  PortStatus = 0x06,
  StatsRequest = 0x07,
  StatsReply = 0x08,
};

enum class ErrorCode : std::uint16_t {
  Protocol = 1,
  UnknownXid = 2,
  DuplicateFence = 3,
  UnknownModule = 4,
  DuplicateModule = 5,
  UnknownDatapath = 6,
  BudgetExceeded = 7,
  IncompatibleProtocols = 8,
  UnexpectedMessage = 9,
};

std::string_view error_code_name(ErrorCode code);

struct MessageHeader {
  std::uint8_t version = kProtocolVersion;
  MsgType type = MsgType::Fence;
  std::uint16_t payload_length = 0;
  Xid xid = 0;
  ModuleId module_id = 0;
  DatapathId datapath_id = 0;

  friend bool operator==(const MessageHeader&, const MessageHeader&) = default;
};

struct ProtocolOffer {
  std::uint8_t protocol_id = 0;
  std::uint8_t version = 0;
  friend auto operator<=>(const ProtocolOffer&, const ProtocolOffer&) = default;
};

struct HelloBody {
  std::vector<ProtocolOffer> offered;
  friend bool operator==(const HelloBody&, const HelloBody&) = default;
};

struct ModuleAnnouncement {
  std::string name;
  friend bool operator==(const ModuleAnnouncement&, const ModuleAnnouncement&) = default;
};

struct ModuleAcknowledge {
  std::string name;
  friend bool operator==(const ModuleAcknowledge&, const ModuleAcknowledge&) = default;
};

struct FenceBody {
  friend bool operator==(const FenceBody&, const FenceBody&) = default;
};

struct ErrorBody {
  std::uint16_t code = 0;
  std::string text;
  friend bool operator==(const ErrorBody&, const ErrorBody&) = default;
};

using Payload =
    std::variant<HelloBody, ModuleAnnouncement, ModuleAcknowledge, FenceBody, ErrorBody, SbiMessage>;

struct Message {
  MessageHeader header;
  Payload payload = FenceBody{};

  friend bool operator==(const Message&, const Message&) = default;
};

MsgType payload_type(const Payload& payload);

class EncodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Builds a message with type, length and (for SBI bodies) datapath filled in
/// from the payload. Throws EncodeError when the payload cannot be framed.
Message make_message(Xid xid, ModuleId module_id, DatapathId datapath_id, Payload payload);
Message make_fence(Xid xid, ModuleId module_id);
Message make_error(Xid xid, ModuleId module_id, ErrorCode code, std::string text);
Message make_sbi(Xid xid, ModuleId module_id, SbiMessage body);

/// Payload bytes only. Throws EncodeError on invalid content.
std::vector<std::uint8_t> encode_payload(const Payload& payload);

/// Header followed by payload. Throws EncodeError when the message violates a
/// frame invariant (version, type/payload mismatch, length, SBI datapath).
std::vector<std::uint8_t> encode_message(const Message& msg);

struct Decoded {
  Message message;
  std::size_t consumed = 0;
};

struct NeedMoreData {
  std::size_t expected = 0;  // total bytes required for the next frame
};

struct ProtocolError {
  std::string reason;
};

using DecodeResult = std::variant<Decoded, NeedMoreData, ProtocolError>;

/// Decodes the first frame of `bytes`. Never reads past that frame.
DecodeResult decode_message(std::span<const std::uint8_t> bytes);

/// Offers present in both lists, in `local` order.
std::vector<ProtocolOffer> negotiate_hello(const HelloBody& local, const HelloBody& remote);

/// Default offer: the simplified SBI, version 1.
HelloBody default_hello();

}  // namespace netcompose
