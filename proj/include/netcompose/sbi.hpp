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

// Simplified OpenFlow-like southbound vocabulary: packet headers, matches,
// actions, flow rules, network events and controller commands, plus the
// match/conflict algebra the composition policies are built on.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "netcompose/types.hpp"

namespace netcompose {

/// Header fields. The enumerator values double as wire TLV tags.
enum class HeaderField : std::uint8_t {
  InPort = 0x10,
  EthSrc = 0x11,
  EthDst = 0x12,
  EthType = 0x13,
  IpSrc = 0x14,
  IpDst = 0x15,
  IpProto = 0x16,
  TpSrc = 0x17,
  TpDst = 0x18,
};

inline constexpr std::array<HeaderField, 9> kAllHeaderFields = {
    HeaderField::InPort, HeaderField::EthSrc,  HeaderField::EthDst,
    HeaderField::EthType, HeaderField::IpSrc,  HeaderField::IpDst,
    HeaderField::IpProto, HeaderField::TpSrc,  HeaderField::TpDst,
};

std::string_view field_name(HeaderField f);
std::optional<HeaderField> field_from_name(std::string_view name);
std::optional<HeaderField> field_from_tag(std::uint8_t tag);
/// Width in bits of the field's value.
unsigned field_bits(HeaderField f);

struct PacketHeaders {
  PortNo in_port = 0;
  MacAddr eth_src;
  MacAddr eth_dst;
  std::uint16_t eth_type = 0;
  Ipv4Addr ip_src;
  Ipv4Addr ip_dst;
  std::uint8_t ip_proto = 0;
  std::uint16_t tp_src = 0;
  std::uint16_t tp_dst = 0;

  std::uint64_t get(HeaderField f) const;
  /// Stores `value` truncated to the field width.
  void set(HeaderField f, std::uint64_t value);

  friend auto operator<=>(const PacketHeaders&, const PacketHeaders&) = default;
};

/// Per-field optional constraints; an absent member is a wildcard.
struct Match {
  std::optional<PortNo> in_port;
  std::optional<MacAddr> eth_src;
  std::optional<MacAddr> eth_dst;
  std::optional<std::uint16_t> eth_type;
  std::optional<Ipv4Prefix> ip_src;
  std::optional<Ipv4Prefix> ip_dst;
  std::optional<std::uint8_t> ip_proto;
  std::optional<std::uint16_t> tp_src;
  std::optional<std::uint16_t> tp_dst;

  bool is_wildcard() const;
  friend bool operator==(const Match&, const Match&) = default;
};

struct Output {
  PortNo port = 0;
  friend auto operator<=>(const Output&, const Output&) = default;
};
struct Drop {
  friend auto operator<=>(const Drop&, const Drop&) = default;
};
struct SetField {
  HeaderField field = HeaderField::InPort;
  std::uint64_t value = 0;
  friend auto operator<=>(const SetField&, const SetField&) = default;
};
struct Flood {
  friend auto operator<=>(const Flood&, const Flood&) = default;
};
struct ToController {
  friend auto operator<=>(const ToController&, const ToController&) = default;
};

using Action = std::variant<Output, Drop, SetField, Flood, ToController>;
using ActionList = std::vector<Action>;

/// Drop stands alone and SetField values fit their field.
bool actions_valid(const ActionList& actions);

struct FlowRule {
  std::uint16_t priority = 0;
  Match match;
  ActionList actions;
  std::uint16_t idle_timeout = 0;  // seconds, 0 = never
  std::uint16_t hard_timeout = 0;  // seconds, 0 = never

  friend bool operator==(const FlowRule&, const FlowRule&) = default;
};

// Network events.
struct PacketIn {
  DatapathId datapath = 0;
  PacketHeaders headers;  // headers.in_port is the ingress port
  friend bool operator==(const PacketIn&, const PacketIn&) = default;
};
struct PortStatus {
  DatapathId datapath = 0;
  PortNo port = 0;
  bool up = true;
  friend bool operator==(const PortStatus&, const PortStatus&) = default;
};
enum class RemovalReason : std::uint8_t { Idle = 0, Hard = 1 };
struct FlowRemoved {
  DatapathId datapath = 0;
  FlowRule rule;
  RemovalReason reason = RemovalReason::Idle;
  std::uint64_t packet_count = 0;
  friend bool operator==(const FlowRemoved&, const FlowRemoved&) = default;
};
struct FlowStats {
  FlowRule rule;
  std::uint64_t packet_count = 0;
  friend bool operator==(const FlowStats&, const FlowStats&) = default;
};
struct StatsReply {
  DatapathId datapath = 0;
  std::vector<FlowStats> entries;
  friend bool operator==(const StatsReply&, const StatsReply&) = default;
};

// Controller commands.
struct FlowModAdd {
  DatapathId datapath = 0;
  FlowRule rule;
  friend bool operator==(const FlowModAdd&, const FlowModAdd&) = default;
};
struct FlowModDelete {
  DatapathId datapath = 0;
  Match match;
  friend bool operator==(const FlowModDelete&, const FlowModDelete&) = default;
};
struct PacketOut {
  DatapathId datapath = 0;
  PacketHeaders headers;
  ActionList actions;
  friend bool operator==(const PacketOut&, const PacketOut&) = default;
};
struct StatsRequest {
  DatapathId datapath = 0;
  Match match;
  friend bool operator==(const StatsRequest&, const StatsRequest&) = default;
};

using Event = std::variant<PacketIn, PortStatus, FlowRemoved, StatsReply>;
using Command = std::variant<FlowModAdd, FlowModDelete, PacketOut, StatsRequest>;

/// Everything that can travel inside an SBI frame. Alternative index + 1 is
/// the wire sbi_kind.
using SbiMessage = std::variant<PacketIn, PacketOut, FlowModAdd, FlowModDelete,
                                FlowRemoved, PortStatus, StatsRequest, StatsReply>;

enum class EventKind : std::uint8_t { PacketIn, PortStatus, FlowRemoved, StatsReply };

EventKind event_kind(const Event& ev);
std::string_view event_kind_name(EventKind kind);
std::optional<EventKind> event_kind_from_name(std::string_view name);
std::string_view command_name(const Command& cmd);

DatapathId datapath_of(const Event& ev);
DatapathId datapath_of(const Command& cmd);
DatapathId datapath_of(const SbiMessage& msg);

SbiMessage to_sbi(const Event& ev);
SbiMessage to_sbi(const Command& cmd);
std::optional<Event> as_event(const SbiMessage& msg);
std::optional<Command> as_command(const SbiMessage& msg);

// ---------------------------------------------------------------------------
// Match algebra

bool match_covers(const Match& m, const PacketHeaders& h);

/// Returns the match covering exactly the headers covered by both inputs, or
/// nullopt when no header satisfies both.
std::optional<Match> match_intersect(const Match& a, const Match& b);

/// True when every header covered by `inner` is covered by `outer`.
bool match_subsumes(const Match& outer, const Match& inner);

// ---------------------------------------------------------------------------
// Actions

struct OutputTarget {
  enum class Kind : std::uint8_t { Port, Flood, Controller };
  Kind kind = Kind::Port;
  PortNo port = 0;
  friend auto operator<=>(const OutputTarget&, const OutputTarget&) = default;
};

struct ActionOutcome {
  PacketHeaders headers;
  std::set<OutputTarget> outputs;
  bool dropped = false;
  friend bool operator==(const ActionOutcome&, const ActionOutcome&) = default;
};

ActionOutcome apply_actions(const PacketHeaders& h, const ActionList& actions);

// ---------------------------------------------------------------------------
// Conflicts

/// Restricts which differences between two action lists count as conflicts.
/// `output` compares the forwarding decision (drop flag and output set);
/// each listed header field compares the final value written by SetField.
struct ConflictScope {
  bool output = false;
  std::set<HeaderField> fields;
  friend bool operator==(const ConflictScope&, const ConflictScope&) = default;
};

bool actions_differ(const ActionList& a, const ActionList& b,
                    const std::optional<ConflictScope>& scope = std::nullopt);

bool rules_conflict(const FlowRule& r1, const FlowRule& r2,
                    const std::optional<ConflictScope>& scope = std::nullopt);

/// Pairwise command conflict used by the parallel merge. Flow rules conflict
/// through rules_conflict; packet-outs for the same packet conflict on unequal
/// actions; a rule conflicts with a packet-out whose packet it covers when
/// their actions differ. Everything else, and anything on different
/// datapaths, is compatible.
bool commands_conflict(const Command& a, const Command& b,
                       const std::optional<ConflictScope>& scope = std::nullopt);

}  // namespace netcompose
