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

// Deterministic simulated data plane and the shim that connects it to the
// core.
//
// Topology file ('#' starts a comment):
//
//   switch <dpid> ports=<n>                       ports are numbered 1..n
//   host <name> mac=<mac> ip=<a.b.c.d> at <dpid>:<port>
//   link <dpid>:<port> <dpid>:<port>
//
// Simulated time is in milliseconds and only moves when advance_time is
// called. Flow timeouts are in seconds.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "netcompose/event_log.hpp"
#include "netcompose/protocol.hpp"
#include "netcompose/sbi.hpp"

namespace netcompose {

struct HostSpec {
  std::string name;
  MacAddr mac;
  Ipv4Addr ip;
  DatapathId datapath = 0;
  PortNo port = 0;
  friend bool operator==(const HostSpec&, const HostSpec&) = default;
};

struct PortRef {
  DatapathId datapath = 0;
  PortNo port = 0;
  friend auto operator<=>(const PortRef&, const PortRef&) = default;
};

struct Topology {
  std::map<DatapathId, PortNo> switches;  // datapath -> port count
  std::vector<HostSpec> hosts;
  std::vector<std::pair<PortRef, PortRef>> links;
};

/// Throws ParseError for malformed lines, duplicate switches or host names,
/// references to missing ports, and ports used twice.
Topology parse_topology(std::string_view text);

struct FlowEntry {
  FlowRule rule;
  std::uint64_t install_ms = 0;
  std::uint64_t last_hit_ms = 0;
  std::uint64_t packet_count = 0;
  std::uint64_t seq = 0;  // insertion order, unique per switch
  friend bool operator==(const FlowEntry&, const FlowEntry&) = default;
};

class Switch {
 public:
  Switch(DatapathId datapath, PortNo ports) : datapath_(datapath), ports_(ports) {}

  DatapathId datapath() const { return datapath_; }
  PortNo port_count() const { return ports_; }
  bool has_port(PortNo p) const { return p >= 1 && p <= ports_; }

  /// Inserts, or overwrites the entry with the same priority and match. An
  /// overwritten entry keeps its insertion position; counters and timers
  /// restart.
  void add(const FlowRule& rule, std::uint64_t now_ms);
  /// Removes every entry whose match is contained in `match`. Returns the
  /// number removed.
  std::size_t remove(const Match& match);

  /// Highest priority covering entry, earliest insertion on ties.
  const FlowEntry* lookup(const PacketHeaders& h) const;
  void hit(const FlowEntry& entry, std::uint64_t now_ms);

  /// Removes expired entries, highest priority first, earliest insertion
  /// first among equal priorities.
  std::vector<FlowRemoved> expire(std::uint64_t now_ms);

  StatsReply stats(const Match& match) const;

  /// Entries ordered by descending priority, then insertion.
  std::vector<FlowEntry> table() const;

 private:
  DatapathId datapath_;
  PortNo ports_;
  std::vector<FlowEntry> entries_;
  std::uint64_t next_seq_ = 1;
};

struct Delivery {
  std::string host;
  PacketHeaders headers;
  std::uint64_t time_ms = 0;
};

/// Switches wired per a Topology. Packet processing records deliveries and
/// drops in the log and returns the table misses.
class Network {
 public:
  static constexpr int kHopLimit = 32;

  explicit Network(Topology topology, EventLog* log = nullptr);

  const Topology& topology() const { return topology_; }
  std::uint64_t now() const { return now_ms_; }

  Switch* find(DatapathId dp);
  const Switch* find(DatapathId dp) const;
  const std::map<DatapathId, Switch>& switches() const { return switches_; }

  /// Packet arriving on `headers.in_port` of `dp` from outside the controlled
  /// network (a host or the trace).
  std::vector<PacketIn> inject(DatapathId dp, const PacketHeaders& headers);
  /// Executes a controller packet-out on its datapath.
  std::vector<PacketIn> packet_out(const PacketOut& out);

  /// Moves the clock forward and expires flows. Time never moves backwards.
  std::vector<FlowRemoved> advance_time(std::uint64_t to_ms);

  const std::vector<Delivery>& deliveries() const { return deliveries_; }
  std::uint64_t drops() const { return drops_; }

 private:
  struct Transit {
    DatapathId datapath;
    PacketHeaders headers;
    int hops;
  };
  void emit(DatapathId dp, PortNo port, const PacketHeaders& h, int hops,
            std::vector<Transit>& work);
  void forward(DatapathId dp, PortNo in_port, const ActionOutcome& outcome, int hops,
               std::vector<Transit>& work, bool allow_controller, std::vector<PacketIn>& misses);
  std::vector<PacketIn> run(std::vector<Transit> work);
  void drop(DatapathId dp, std::string why);
  void note(std::string_view kind, DatapathId dp, std::string detail);

  Topology topology_;
  EventLog* log_;
  std::map<DatapathId, Switch> switches_;
  std::map<PortRef, PortRef> links_;
  std::map<PortRef, std::size_t> host_at_;
  std::vector<Delivery> deliveries_;
  std::uint64_t drops_ = 0;
  std::uint64_t now_ms_ = 0;
};

/// Server-controller adaptor: speaks the intermediate protocol to the core
/// and applies commands to the Network.
class Shim {
 public:
  explicit Shim(Network& network, EventLog* log = nullptr, HelloBody hello = default_hello());

  std::vector<Message> start();
  std::vector<Message> handle(const Message& msg);

  std::vector<Message> inject(DatapathId dp, const PacketHeaders& headers);
  std::vector<Message> advance_time(std::uint64_t to_ms);

  bool ready() const { return ready_; }

 private:
  std::vector<Message> to_frames(const std::vector<PacketIn>& misses);
  Message event_frame(const Event& ev);

  Network& network_;
  EventLog* log_;
  HelloBody hello_;
  bool ready_ = false;
  Xid next_xid_ = 1;
};

}  // namespace netcompose
