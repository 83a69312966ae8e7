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

// The composition core: a single-threaded state machine consuming decoded
// frames from the shim and the backends, one at a time, and producing the
// frames to send in response.
//
// Per network event the core assigns an xid and an arrival sequence number,
// walks the execution tree (invoking modules, waiting for their fences,
// merging or chaining their results), and hands the composed commands to an
// OutputScheduler that releases them per datapath in arrival order.

#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "netcompose/composition.hpp"
#include "netcompose/event_log.hpp"
#include "netcompose/protocol.hpp"

namespace netcompose {

using EndpointId = std::uint32_t;
inline constexpr EndpointId kShimEndpoint = 0;

struct Outbound {
  EndpointId to = 0;
  Message message;
};

struct CoreMetrics {
  std::uint64_t events_processed = 0;
  std::uint64_t fences_received = 0;
  std::uint64_t conflicts_detected = 0;
  std::uint64_t resolved_discard = 0;
  std::uint64_t resolved_ignore = 0;
  std::uint64_t resolved_priority = 0;
  std::uint64_t outputs_buffered = 0;
  std::uint64_t protocol_errors = 0;
  std::uint64_t warnings = 0;
};

struct CoreOptions {
  HelloBody hello = default_hello();
  /// A warning is logged whenever more completed outputs than this wait for
  /// earlier events.
  std::size_t buffer_high_water = 64;
};

/// Holds composed outputs until every earlier event on the same datapath has
/// been released.
class OutputScheduler {
 public:
  struct Release {
    std::uint64_t seq = 0;
    Xid xid = 0;
    DatapathId datapath = 0;
    std::vector<TaggedCommand> commands;
  };

  void admit(std::uint64_t seq, DatapathId datapath);

  /// Marks `seq` complete. Returns what can be released now, in order;
  /// `held` is set when `seq` itself has to wait.
  std::vector<Release> complete(std::uint64_t seq, Xid xid, std::vector<TaggedCommand> commands,
                                bool* held = nullptr);

  std::size_t buffered() const;

 private:
  struct Slot {
    std::uint64_t seq = 0;
    bool done = false;
    Release release;
  };
  std::map<DatapathId, std::deque<Slot>> queues_;
  std::map<std::uint64_t, DatapathId> datapath_of_;
};

struct ReadStateTicket {
  Xid core_xid = 0;
  ModuleId module_id = 0;
  Xid module_xid = 0;
  EndpointId endpoint = 0;
};

class Core {
 public:
  Core(CompositionSpec spec, EventLog& log, CoreOptions options = {});
  ~Core();
  Core(const Core&) = delete;
  Core& operator=(const Core&) = delete;

  /// Processes one frame received from `from`.
  std::vector<Outbound> handle(EndpointId from, const Message& msg);

  /// Starts composition for a network event.
  std::vector<Outbound> dispatch_event(const Event& ev);
  std::vector<Outbound> handle_fence(EndpointId from, Xid xid, ModuleId module_id);
  std::vector<Outbound> correlate_reply(Xid core_xid, const StatsReply& reply);

  std::optional<ModuleId> module_id(std::string_view name) const;
  const CompositionSpec& spec() const { return spec_; }
  const CoreMetrics& metrics() const { return metrics_; }
  std::size_t pending_events() const { return pending_.size(); }
  std::size_t outstanding_tickets() const { return tickets_.size(); }

 private:
  struct NodeRun;
  struct PendingEvent;
  struct RegisteredModule {
    ModuleId id = 0;
    std::string name;
    EndpointId endpoint = 0;
  };

  std::vector<Outbound> on_hello(EndpointId from, const Message& msg);
  std::vector<Outbound> on_announcement(EndpointId from, const Message& msg);
  std::vector<Outbound> on_command(EndpointId from, const Message& msg, const Command& cmd);
  Outbound reject(EndpointId from, Xid xid, ModuleId module_id, ErrorCode code, std::string text);

  void start(PendingEvent& pe, NodeRun& run, std::vector<Outbound>& out);
  void start_next_stage(PendingEvent& pe, NodeRun& seq, std::vector<Outbound>& out);
  void finish(PendingEvent& pe, NodeRun& run, std::vector<Outbound>& out);
  void finish_parallel(PendingEvent& pe, NodeRun& run, std::vector<Outbound>& out);
  void compose(PendingEvent& pe, std::vector<Outbound>& out);

  int subtree_priority(const ExecNode& node) const;
  std::size_t subtree_order(const ExecNode& node) const;
  ModuleId subtree_module(const ExecNode& node) const;

  CompositionSpec spec_;
  EventLog& log_;
  CoreOptions options_;
  CoreMetrics metrics_;

  std::map<EndpointId, bool> hello_done_;
  std::map<ModuleId, RegisteredModule> modules_;
  std::map<std::string, ModuleId, std::less<>> by_name_;
  ModuleId next_module_id_ = 1;

  Xid next_xid_ = 1;
  std::uint64_t next_seq_ = 1;
  std::map<Xid, std::unique_ptr<PendingEvent>> pending_;
  std::map<Xid, ReadStateTicket> tickets_;
  std::set<Xid> completed_;
  OutputScheduler scheduler_;
};

}  // namespace netcompose
