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

// In-process wiring of shim, core and backends. Every frame is encoded,
// written to a channel, and decoded on the other side.
//
// Endpoint 0 is the shim; backends get endpoints 1..n in order of first
// appearance in the module configuration. Frames are delivered in global
// send order unless a shuffle seed is given, in which case the next channel
// to deliver from is drawn at random (each channel stays FIFO).

#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "netcompose/backend.hpp"
#include "netcompose/composition.hpp"
#include "netcompose/core.hpp"
#include "netcompose/event_log.hpp"
#include "netcompose/modules.hpp"
#include "netcompose/network.hpp"
#include "netcompose/transport.hpp"

namespace netcompose {

struct EngineOptions {
  Transport transport = Transport::InMemory;
  std::optional<std::uint64_t> shuffle_seed;
  CoreOptions core;
  BackendOptions backend;
};

class Engine {
 public:
  Engine(CompositionSpec spec, Topology topology, const std::vector<ModuleSetup>& modules,
         EngineOptions options = {});
  ~Engine();

  /// Handshakes and module registration. Returns false when a backend failed
  /// to register.
  bool start();

  void inject(DatapathId dp, const PacketHeaders& headers);
  void advance_time(std::uint64_t to_ms);
  /// Logs the entries of `dp` intersecting `match` (trace stats directive).
  void dump_stats(DatapathId dp, const Match& match);

  /// Delivers frames until every channel is empty.
  void settle();

  EventLog& log() { return log_; }
  const EventLog& log() const { return log_; }
  Core& core() { return *core_; }
  const Core& core() const { return *core_; }
  Network& network() { return *network_; }
  const Network& network() const { return *network_; }
  Backend* backend(const std::string& name);
  std::uint64_t framing_errors() const { return framing_errors_; }

 private:
  struct Link {
    std::unique_ptr<Channel> up;    // endpoint -> core
    std::unique_ptr<Channel> down;  // core -> endpoint
  };
  struct Token {
    EndpointId endpoint;
    bool up;
  };

  void send(EndpointId endpoint, bool up, const Message& msg);
  void send_all(EndpointId endpoint, bool up, const std::vector<Message>& msgs);
  void deliver(const Token& t);
  std::optional<Token> next_token();

  EventLog log_;
  EngineOptions options_;
  std::unique_ptr<Network> network_;
  std::unique_ptr<Shim> shim_;
  std::unique_ptr<Core> core_;
  std::vector<std::unique_ptr<Backend>> backends_;  // endpoint i+1
  std::vector<Link> links_;                         // by endpoint
  std::deque<Token> fifo_;
  std::map<std::pair<EndpointId, bool>, std::size_t> queued_;
  std::mt19937_64 rng_;
  std::uint64_t framing_errors_ = 0;
};

}  // namespace netcompose
