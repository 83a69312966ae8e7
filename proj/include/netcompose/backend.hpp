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

// Client-controller side of the engine. A Backend hosts a set of modules,
// registers them with the core, runs each delivered event to completion on
// the addressed module and follows the module's commands with a FENCE.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "netcompose/event_log.hpp"
#include "netcompose/modules.hpp"
#include "netcompose/protocol.hpp"

namespace netcompose {

struct BackendOptions {
  HelloBody hello = default_hello();
  std::uint64_t step_budget = 100000;
};

class Backend {
 public:
  enum class State { Idle, HelloSent, Registering, Ready, Failed };

  Backend(std::string name, std::vector<std::unique_ptr<AppModule>> modules,
          EventLog* log = nullptr, BackendOptions options = {});

  /// First frame of the session (HELLO).
  std::vector<Message> start();
  /// Processes one frame from the core; returns the frames to send back.
  std::vector<Message> handle(const Message& msg);

  const std::string& name() const { return name_; }
  State state() const { return state_; }
  const std::string& failure() const { return failure_; }
  /// Assigned id, once acknowledged.
  std::optional<ModuleId> module_id(const std::string& module) const;
  AppModule* module(ModuleId id) const;

 private:
  std::vector<Message> on_hello(const Message& msg);
  std::vector<Message> on_ack(const Message& msg);
  std::vector<Message> on_sbi(const Message& msg);
  std::vector<Message> deliver_event(Xid xid, ModuleId id, const Event& ev);
  void fail(std::string why);
  void note(std::string_view kind, Xid xid, ModuleId id, DatapathId dp, std::string detail);

  std::string name_;
  std::vector<std::unique_ptr<AppModule>> modules_;
  EventLog* log_;
  BackendOptions options_;
  State state_ = State::Idle;
  std::string failure_;
  std::map<std::string, ModuleId> ids_;
  std::map<ModuleId, AppModule*> by_id_;
  std::size_t acked_ = 0;
};

}  // namespace netcompose
