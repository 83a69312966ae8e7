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

// Application modules and the bundled samples.
//
// Module configuration file ('#' starts a comment, blank lines ignored):
//
//   module <name> type=<firewall|router|load_balancer|learning_switch|nop> [backend=<name>]
//
// followed by lines for that module:
//
//   firewall:       deny <field>=<value> ...     allow <field>=<value> ...
//   router:         route [dp=<id>] prefix=<a.b.c.d/n> port=<n> mac=<mac>
//   load_balancer:  vip ip=<a.b.c.d> [dp=<id>]
//                   server ip=<a.b.c.d> mac=<mac> port=<n>
//
// Modules without backend= share the backend named "default".

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "netcompose/sbi.hpp"

namespace netcompose {

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bounds the work a handler may do for one event.
class StepBudget {
 public:
  explicit StepBudget(std::uint64_t limit) : limit_(limit) {}

  void step(std::uint64_t n = 1) {
    used_ += n;
    if (used_ > limit_) throw BudgetExceeded("step budget of " + std::to_string(limit_) + " exceeded");
  }
  std::uint64_t used() const { return used_; }

 private:
  std::uint64_t limit_;
  std::uint64_t used_ = 0;
};

class AppModule {
 public:
  virtual ~AppModule() = default;

  virtual const std::string& name() const = 0;
  /// Must be deterministic given the module state and the event.
  virtual std::vector<Command> handle(const Event& ev, StepBudget& budget) = 0;
  /// Reply to a StatsRequest this module issued earlier.
  virtual void on_stats_reply(const StatsReply&) {}
};

inline constexpr std::uint16_t kFirewallPriority = 200;
inline constexpr std::uint16_t kLoadBalancerPriority = 150;
inline constexpr std::uint16_t kRouterPriority = 100;
inline constexpr std::uint16_t kLearningSwitchPriority = 100;
inline constexpr std::uint16_t kLearningSwitchIdleTimeout = 60;

class NamedModule : public AppModule {
 public:
  explicit NamedModule(std::string name) : name_(std::move(name)) {}
  const std::string& name() const override { return name_; }

 private:
  std::string name_;
};

class NopModule : public NamedModule {
 public:
  using NamedModule::NamedModule;
  std::vector<Command> handle(const Event& ev, StepBudget& budget) override;
};

class LearningSwitch : public NamedModule {
 public:
  using NamedModule::NamedModule;
  std::vector<Command> handle(const Event& ev, StepBudget& budget) override;

  std::optional<PortNo> lookup(DatapathId dp, MacAddr mac) const;

 private:
  std::map<DatapathId, std::map<std::uint64_t, PortNo>> tables_;
};

struct AclEntry {
  Match match;
  bool allow = false;
  friend bool operator==(const AclEntry&, const AclEntry&) = default;
};

class Firewall : public NamedModule {
 public:
  Firewall(std::string name, std::vector<AclEntry> acl)
      : NamedModule(std::move(name)), acl_(std::move(acl)) {}
  std::vector<Command> handle(const Event& ev, StepBudget& budget) override;

 private:
  std::vector<AclEntry> acl_;
};

struct Route {
  std::optional<DatapathId> datapath;  // nullopt = every datapath
  Ipv4Prefix prefix;
  PortNo port = 0;
  MacAddr next_hop;
  friend bool operator==(const Route&, const Route&) = default;
};

class Router : public NamedModule {
 public:
  Router(std::string name, std::vector<Route> routes)
      : NamedModule(std::move(name)), routes_(std::move(routes)) {}
  std::vector<Command> handle(const Event& ev, StepBudget& budget) override;

  /// Longest matching prefix for `dst` on `dp`; the first listed wins a tie.
  const Route* lookup(DatapathId dp, Ipv4Addr dst) const;

 private:
  std::vector<Route> routes_;
};

struct Server {
  Ipv4Addr ip;
  MacAddr mac;
  PortNo port = 0;
  friend bool operator==(const Server&, const Server&) = default;
};

struct Pool {
  Ipv4Addr vip;
  std::optional<DatapathId> datapath;
  std::vector<Server> servers;
  friend bool operator==(const Pool&, const Pool&) = default;
};

class LoadBalancer : public NamedModule {
 public:
  LoadBalancer(std::string name, Pool pool) : NamedModule(std::move(name)), pool_(std::move(pool)) {}
  std::vector<Command> handle(const Event& ev, StepBudget& budget) override;

  std::size_t cursor() const { return cursor_; }

 private:
  Pool pool_;
  std::size_t cursor_ = 0;
};

// ---------------------------------------------------------------------------
// Configuration

enum class ModuleType { Firewall, Router, LoadBalancer, LearningSwitch, Nop };

std::string_view module_type_name(ModuleType type);

struct ModuleSetup {
  std::string name;
  std::string backend = "default";
  ModuleType type = ModuleType::Nop;
  std::vector<AclEntry> acl;
  std::vector<Route> routes;
  std::optional<Pool> pool;
  int line = 0;  // of the module header
};

/// Throws ParseError on malformed input, unknown types or keys, duplicate
/// module names, or lines that do not belong to the current module type.
std::vector<ModuleSetup> parse_module_config(std::string_view text);

std::unique_ptr<AppModule> make_module(const ModuleSetup& setup);

}  // namespace netcompose
