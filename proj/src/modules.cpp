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

#include "netcompose/modules.hpp"

#include <set>
#include <span>

#include "netcompose/parse_error.hpp"
#include "netcompose/text.hpp"

namespace netcompose {

std::vector<Command> NopModule::handle(const Event&, StepBudget& budget) {
  budget.step();
  return {};
}

std::optional<PortNo> LearningSwitch::lookup(DatapathId dp, MacAddr mac) const {
  auto t = tables_.find(dp);
  if (t == tables_.end()) return std::nullopt;
  auto it = t->second.find(mac.value);
  if (it == t->second.end()) return std::nullopt;
  return it->second;
}

std::vector<Command> LearningSwitch::handle(const Event& ev, StepBudget& budget) {
  budget.step();
  const auto* pin = std::get_if<PacketIn>(&ev);
  if (pin == nullptr) return {};
  const PacketHeaders& h = pin->headers;
  tables_[pin->datapath][h.eth_src.value] = h.in_port;

  auto port = lookup(pin->datapath, h.eth_dst);
  if (!port) return {PacketOut{pin->datapath, h, {Flood{}}}};

  FlowRule rule;
  rule.priority = kLearningSwitchPriority;
  rule.match.eth_dst = h.eth_dst;
  rule.actions = {Output{*port}};
  rule.idle_timeout = kLearningSwitchIdleTimeout;
  return {FlowModAdd{pin->datapath, rule}, PacketOut{pin->datapath, h, {Output{*port}}}};
}

std::vector<Command> Firewall::handle(const Event& ev, StepBudget& budget) {
  const auto* pin = std::get_if<PacketIn>(&ev);
  if (pin == nullptr) return {};
  for (const auto& entry : acl_) {
    budget.step();
    if (!match_covers(entry.match, pin->headers)) continue;
    if (entry.allow) return {};
    FlowRule rule;
    rule.priority = kFirewallPriority;
    rule.match = entry.match;
    rule.actions = {Drop{}};
    return {FlowModAdd{pin->datapath, rule}};
  }
  return {};
}

const Route* Router::lookup(DatapathId dp, Ipv4Addr dst) const {
  const Route* best = nullptr;
  for (const auto& r : routes_) {
    if (r.datapath && *r.datapath != dp) continue;
    if (!r.prefix.contains(dst)) continue;
    if (best == nullptr || r.prefix.length > best->prefix.length) best = &r;
  }
  return best;
}

std::vector<Command> Router::handle(const Event& ev, StepBudget& budget) {
  budget.step(routes_.size() + 1);
  const auto* pin = std::get_if<PacketIn>(&ev);
  if (pin == nullptr) return {};
  const Route* r = lookup(pin->datapath, pin->headers.ip_dst);
  if (r == nullptr) return {};
  ActionList actions = {SetField{HeaderField::EthDst, r->next_hop.value}, Output{r->port}};
  FlowRule rule;
  rule.priority = kRouterPriority;
  rule.match.ip_dst = r->prefix;
  rule.actions = actions;
  return {FlowModAdd{pin->datapath, rule}, PacketOut{pin->datapath, pin->headers, actions}};
}

std::vector<Command> LoadBalancer::handle(const Event& ev, StepBudget& budget) {
  budget.step();
  const auto* pin = std::get_if<PacketIn>(&ev);
  if (pin == nullptr || pool_.servers.empty()) return {};
  if (pool_.datapath && *pool_.datapath != pin->datapath) return {};
  const PacketHeaders& h = pin->headers;
  if (h.ip_dst != pool_.vip) return {};

  const Server& s = pool_.servers[cursor_];
  cursor_ = (cursor_ + 1) % pool_.servers.size();

  ActionList actions = {SetField{HeaderField::IpDst, s.ip.value},
                        SetField{HeaderField::EthDst, s.mac.value}, Output{s.port}};
  FlowRule rule;
  rule.priority = kLoadBalancerPriority;
  rule.match.ip_src = Ipv4Prefix::host(h.ip_src);
  rule.match.ip_dst = Ipv4Prefix::host(pool_.vip);
  rule.match.tp_src = h.tp_src;
  rule.actions = actions;
  return {FlowModAdd{pin->datapath, rule}, PacketOut{pin->datapath, h, actions}};
}

// ---------------------------------------------------------------------------
// Configuration

std::string_view module_type_name(ModuleType type) {
  switch (type) {
    case ModuleType::Firewall: return "firewall";
    case ModuleType::Router: return "router";
    case ModuleType::LoadBalancer: return "load_balancer";
    case ModuleType::LearningSwitch: return "learning_switch";
    case ModuleType::Nop: return "nop";
  }
  return "?";
}

namespace {

std::optional<ModuleType> module_type_from_name(std::string_view s) {
  for (auto t : {ModuleType::Firewall, ModuleType::Router, ModuleType::LoadBalancer,
                 ModuleType::LearningSwitch, ModuleType::Nop}) {
    if (module_type_name(t) == s) return t;
  }
  return std::nullopt;
}

using KeyValues = std::map<std::string, std::string, std::less<>>;

KeyValues key_values(int line, std::span<const std::string_view> tokens) {
  KeyValues kv;
  for (auto tok : tokens) {
    auto eq = tok.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw ParseError(line, "expected key=value, got '" + std::string(tok) + "'");
    }
    auto [it, inserted] = kv.emplace(std::string(tok.substr(0, eq)), std::string(tok.substr(eq + 1)));
    if (!inserted) throw ParseError(line, "repeated key '" + it->first + "'");
  }
  return kv;
}

void check_keys(int line, const KeyValues& kv, std::initializer_list<std::string_view> required,
                std::initializer_list<std::string_view> optional) {
  for (auto k : required) {
    if (kv.find(k) == kv.end()) throw ParseError(line, "missing " + std::string(k) + "=");
  }
  for (const auto& [k, v] : kv) {
    bool known = false;
    for (auto r : required) known = known || r == k;
    for (auto o : optional) known = known || o == k;
    if (!known) throw ParseError(line, "unexpected key '" + k + "'");
  }
}

std::uint64_t uint_value(int line, std::string_view key, const std::string& v, std::uint64_t max) {
  auto n = parse_uint(v);
  if (!n || *n > max) throw ParseError(line, "bad " + std::string(key) + " '" + v + "'");
  return *n;
}

Ipv4Addr ip_value(int line, std::string_view key, const std::string& v) {
  auto a = parse_ipv4(v);
  if (!a) throw ParseError(line, "bad " + std::string(key) + " '" + v + "'");
  return *a;
}

MacAddr mac_value(int line, std::string_view key, const std::string& v) {
  auto m = parse_mac(v);
  if (!m) throw ParseError(line, "bad " + std::string(key) + " '" + v + "'");
  return *m;
}

void finish_section(const ModuleSetup& m) {
  if (m.type == ModuleType::LoadBalancer && !m.pool) {
    throw ParseError(m.line, "load balancer '" + m.name + "' has no vip line");
  }
}

}  // namespace

std::vector<ModuleSetup> parse_module_config(std::string_view text) {
  std::vector<ModuleSetup> out;
  std::set<std::string, std::less<>> names;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    std::string_view head = tokens[0];
    std::span<const std::string_view> rest(tokens.data() + 1, tokens.size() - 1);

    if (head == "module") {
      if (!out.empty()) finish_section(out.back());
      if (rest.empty() || rest[0].find('=') != std::string_view::npos) {
        throw ParseError(line_no, "module needs a name");
      }
      ModuleSetup m;
      m.name = std::string(rest[0]);
      m.line = line_no;
      if (!names.insert(m.name).second) throw ParseError(line_no, "duplicate module '" + m.name + "'");
      auto kv = key_values(line_no, rest.subspan(1));
      check_keys(line_no, kv, {"type"}, {"backend"});
      auto type = module_type_from_name(kv["type"]);
      if (!type) throw ParseError(line_no, "unknown module type '" + kv["type"] + "'");
      m.type = *type;
      if (auto b = kv.find("backend"); b != kv.end()) {
        if (b->second.empty()) throw ParseError(line_no, "empty backend name");
        m.backend = b->second;
      }
      out.push_back(std::move(m));
      continue;
    }

    if (out.empty()) throw ParseError(line_no, "'" + std::string(head) + "' outside a module section");
    ModuleSetup& m = out.back();
    auto wrong_section = [&] {
      return ParseError(line_no, "'" + std::string(head) + "' not valid for module type " +
                                     std::string(module_type_name(m.type)));
    };

    if (head == "deny" || head == "allow") {
      if (m.type != ModuleType::Firewall) throw wrong_section();
      AclEntry e;
      e.allow = head == "allow";
      for (auto tok : rest) {
        auto eq = tok.find('=');
        if (eq == std::string_view::npos) {
          throw ParseError(line_no, "expected field=value, got '" + std::string(tok) + "'");
        }
        try {
          set_match_field(e.match, tok.substr(0, eq), tok.substr(eq + 1));
        } catch (const TextError& err) {
          throw ParseError(line_no, err.what());
        }
      }
      m.acl.push_back(std::move(e));
    } else if (head == "route") {
      if (m.type != ModuleType::Router) throw wrong_section();
      auto kv = key_values(line_no, rest);
      check_keys(line_no, kv, {"prefix", "port", "mac"}, {"dp"});
      Route r;
      if (kv.count("dp")) r.datapath = uint_value(line_no, "dp", kv["dp"], UINT64_MAX);
      auto prefix = parse_prefix(kv["prefix"]);
      if (!prefix) throw ParseError(line_no, "bad prefix '" + kv["prefix"] + "'");
      r.prefix = *prefix;
      r.port = static_cast<PortNo>(uint_value(line_no, "port", kv["port"], UINT32_MAX));
      r.next_hop = mac_value(line_no, "mac", kv["mac"]);
      m.routes.push_back(r);
    } else if (head == "vip") {
      if (m.type != ModuleType::LoadBalancer) throw wrong_section();
      if (m.pool) throw ParseError(line_no, "second vip line");
      auto kv = key_values(line_no, rest);
      check_keys(line_no, kv, {"ip"}, {"dp"});
      Pool p;
      p.vip = ip_value(line_no, "ip", kv["ip"]);
      if (kv.count("dp")) p.datapath = uint_value(line_no, "dp", kv["dp"], UINT64_MAX);
      m.pool = std::move(p);
    } else if (head == "server") {
      if (m.type != ModuleType::LoadBalancer) throw wrong_section();
      if (!m.pool) throw ParseError(line_no, "server before vip");
      auto kv = key_values(line_no, rest);
      check_keys(line_no, kv, {"ip", "mac", "port"}, {});
      m.pool->servers.push_back(Server{ip_value(line_no, "ip", kv["ip"]),
                                       mac_value(line_no, "mac", kv["mac"]),
                                       static_cast<PortNo>(uint_value(line_no, "port", kv["port"],
                                                                      UINT32_MAX))});
    } else {
      throw ParseError(line_no, "unknown directive '" + std::string(head) + "'");
    }
  }
  if (!out.empty()) finish_section(out.back());
  return out;
}

std::unique_ptr<AppModule> make_module(const ModuleSetup& setup) {
  switch (setup.type) {
    case ModuleType::Firewall: return std::make_unique<Firewall>(setup.name, setup.acl);
    case ModuleType::Router: return std::make_unique<Router>(setup.name, setup.routes);
    case ModuleType::LoadBalancer:
      return std::make_unique<LoadBalancer>(setup.name, setup.pool.value_or(Pool{}));
    case ModuleType::LearningSwitch: return std::make_unique<LearningSwitch>(setup.name);
    case ModuleType::Nop: return std::make_unique<NopModule>(setup.name);
  }
  return nullptr;
}

}  // namespace netcompose
