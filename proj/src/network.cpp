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

#include "netcompose/network.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "netcompose/overloaded.hpp"
#include "netcompose/parse_error.hpp"
#include "netcompose/text.hpp"

namespace netcompose {

// ---------------------------------------------------------------------------
// Topology file

namespace {

PortRef parse_port_ref(int line, std::string_view tok) {
  auto colon = tok.find(':');
  if (colon == std::string_view::npos) {
    throw ParseError(line, "expected <dpid>:<port>, got '" + std::string(tok) + "'");
  }
  auto dp = parse_uint(tok.substr(0, colon));
  auto port = parse_uint(tok.substr(colon + 1));
  if (!dp || !port || *dp == 0 || *port == 0 || *port > UINT32_MAX) {
    throw ParseError(line, "bad port reference '" + std::string(tok) + "'");
  }
  return PortRef{*dp, static_cast<PortNo>(*port)};
}

std::string_view value_of(int line, std::string_view tok, std::string_view key) {
  if (tok.size() <= key.size() || tok.substr(0, key.size()) != key || tok[key.size()] != '=') {
    throw ParseError(line, "expected " + std::string(key) + "=..., got '" + std::string(tok) + "'");
  }
  return tok.substr(key.size() + 1);
}

}  // namespace

Topology parse_topology(std::string_view text) {
  Topology topo;
  std::set<PortRef> used;
  std::set<std::string> host_names;
  struct Pending {
    int line;
    PortRef ref;
  };
  std::vector<Pending> refs;
  auto claim = [&](int line, PortRef r) {
    if (!used.insert(r).second) {
      throw ParseError(line, "port " + std::to_string(r.datapath) + ":" + std::to_string(r.port) +
                                 " already has a link or host");
    }
    refs.push_back({line, r});
  };

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto t = split_ws(line);
    if (t.empty()) continue;

    if (t[0] == "switch") {
      if (t.size() != 3) throw ParseError(line_no, "expected: switch <dpid> ports=<n>");
      auto dp = parse_uint(t[1]);
      auto ports = parse_uint(value_of(line_no, t[2], "ports"));
      if (!dp || *dp == 0) throw ParseError(line_no, "bad datapath id '" + std::string(t[1]) + "'");
      if (!ports || *ports == 0 || *ports > 0xFFFF) throw ParseError(line_no, "bad port count");
      if (!topo.switches.emplace(*dp, static_cast<PortNo>(*ports)).second) {
        throw ParseError(line_no, "duplicate switch " + std::to_string(*dp));
      }
    } else if (t[0] == "host") {
      if (t.size() != 6 || t[4] != "at") {
        throw ParseError(line_no, "expected: host <name> mac=<mac> ip=<ip> at <dpid>:<port>");
      }
      HostSpec h;
      h.name = std::string(t[1]);
      if (!host_names.insert(h.name).second) throw ParseError(line_no, "duplicate host " + h.name);
      auto mac = parse_mac(value_of(line_no, t[2], "mac"));
      auto ip = parse_ipv4(value_of(line_no, t[3], "ip"));
      if (!mac) throw ParseError(line_no, "bad mac");
      if (!ip) throw ParseError(line_no, "bad ip");
      h.mac = *mac;
      h.ip = *ip;
      PortRef r = parse_port_ref(line_no, t[5]);
      h.datapath = r.datapath;
      h.port = r.port;
      claim(line_no, r);
      topo.hosts.push_back(std::move(h));
    } else if (t[0] == "link") {
      if (t.size() != 3) throw ParseError(line_no, "expected: link <dpid>:<port> <dpid>:<port>");
      PortRef a = parse_port_ref(line_no, t[1]);
      PortRef b = parse_port_ref(line_no, t[2]);
      if (a == b) throw ParseError(line_no, "link to itself");
      claim(line_no, a);
      claim(line_no, b);
      topo.links.emplace_back(a, b);
    } else {
      throw ParseError(line_no, "unknown directive '" + std::string(t[0]) + "'");
    }
  }
  for (const auto& p : refs) {
    auto sw = topo.switches.find(p.ref.datapath);
    if (sw == topo.switches.end()) {
      throw ParseError(p.line, "unknown switch " + std::to_string(p.ref.datapath));
    }
    if (p.ref.port > sw->second) {
      throw ParseError(p.line, "switch " + std::to_string(p.ref.datapath) + " has no port " +
                                   std::to_string(p.ref.port));
    }
  }
  return topo;
}

// ---------------------------------------------------------------------------
// Switch

void Switch::add(const FlowRule& rule, std::uint64_t now_ms) {
  for (auto& e : entries_) {
    if (e.rule.priority == rule.priority && e.rule.match == rule.match) {
      e.rule = rule;
      e.install_ms = now_ms;
      e.last_hit_ms = now_ms;
      e.packet_count = 0;
      return;
    }
  }
  entries_.push_back(FlowEntry{rule, now_ms, now_ms, 0, next_seq_++});
}

std::size_t Switch::remove(const Match& match) {
  auto before = entries_.size();
  std::erase_if(entries_, [&](const FlowEntry& e) { return match_subsumes(match, e.rule.match); });
  return before - entries_.size();
}

const FlowEntry* Switch::lookup(const PacketHeaders& h) const {
  const FlowEntry* best = nullptr;
  for (const auto& e : entries_) {
    if (!match_covers(e.rule.match, h)) continue;
    if (best == nullptr || e.rule.priority > best->rule.priority ||
        (e.rule.priority == best->rule.priority && e.seq < best->seq)) {
      best = &e;
    }
  }
  return best;
}

void Switch::hit(const FlowEntry& entry, std::uint64_t now_ms) {
  for (auto& e : entries_) {
    if (e.seq == entry.seq) {
      ++e.packet_count;
      e.last_hit_ms = now_ms;
      return;
    }
  }
}

namespace {

bool table_order(const FlowEntry& a, const FlowEntry& b) {
  if (a.rule.priority != b.rule.priority) return a.rule.priority > b.rule.priority;
  return a.seq < b.seq;
}

}  // namespace

std::vector<FlowRemoved> Switch::expire(std::uint64_t now_ms) {
  std::vector<std::pair<FlowEntry, RemovalReason>> gone;
  std::erase_if(entries_, [&](const FlowEntry& e) {
    const std::uint64_t hard = e.rule.hard_timeout * 1000ull;
    const std::uint64_t idle = e.rule.idle_timeout * 1000ull;
    if (hard != 0 && now_ms >= e.install_ms + hard) {
      gone.emplace_back(e, RemovalReason::Hard);
      return true;
    }
    if (idle != 0 && now_ms >= e.last_hit_ms + idle) {
      gone.emplace_back(e, RemovalReason::Idle);
      return true;
    }
    return false;
  });
  std::sort(gone.begin(), gone.end(),
            [](const auto& a, const auto& b) { return table_order(a.first, b.first); });
  std::vector<FlowRemoved> out;
  for (const auto& [e, reason] : gone) {
    out.push_back(FlowRemoved{datapath_, e.rule, reason, e.packet_count});
  }
  return out;
}

StatsReply Switch::stats(const Match& match) const {
  StatsReply reply{datapath_, {}};
  for (const auto& e : table()) {
    if (match_intersect(e.rule.match, match)) reply.entries.push_back(FlowStats{e.rule, e.packet_count});
  }
  return reply;
}

std::vector<FlowEntry> Switch::table() const {
  std::vector<FlowEntry> out = entries_;
  std::sort(out.begin(), out.end(), table_order);
  return out;
}

// ---------------------------------------------------------------------------
// Network

Network::Network(Topology topology, EventLog* log) : topology_(std::move(topology)), log_(log) {
  for (const auto& [dp, ports] : topology_.switches) switches_.emplace(dp, Switch(dp, ports));
  for (const auto& [a, b] : topology_.links) {
    links_[a] = b;
    links_[b] = a;
  }
  for (std::size_t i = 0; i < topology_.hosts.size(); ++i) {
    const auto& h = topology_.hosts[i];
    host_at_[PortRef{h.datapath, h.port}] = i;
  }
}

Switch* Network::find(DatapathId dp) {
  auto it = switches_.find(dp);
  return it == switches_.end() ? nullptr : &it->second;
}

const Switch* Network::find(DatapathId dp) const {
  auto it = switches_.find(dp);
  return it == switches_.end() ? nullptr : &it->second;
}

void Network::note(std::string_view kind, DatapathId dp, std::string detail) {
  if (log_ != nullptr) log_->append(kind, 0, kNetworkModuleId, dp, std::move(detail));
}

void Network::drop(DatapathId dp, std::string why) {
  ++drops_;
  note("drop", dp, std::move(why));
}

void Network::emit(DatapathId dp, PortNo port, const PacketHeaders& h, int hops,
                   std::vector<Transit>& work) {
  const Switch* sw = find(dp);
  if (sw == nullptr || !sw->has_port(port)) {
    drop(dp, "no port " + std::to_string(port));
    return;
  }
  PortRef here{dp, port};
  if (auto l = links_.find(here); l != links_.end()) {
    PacketHeaders next = h;
    next.in_port = l->second.port;
    work.push_back(Transit{l->second.datapath, next, hops + 1});
    return;
  }
  if (auto host = host_at_.find(here); host != host_at_.end()) {
    const auto& name = topology_.hosts[host->second].name;
    deliveries_.push_back(Delivery{name, h, now_ms_});
    note("deliver", dp, "host=" + name + " packet=" + format_headers(h));
    return;
  }
  drop(dp, "port " + std::to_string(port) + " not connected");
}

void Network::forward(DatapathId dp, PortNo in_port, const ActionOutcome& outcome, int hops,
                      std::vector<Transit>& work, bool allow_controller,
                      std::vector<PacketIn>& misses) {
  if (outcome.dropped) {
    drop(dp, "dropped by actions");
    return;
  }
  if (outcome.outputs.empty()) {
    drop(dp, "no output action");
    return;
  }
  for (const auto& target : outcome.outputs) {
    switch (target.kind) {
      case OutputTarget::Kind::Port:
        emit(dp, target.port, outcome.headers, hops, work);
        break;
      case OutputTarget::Kind::Flood: {
        const Switch* sw = find(dp);
        for (PortNo p = 1; sw != nullptr && p <= sw->port_count(); ++p) {
          if (p != in_port) emit(dp, p, outcome.headers, hops, work);
        }
        break;
      }
      case OutputTarget::Kind::Controller:
        if (allow_controller) {
          PacketHeaders h = outcome.headers;
          h.in_port = in_port;
          misses.push_back(PacketIn{dp, h});
          note("to_controller", dp, "packet=" + format_headers(h));
        } else {
          drop(dp, "controller output on packet-out");
        }
        break;
    }
  }
}

std::vector<PacketIn> Network::run(std::vector<Transit> initial) {
  std::vector<PacketIn> misses;
  std::deque<Transit> queue(initial.begin(), initial.end());
  while (!queue.empty()) {
    Transit t = std::move(queue.front());
    queue.pop_front();
    if (t.hops > kHopLimit) {
      drop(t.datapath, "hop limit");
      continue;
    }
    Switch* sw = find(t.datapath);
    if (sw == nullptr || !sw->has_port(t.headers.in_port)) {
      drop(t.datapath, "bad ingress port " + std::to_string(t.headers.in_port));
      continue;
    }
    const FlowEntry* entry = sw->lookup(t.headers);
    if (entry == nullptr) {
      misses.push_back(PacketIn{t.datapath, t.headers});
      note("table_miss", t.datapath, "packet=" + format_headers(t.headers));
      continue;
    }
    ActionOutcome outcome = apply_actions(t.headers, entry->rule.actions);
    sw->hit(*entry, now_ms_);
    std::vector<Transit> next;
    forward(t.datapath, t.headers.in_port, outcome, t.hops, next, true, misses);
    queue.insert(queue.end(), next.begin(), next.end());
  }
  return misses;
}

std::vector<PacketIn> Network::inject(DatapathId dp, const PacketHeaders& headers) {
  return run({Transit{dp, headers, 0}});
}

std::vector<PacketIn> Network::packet_out(const PacketOut& out) {
  std::vector<PacketIn> misses;
  if (find(out.datapath) == nullptr) {
    drop(out.datapath, "packet-out to unknown datapath");
    return misses;
  }
  std::vector<Transit> work;
  forward(out.datapath, out.headers.in_port, apply_actions(out.headers, out.actions), 0, work,
          false, misses);
  auto more = run(std::move(work));
  misses.insert(misses.end(), more.begin(), more.end());
  return misses;
}

std::vector<FlowRemoved> Network::advance_time(std::uint64_t to_ms) {
  std::vector<FlowRemoved> out;
  if (to_ms < now_ms_) return out;
  now_ms_ = to_ms;
  if (log_ != nullptr) log_->set_time(now_ms_);
  for (auto& [dp, sw] : switches_) {
    auto removed = sw.expire(now_ms_);
    out.insert(out.end(), removed.begin(), removed.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shim

Shim::Shim(Network& network, EventLog* log, HelloBody hello)
    : network_(network), log_(log), hello_(std::move(hello)) {}

std::vector<Message> Shim::start() { return {make_message(0, 0, 0, hello_)}; }

Message Shim::event_frame(const Event& ev) { return make_sbi(next_xid_++, kNetworkModuleId, to_sbi(ev)); }

std::vector<Message> Shim::to_frames(const std::vector<PacketIn>& misses) {
  std::vector<Message> out;
  for (const auto& m : misses) out.push_back(event_frame(m));
  return out;
}

std::vector<Message> Shim::inject(DatapathId dp, const PacketHeaders& headers) {
  if (log_ != nullptr) {
    log_->append("inject", 0, kNetworkModuleId, dp, "packet=" + format_headers(headers));
  }
  return to_frames(network_.inject(dp, headers));
}

std::vector<Message> Shim::advance_time(std::uint64_t to_ms) {
  std::vector<Message> out;
  for (const auto& r : network_.advance_time(to_ms)) {
    if (log_ != nullptr) {
      log_->append("flow_removed", 0, kNetworkModuleId, r.datapath,
                   format_rule(r.rule) + (r.reason == RemovalReason::Idle ? " reason=idle" : " reason=hard"));
    }
    out.push_back(event_frame(r));
  }
  return out;
}

std::vector<Message> Shim::handle(const Message& msg) {
  const auto& h = msg.header;
  auto note = [&](std::string_view kind, DatapathId dp, std::string detail) {
    if (log_ != nullptr) log_->append(kind, h.xid, h.module_id, dp, std::move(detail));
  };
  return std::visit(
      Overloaded{
          [&](const HelloBody& body) -> std::vector<Message> {
            ready_ = !negotiate_hello(hello_, body).empty();
            return {};
          },
          [&](const ErrorBody& e) -> std::vector<Message> {
            note("shim_error", h.datapath_id, "code=" + std::to_string(e.code) + " " + e.text);
            return {};
          },
          [&](const SbiMessage& body) -> std::vector<Message> {
            auto cmd = as_command(body);
            if (!cmd) {
              return {make_error(h.xid, h.module_id, ErrorCode::UnexpectedMessage,
                                 "events are not accepted by the network side")};
            }
            const DatapathId dp = datapath_of(*cmd);
            Switch* sw = network_.find(dp);
            if (sw == nullptr) {
              return {make_error(h.xid, h.module_id, ErrorCode::UnknownDatapath,
                                 "no datapath " + std::to_string(dp))};
            }
            return std::visit(
                Overloaded{
                    [&](const FlowModAdd& c) -> std::vector<Message> {
                      sw->add(c.rule, network_.now());
                      note("flow_add", dp, format_rule(c.rule));
                      return {};
                    },
                    [&](const FlowModDelete& c) -> std::vector<Message> {
                      auto n = sw->remove(c.match);
                      note("flow_delete", dp, "match=" + format_match(c.match) +
                                                  " removed=" + std::to_string(n));
                      return {};
                    },
                    [&](const PacketOut& c) -> std::vector<Message> {
                      note("packet_out", dp, "actions=" + format_actions(c.actions));
                      return to_frames(network_.packet_out(c));
                    },
                    [&](const StatsRequest& c) -> std::vector<Message> {
                      auto reply = sw->stats(c.match);
                      note("stats", dp, "match=" + format_match(c.match) +
                                            " entries=" + std::to_string(reply.entries.size()));
                      return {make_sbi(h.xid, h.module_id, reply)};
                    },
                },
                *cmd);
          },
          [&](const auto&) -> std::vector<Message> {
            return {make_error(h.xid, h.module_id, ErrorCode::UnexpectedMessage,
                               "unexpected message type at shim")};
          },
      },
      msg.payload);
}

}  // namespace netcompose
