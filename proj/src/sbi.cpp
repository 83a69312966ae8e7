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

#include "netcompose/sbi.hpp"

#include <algorithm>
#include <map>

#include "netcompose/overloaded.hpp"

namespace netcompose {

namespace {

// Intersection of two exact-value constraints.
template <class T>
bool intersect_exact(const std::optional<T>& a, const std::optional<T>& b,
                     std::optional<T>& out) {
  if (a && b) {
    if (*a != *b) return false;
    out = a;
  } else {
    out = a ? a : b;
  }
  return true;
}

bool intersect_prefix(const std::optional<Ipv4Prefix>& a, const std::optional<Ipv4Prefix>& b,
                      std::optional<Ipv4Prefix>& out) {
  if (a && b) {
    if (a->contains(*b)) {
      out = b;
    } else if (b->contains(*a)) {
      out = a;
    } else {
      return false;
    }
  } else {
    out = a ? a : b;
  }
  return true;
}

template <class T>
bool exact_subsumes(const std::optional<T>& outer, const std::optional<T>& inner) {
  return !outer || (inner && *inner == *outer);
}

bool prefix_subsumes(const std::optional<Ipv4Prefix>& outer,
                     const std::optional<Ipv4Prefix>& inner) {
  if (!outer || outer->length == 0) return true;
  return inner && outer->contains(*inner);
}

// What an action list does, restricted to the parts a ConflictScope names.
struct ActionProjection {
  bool forwards = false;
  std::set<OutputTarget> outputs;
  std::map<HeaderField, std::optional<std::uint64_t>> writes;

  friend bool operator==(const ActionProjection&, const ActionProjection&) = default;
};

ActionProjection project(const ActionList& actions, const ConflictScope& scope) {
  ActionProjection p;
  if (scope.output) {
    auto outcome = apply_actions(PacketHeaders{}, actions);
    p.forwards = !outcome.dropped && !outcome.outputs.empty();
    if (p.forwards) p.outputs = std::move(outcome.outputs);
  }
  for (HeaderField f : scope.fields) p.writes[f] = std::nullopt;
  for (const auto& a : actions) {
    if (const auto* sf = std::get_if<SetField>(&a); sf && scope.fields.count(sf->field)) {
      p.writes[sf->field] = sf->value;
    }
  }
  return p;
}

}  // namespace

std::string_view field_name(HeaderField f) {
  switch (f) {
    case HeaderField::InPort: return "in_port";
    case HeaderField::EthSrc: return "eth_src";
    case HeaderField::EthDst: return "eth_dst";
    case HeaderField::EthType: return "eth_type";
    case HeaderField::IpSrc: return "ip_src";
    case HeaderField::IpDst: return "ip_dst";
    case HeaderField::IpProto: return "ip_proto";
    case HeaderField::TpSrc: return "tp_src";
    case HeaderField::TpDst: return "tp_dst";
  }
  return "?";
}

std::optional<HeaderField> field_from_name(std::string_view name) {
  for (HeaderField f : kAllHeaderFields) {
    if (field_name(f) == name) return f;
  }
  return std::nullopt;
}

std::optional<HeaderField> field_from_tag(std::uint8_t tag) {
  if (tag < 0x10 || tag > 0x18) return std::nullopt;
  return static_cast<HeaderField>(tag);
}

unsigned field_bits(HeaderField f) {
  switch (f) {
    case HeaderField::InPort: return 32;
    case HeaderField::EthSrc:
    case HeaderField::EthDst: return 48;
    case HeaderField::EthType: return 16;
    case HeaderField::IpSrc:
    case HeaderField::IpDst: return 32;
    case HeaderField::IpProto: return 8;
    case HeaderField::TpSrc:
    case HeaderField::TpDst: return 16;
  }
  return 0;
}

std::uint64_t PacketHeaders::get(HeaderField f) const {
  switch (f) {
    case HeaderField::InPort: return in_port;
    case HeaderField::EthSrc: return eth_src.value;
    case HeaderField::EthDst: return eth_dst.value;
    case HeaderField::EthType: return eth_type;
    case HeaderField::IpSrc: return ip_src.value;
    case HeaderField::IpDst: return ip_dst.value;
    case HeaderField::IpProto: return ip_proto;
    case HeaderField::TpSrc: return tp_src;
    case HeaderField::TpDst: return tp_dst;
  }
  return 0;
}

void PacketHeaders::set(HeaderField f, std::uint64_t value) {
  switch (f) {
    case HeaderField::InPort: in_port = static_cast<PortNo>(value); break;
    case HeaderField::EthSrc: eth_src = MacAddr{value}; break;
    case HeaderField::EthDst: eth_dst = MacAddr{value}; break;
    case HeaderField::EthType: eth_type = static_cast<std::uint16_t>(value); break;
    case HeaderField::IpSrc: ip_src = Ipv4Addr{static_cast<std::uint32_t>(value)}; break;
    case HeaderField::IpDst: ip_dst = Ipv4Addr{static_cast<std::uint32_t>(value)}; break;
    case HeaderField::IpProto: ip_proto = static_cast<std::uint8_t>(value); break;
    case HeaderField::TpSrc: tp_src = static_cast<std::uint16_t>(value); break;
    case HeaderField::TpDst: tp_dst = static_cast<std::uint16_t>(value); break;
  }
}

bool Match::is_wildcard() const { return *this == Match{}; }

bool actions_valid(const ActionList& actions) {
  bool has_drop = false;
  for (const auto& a : actions) {
    if (std::holds_alternative<Drop>(a)) has_drop = true;
    if (const auto* sf = std::get_if<SetField>(&a)) {
      unsigned bits = field_bits(sf->field);
      if (bits < 64 && (sf->value >> bits) != 0) return false;
    }
  }
  return !has_drop || actions.size() == 1;
}

EventKind event_kind(const Event& ev) { return static_cast<EventKind>(ev.index()); }

std::string_view event_kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::PacketIn: return "packet_in";
    case EventKind::PortStatus: return "port_status";
    case EventKind::FlowRemoved: return "flow_removed";
    case EventKind::StatsReply: return "stats_reply";
  }
  return "?";
}

std::optional<EventKind> event_kind_from_name(std::string_view name) {
  for (auto k : {EventKind::PacketIn, EventKind::PortStatus, EventKind::FlowRemoved,
                 EventKind::StatsReply}) {
    if (event_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view command_name(const Command& cmd) {
  return std::visit(Overloaded{
                        [](const FlowModAdd&) { return std::string_view{"flow_mod_add"}; },
                        [](const FlowModDelete&) { return std::string_view{"flow_mod_delete"}; },
                        [](const PacketOut&) { return std::string_view{"packet_out"}; },
                        [](const StatsRequest&) { return std::string_view{"stats_request"}; },
                    },
                    cmd);
}

DatapathId datapath_of(const Event& ev) {
  return std::visit([](const auto& e) { return e.datapath; }, ev);
}
DatapathId datapath_of(const Command& cmd) {
  return std::visit([](const auto& c) { return c.datapath; }, cmd);
}
DatapathId datapath_of(const SbiMessage& msg) {
  return std::visit([](const auto& m) { return m.datapath; }, msg);
}

SbiMessage to_sbi(const Event& ev) {
  return std::visit([](const auto& e) { return SbiMessage{e}; }, ev);
}
SbiMessage to_sbi(const Command& cmd) {
  return std::visit([](const auto& c) { return SbiMessage{c}; }, cmd);
}

std::optional<Event> as_event(const SbiMessage& msg) {
  return std::visit(Overloaded{
                        [](const PacketIn& m) -> std::optional<Event> { return m; },
                        [](const PortStatus& m) -> std::optional<Event> { return m; },
                        [](const FlowRemoved& m) -> std::optional<Event> { return m; },
                        [](const StatsReply& m) -> std::optional<Event> { return m; },
                        [](const auto&) -> std::optional<Event> { return std::nullopt; },
                    },
                    msg);
}

std::optional<Command> as_command(const SbiMessage& msg) {
  return std::visit(Overloaded{
                        [](const FlowModAdd& m) -> std::optional<Command> { return m; },
                        [](const FlowModDelete& m) -> std::optional<Command> { return m; },
                        [](const PacketOut& m) -> std::optional<Command> { return m; },
                        [](const StatsRequest& m) -> std::optional<Command> { return m; },
                        [](const auto&) -> std::optional<Command> { return std::nullopt; },
                    },
                    msg);
}

bool match_covers(const Match& m, const PacketHeaders& h) {
  if (m.in_port && *m.in_port != h.in_port) return false;
  if (m.eth_src && *m.eth_src != h.eth_src) return false;
  if (m.eth_dst && *m.eth_dst != h.eth_dst) return false;
  if (m.eth_type && *m.eth_type != h.eth_type) return false;
  if (m.ip_src && !m.ip_src->contains(h.ip_src)) return false;
  if (m.ip_dst && !m.ip_dst->contains(h.ip_dst)) return false;
  if (m.ip_proto && *m.ip_proto != h.ip_proto) return false;
  if (m.tp_src && *m.tp_src != h.tp_src) return false;
  if (m.tp_dst && *m.tp_dst != h.tp_dst) return false;
  return true;
}

std::optional<Match> match_intersect(const Match& a, const Match& b) {
  Match out;
  bool ok = intersect_exact(a.in_port, b.in_port, out.in_port) &&
            intersect_exact(a.eth_src, b.eth_src, out.eth_src) &&
            intersect_exact(a.eth_dst, b.eth_dst, out.eth_dst) &&
            intersect_exact(a.eth_type, b.eth_type, out.eth_type) &&
            intersect_prefix(a.ip_src, b.ip_src, out.ip_src) &&
            intersect_prefix(a.ip_dst, b.ip_dst, out.ip_dst) &&
            intersect_exact(a.ip_proto, b.ip_proto, out.ip_proto) &&
            intersect_exact(a.tp_src, b.tp_src, out.tp_src) &&
            intersect_exact(a.tp_dst, b.tp_dst, out.tp_dst);
  if (!ok) return std::nullopt;
  return out;
}

bool match_subsumes(const Match& outer, const Match& inner) {
  return exact_subsumes(outer.in_port, inner.in_port) &&
         exact_subsumes(outer.eth_src, inner.eth_src) &&
         exact_subsumes(outer.eth_dst, inner.eth_dst) &&
         exact_subsumes(outer.eth_type, inner.eth_type) &&
         prefix_subsumes(outer.ip_src, inner.ip_src) &&
         prefix_subsumes(outer.ip_dst, inner.ip_dst) &&
         exact_subsumes(outer.ip_proto, inner.ip_proto) &&
         exact_subsumes(outer.tp_src, inner.tp_src) &&
         exact_subsumes(outer.tp_dst, inner.tp_dst);
}

ActionOutcome apply_actions(const PacketHeaders& h, const ActionList& actions) {
  ActionOutcome out{h, {}, false};
  for (const auto& action : actions) {
    std::visit(Overloaded{
                   [&](const Output& a) {
                     out.outputs.insert({OutputTarget::Kind::Port, a.port});
                   },
                   [&](const Drop&) { out.dropped = true; },
                   [&](const SetField& a) { out.headers.set(a.field, a.value); },
                   [&](const Flood&) { out.outputs.insert({OutputTarget::Kind::Flood, 0}); },
                   [&](const ToController&) {
                     out.outputs.insert({OutputTarget::Kind::Controller, 0});
                   },
               },
               action);
  }
  if (out.dropped) out.outputs.clear();
  return out;
}

bool actions_differ(const ActionList& a, const ActionList& b,
                    const std::optional<ConflictScope>& scope) {
  if (!scope) return a != b;
  return project(a, *scope) != project(b, *scope);
}

bool rules_conflict(const FlowRule& r1, const FlowRule& r2,
                    const std::optional<ConflictScope>& scope) {
  return match_intersect(r1.match, r2.match).has_value() &&
         actions_differ(r1.actions, r2.actions, scope);
}

bool commands_conflict(const Command& a, const Command& b,
                       const std::optional<ConflictScope>& scope) {
  if (datapath_of(a) != datapath_of(b)) return false;
  auto rule_vs_packet = [&](const FlowModAdd& fm, const PacketOut& po) {
    return match_covers(fm.rule.match, po.headers) &&
           actions_differ(fm.rule.actions, po.actions, scope);
  };
  return std::visit(
      Overloaded{
          [&](const FlowModAdd& x, const FlowModAdd& y) {
            return rules_conflict(x.rule, y.rule, scope);
          },
          [&](const PacketOut& x, const PacketOut& y) {
            return x.headers == y.headers && actions_differ(x.actions, y.actions, scope);
          },
          [&](const FlowModAdd& x, const PacketOut& y) { return rule_vs_packet(x, y); },
          [&](const PacketOut& x, const FlowModAdd& y) { return rule_vs_packet(y, x); },
          [](const auto&, const auto&) { return false; },
      },
      a, b);
}

}  // namespace netcompose
