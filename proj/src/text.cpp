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

#include "netcompose/text.hpp"

#include <cstdio>
#include <sstream>

#include "netcompose/overloaded.hpp"

namespace netcompose {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

std::string quote(std::string_view s) { return "'" + std::string(s) + "'"; }

void append_field(std::string& out, std::string_view key, const std::string& value) {
  if (!out.empty()) out += ',';
  out += key;
  out += '=';
  out += value;
}

}  // namespace

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  while (!text.empty()) {
    auto pos = text.find(sep);
    auto part = text.substr(0, pos);
    if (!part.empty()) parts.push_back(part);
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  return parts;
}

std::vector<std::string_view> split_ws(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) parts.push_back(text.substr(start, i - start));
  }
  return parts;
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

std::string format_field_value(HeaderField f, std::uint64_t value) {
  switch (f) {
    case HeaderField::EthSrc:
    case HeaderField::EthDst: return format_mac(MacAddr{value});
    case HeaderField::IpSrc:
    case HeaderField::IpDst: return format_ipv4(Ipv4Addr{static_cast<std::uint32_t>(value)});
    case HeaderField::EthType: {
      char buf[8];
      std::snprintf(buf, sizeof(buf), "0x%04x", static_cast<unsigned>(value & 0xFFFF));
      return buf;
    }
    default: return std::to_string(value);
  }
}

std::optional<std::uint64_t> parse_field_value(HeaderField f, std::string_view text) {
  switch (f) {
    case HeaderField::EthSrc:
    case HeaderField::EthDst:
      if (auto mac = parse_mac(text)) return mac->value;
      return std::nullopt;
    case HeaderField::IpSrc:
    case HeaderField::IpDst:
      if (auto ip = parse_ipv4(text)) return ip->value;
      return std::nullopt;
    default: {
      auto v = parse_uint(text);
      unsigned bits = field_bits(f);
      if (!v || (bits < 64 && (*v >> bits) != 0)) return std::nullopt;
      return v;
    }
  }
}

void set_match_field(Match& m, std::string_view key, std::string_view value) {
  auto field = field_from_name(key);
  if (!field) throw TextError("unknown match field " + quote(key));
  if (*field == HeaderField::IpSrc || *field == HeaderField::IpDst) {
    auto prefix = parse_prefix(value);
    if (!prefix) throw TextError("bad prefix " + quote(value) + " for " + std::string(key));
    (*field == HeaderField::IpSrc ? m.ip_src : m.ip_dst) = *prefix;
    return;
  }
  auto v = parse_field_value(*field, value);
  if (!v) throw TextError("bad value " + quote(value) + " for " + std::string(key));
  switch (*field) {
    case HeaderField::InPort: m.in_port = static_cast<PortNo>(*v); break;
    case HeaderField::EthSrc: m.eth_src = MacAddr{*v}; break;
    case HeaderField::EthDst: m.eth_dst = MacAddr{*v}; break;
    case HeaderField::EthType: m.eth_type = static_cast<std::uint16_t>(*v); break;
    case HeaderField::IpProto: m.ip_proto = static_cast<std::uint8_t>(*v); break;
    case HeaderField::TpSrc: m.tp_src = static_cast<std::uint16_t>(*v); break;
    case HeaderField::TpDst: m.tp_dst = static_cast<std::uint16_t>(*v); break;
    default: break;
  }
}

std::string format_match(const Match& m) {
  std::string out;
  if (m.in_port) append_field(out, "in_port", std::to_string(*m.in_port));
  if (m.eth_src) append_field(out, "eth_src", format_mac(*m.eth_src));
  if (m.eth_dst) append_field(out, "eth_dst", format_mac(*m.eth_dst));
  if (m.eth_type) append_field(out, "eth_type", format_field_value(HeaderField::EthType, *m.eth_type));
  if (m.ip_src) append_field(out, "ip_src", format_prefix(*m.ip_src));
  if (m.ip_dst) append_field(out, "ip_dst", format_prefix(*m.ip_dst));
  if (m.ip_proto) append_field(out, "ip_proto", std::to_string(*m.ip_proto));
  if (m.tp_src) append_field(out, "tp_src", std::to_string(*m.tp_src));
  if (m.tp_dst) append_field(out, "tp_dst", std::to_string(*m.tp_dst));
  return out.empty() ? "any" : out;
}

Match parse_match(std::string_view text) {
  Match m;
  text = trim(text);
  if (text == "any") return m;
  for (auto item : split(text, ',')) {
    auto eq = item.find('=');
    if (eq == std::string_view::npos) throw TextError("expected field=value, got " + quote(item));
    set_match_field(m, item.substr(0, eq), item.substr(eq + 1));
  }
  return m;
}

std::string format_actions(const ActionList& actions) {
  if (actions.empty()) return "none";
  std::string out;
  for (const auto& a : actions) {
    if (!out.empty()) out += ',';
    out += std::visit(
        Overloaded{
            [](const Output& o) { return "output:" + std::to_string(o.port); },
            [](const Drop&) { return std::string("drop"); },
            [](const SetField& s) {
              return "set:" + std::string(field_name(s.field)) + "=" +
                     format_field_value(s.field, s.value);
            },
            [](const Flood&) { return std::string("flood"); },
            [](const ToController&) { return std::string("controller"); },
        },
        a);
  }
  return out;
}

ActionList parse_actions(std::string_view text) {
  ActionList actions;
  text = trim(text);
  if (text == "none") return actions;
  for (auto item : split(text, ',')) {
    if (item == "drop") {
      actions.emplace_back(Drop{});
    } else if (item == "flood") {
      actions.emplace_back(Flood{});
    } else if (item == "controller") {
      actions.emplace_back(ToController{});
    } else if (item.substr(0, 7) == "output:") {
      auto port = parse_uint(item.substr(7));
      if (!port || *port > 0xFFFF'FFFFull) throw TextError("bad output port in " + quote(item));
      actions.emplace_back(Output{static_cast<PortNo>(*port)});
    } else if (item.substr(0, 4) == "set:") {
      auto body = item.substr(4);
      auto eq = body.find('=');
      if (eq == std::string_view::npos) throw TextError("expected set:field=value, got " + quote(item));
      auto field = field_from_name(body.substr(0, eq));
      if (!field) throw TextError("unknown field in " + quote(item));
      auto value = parse_field_value(*field, body.substr(eq + 1));
      if (!value) throw TextError("bad value in " + quote(item));
      actions.emplace_back(SetField{*field, *value});
    } else {
      throw TextError("unknown action " + quote(item));
    }
  }
  if (!actions_valid(actions)) throw TextError("drop must be the only action in " + quote(text));
  return actions;
}

std::string format_headers(const PacketHeaders& h) {
  std::string out;
  for (HeaderField f : kAllHeaderFields) {
    append_field(out, field_name(f), format_field_value(f, h.get(f)));
  }
  return out;
}

PacketHeaders parse_headers(std::string_view text) {
  PacketHeaders h;
  for (auto item : split(trim(text), ',')) {
    auto eq = item.find('=');
    if (eq == std::string_view::npos) throw TextError("expected field=value, got " + quote(item));
    auto field = field_from_name(item.substr(0, eq));
    if (!field) throw TextError("unknown header field in " + quote(item));
    auto value = parse_field_value(*field, item.substr(eq + 1));
    if (!value) throw TextError("bad value in " + quote(item));
    h.set(*field, *value);
  }
  return h;
}

std::string format_rule(const FlowRule& r) {
  std::ostringstream os;
  os << "priority=" << r.priority << " match=" << format_match(r.match)
     << " actions=" << format_actions(r.actions) << " idle=" << r.idle_timeout
     << " hard=" << r.hard_timeout;
  return os.str();
}

std::string format_command(const Command& cmd) {
  return std::visit(
      Overloaded{
          [](const FlowModAdd& c) {
            return "flow_mod_add dp=" + std::to_string(c.datapath) + " " + format_rule(c.rule);
          },
          [](const FlowModDelete& c) {
            return "flow_mod_delete dp=" + std::to_string(c.datapath) +
                   " match=" + format_match(c.match);
          },
          [](const PacketOut& c) {
            return "packet_out dp=" + std::to_string(c.datapath) +
                   " packet=" + format_headers(c.headers) + " actions=" + format_actions(c.actions);
          },
          [](const StatsRequest& c) {
            return "stats_request dp=" + std::to_string(c.datapath) +
                   " match=" + format_match(c.match);
          },
      },
      cmd);
}

std::string format_event(const Event& ev) {
  return std::visit(
      Overloaded{
          [](const PacketIn& e) {
            return "packet_in dp=" + std::to_string(e.datapath) + " packet=" + format_headers(e.headers);
          },
          [](const PortStatus& e) {
            return "port_status dp=" + std::to_string(e.datapath) + " port=" + std::to_string(e.port) +
                   (e.up ? " up" : " down");
          },
          [](const FlowRemoved& e) {
            return "flow_removed dp=" + std::to_string(e.datapath) + " " + format_rule(e.rule) +
                   " packets=" + std::to_string(e.packet_count) +
                   (e.reason == RemovalReason::Idle ? " reason=idle" : " reason=hard");
          },
          [](const StatsReply& e) {
            return "stats_reply dp=" + std::to_string(e.datapath) +
                   " entries=" + std::to_string(e.entries.size());
          },
      },
      ev);
}

}  // namespace netcompose
