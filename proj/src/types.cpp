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

#include "netcompose/types.hpp"

#include <charconv>
#include <cstdio>

namespace netcompose {

namespace {

std::optional<std::uint64_t> parse_number(std::string_view text, int base) {
  if (text.empty()) return std::nullopt;
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, base);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace

std::optional<std::uint64_t> parse_uint(std::string_view text) {
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    return parse_number(text.substr(2), 16);
  }
  return parse_number(text, 10);
}

std::string format_mac(MacAddr mac) {
  char buf[18];
  std::snprintf(buf, sizeof(buf), "%02x:%02x:%02x:%02x:%02x:%02x",
                static_cast<unsigned>((mac.value >> 40) & 0xFF),
                static_cast<unsigned>((mac.value >> 32) & 0xFF),
                static_cast<unsigned>((mac.value >> 24) & 0xFF),
                static_cast<unsigned>((mac.value >> 16) & 0xFF),
                static_cast<unsigned>((mac.value >> 8) & 0xFF),
                static_cast<unsigned>(mac.value & 0xFF));
  return buf;
}

std::optional<MacAddr> parse_mac(std::string_view text) {
  std::uint64_t value = 0;
  int octets = 0;
  while (!text.empty()) {
    auto colon = text.find(':');
    auto part = text.substr(0, colon);
    if (part.empty() || part.size() > 2) return std::nullopt;
    auto octet = parse_number(part, 16);
    if (!octet) return std::nullopt;
    value = (value << 8) | *octet;
    ++octets;
    if (colon == std::string_view::npos) {
      text = {};
    } else {
      text.remove_prefix(colon + 1);
      if (text.empty()) return std::nullopt;
    }
  }
  if (octets != 6) return std::nullopt;
  return MacAddr{value};
}

std::string format_ipv4(Ipv4Addr addr) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%u.%u.%u.%u", (addr.value >> 24) & 0xFF,
                (addr.value >> 16) & 0xFF, (addr.value >> 8) & 0xFF, addr.value & 0xFF);
  return buf;
}

std::optional<Ipv4Addr> parse_ipv4(std::string_view text) {
  std::uint32_t value = 0;
  int octets = 0;
  while (true) {
    auto dot = text.find('.');
    auto part = text.substr(0, dot);
    if (part.empty() || part.size() > 3) return std::nullopt;
    auto octet = parse_number(part, 10);
    if (!octet || *octet > 255) return std::nullopt;
    value = (value << 8) | static_cast<std::uint32_t>(*octet);
    ++octets;
    if (dot == std::string_view::npos) break;
    text.remove_prefix(dot + 1);
  }
  if (octets != 4) return std::nullopt;
  return Ipv4Addr{value};
}

std::string format_prefix(const Ipv4Prefix& prefix) {
  return format_ipv4(prefix.addr) + "/" + std::to_string(prefix.length);
}

std::optional<Ipv4Prefix> parse_prefix(std::string_view text) {
  auto slash = text.find('/');
  auto addr = parse_ipv4(text.substr(0, slash));
  if (!addr) return std::nullopt;
  if (slash == std::string_view::npos) return Ipv4Prefix::host(*addr);
  auto len = parse_number(text.substr(slash + 1), 10);
  if (!len || *len > 32) return std::nullopt;
  return Ipv4Prefix::make(*addr, static_cast<std::uint8_t>(*len));
}

}  // namespace netcompose
