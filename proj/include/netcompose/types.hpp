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

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace netcompose {

using DatapathId = std::uint64_t;
using PortNo = std::uint32_t;
using Xid = std::uint32_t;
using ModuleId = std::uint32_t;

/// Module id carried by frames that originate from the network side.
inline constexpr ModuleId kNetworkModuleId = 0;

/// 48-bit Ethernet address held in the low bits of a 64-bit word.
struct MacAddr {
  std::uint64_t value = 0;

  static constexpr std::uint64_t kMask = 0xFFFF'FFFF'FFFFull;

  constexpr MacAddr() = default;
  constexpr explicit MacAddr(std::uint64_t v) : value(v & kMask) {}

  friend constexpr auto operator<=>(const MacAddr&, const MacAddr&) = default;
};

struct Ipv4Addr {
  std::uint32_t value = 0;

  constexpr Ipv4Addr() = default;
  constexpr explicit Ipv4Addr(std::uint32_t v) : value(v) {}

  friend constexpr auto operator<=>(const Ipv4Addr&, const Ipv4Addr&) = default;
};

/// An IPv4 prefix. Host bits are always zero; construct through make().
struct Ipv4Prefix {
  Ipv4Addr addr;
  std::uint8_t length = 0;

  static constexpr std::uint32_t mask(std::uint8_t len) {
    return len == 0 ? 0u : (len >= 32 ? 0xFFFF'FFFFu : ~((1u << (32 - len)) - 1u));
  }

  static constexpr Ipv4Prefix make(Ipv4Addr a, std::uint8_t len) {
    if (len > 32) len = 32;
    return Ipv4Prefix{Ipv4Addr{a.value & mask(len)}, len};
  }

  static constexpr Ipv4Prefix host(Ipv4Addr a) { return Ipv4Prefix{a, 32}; }

  constexpr bool contains(Ipv4Addr a) const {
    return (a.value & mask(length)) == addr.value;
  }

  /// True when every address of `other` is also in this prefix.
  constexpr bool contains(const Ipv4Prefix& other) const {
    return other.length >= length && contains(other.addr);
  }

  friend constexpr auto operator<=>(const Ipv4Prefix&, const Ipv4Prefix&) = default;
};

// Text forms used by the configuration, trace and report formats.
std::string format_mac(MacAddr mac);
std::optional<MacAddr> parse_mac(std::string_view text);
std::string format_ipv4(Ipv4Addr addr);
std::optional<Ipv4Addr> parse_ipv4(std::string_view text);
std::string format_prefix(const Ipv4Prefix& prefix);
/// Accepts "a.b.c.d/len" or a bare address (treated as /32).
std::optional<Ipv4Prefix> parse_prefix(std::string_view text);
/// Decimal or 0x-prefixed hexadecimal unsigned integer.
std::optional<std::uint64_t> parse_uint(std::string_view text);

}  // namespace netcompose
