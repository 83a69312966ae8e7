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

// Random value generators and reference oracles shared by the unit tests and
// the acceptance runner. The oracles deliberately avoid the library's match
// algebra: prefixes are compared bit by bit and intersection emptiness is
// decided field by field from first principles.

#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "netcompose/composition.hpp"
#include "netcompose/protocol.hpp"
#include "netcompose/sbi.hpp"

namespace netcompose::testing {

using Rng = std::mt19937_64;

inline std::uint64_t uniform(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
  return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[uniform(rng, 0, v.size() - 1)];
}

// ---------------------------------------------------------------------------
// Oracles

/// Prefix membership checked one bit at a time.
inline bool oracle_prefix_contains(const Ipv4Prefix& p, Ipv4Addr a) {
  for (int i = 0; i < p.length; ++i) {
    const int bit = 31 - i;
    if (((p.addr.value >> bit) & 1u) != ((a.value >> bit) & 1u)) return false;
  }
  return true;
}

inline bool oracle_covers(const Match& m, const PacketHeaders& h) {
  if (m.in_port && *m.in_port != h.in_port) return false;
  if (m.eth_src && m.eth_src->value != h.eth_src.value) return false;
  if (m.eth_dst && m.eth_dst->value != h.eth_dst.value) return false;
  if (m.eth_type && *m.eth_type != h.eth_type) return false;
  if (m.ip_src && !oracle_prefix_contains(*m.ip_src, h.ip_src)) return false;
  if (m.ip_dst && !oracle_prefix_contains(*m.ip_dst, h.ip_dst)) return false;
  if (m.ip_proto && *m.ip_proto != h.ip_proto) return false;
  if (m.tp_src && *m.tp_src != h.tp_src) return false;
  if (m.tp_dst && *m.tp_dst != h.tp_dst) return false;
  return true;
}

/// Two prefixes overlap iff the shorter one contains the longer one's address.
inline bool oracle_prefixes_overlap(const Ipv4Prefix& a, const Ipv4Prefix& b) {
  return a.length <= b.length ? oracle_prefix_contains(a, b.addr) : oracle_prefix_contains(b, a.addr);
}

inline bool oracle_matches_overlap(const Match& a, const Match& b) {
  auto exact = [](const auto& x, const auto& y) { return !x || !y || *x == *y; };
  auto prefix = [](const auto& x, const auto& y) { return !x || !y || oracle_prefixes_overlap(*x, *y); };
  return exact(a.in_port, b.in_port) && exact(a.eth_src, b.eth_src) && exact(a.eth_dst, b.eth_dst) &&
         exact(a.eth_type, b.eth_type) && prefix(a.ip_src, b.ip_src) && prefix(a.ip_dst, b.ip_dst) &&
         exact(a.ip_proto, b.ip_proto) && exact(a.tp_src, b.tp_src) && exact(a.tp_dst, b.tp_dst);
}

/// Conflict between two commands with full action-list comparison.
inline bool oracle_conflict(const Command& a, const Command& b) {
  const auto* fa = std::get_if<FlowModAdd>(&a);
  const auto* fb = std::get_if<FlowModAdd>(&b);
  const auto* pa = std::get_if<PacketOut>(&a);
  const auto* pb = std::get_if<PacketOut>(&b);
  DatapathId da = fa ? fa->datapath : pa ? pa->datapath : 0;
  DatapathId db = fb ? fb->datapath : pb ? pb->datapath : 0;
  if (da == 0 || da != db) return false;
  if (fa && fb) return oracle_matches_overlap(fa->rule.match, fb->rule.match) && fa->rule.actions != fb->rule.actions;
  if (pa && pb) return pa->headers == pb->headers && pa->actions != pb->actions;
  if (fa && pb) return oracle_covers(fa->rule.match, pb->headers) && fa->rule.actions != pb->actions;
  if (pa && fb) return oracle_covers(fb->rule.match, pa->headers) && fb->rule.actions != pa->actions;
  return false;
}

// ---------------------------------------------------------------------------
// Policy oracle: connected components of the cross-module conflict graph,
// found by depth-first search over an explicit adjacency matrix.

struct OracleItem {
  ModuleId module_id = 0;
  int priority = 0;
  std::size_t order = 0;
  Command command;
};

inline std::vector<OracleItem> oracle_flatten(const std::vector<Contribution>& set) {
  std::vector<const Contribution*> byorder;
  for (const auto& c : set) byorder.push_back(&c);
  std::stable_sort(byorder.begin(), byorder.end(),
                   [](const Contribution* a, const Contribution* b) { return a->order < b->order; });
  std::vector<OracleItem> out;
  for (const auto* c : byorder)
    for (const auto& cmd : c->commands) out.push_back(OracleItem{c->module_id, c->priority, c->order, cmd});
  return out;
}

inline std::vector<std::vector<bool>> oracle_matrix(const std::vector<OracleItem>& items) {
  const std::size_t n = items.size();
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && items[i].module_id != items[j].module_id && oracle_conflict(items[i].command, items[j].command))
        adj[i][j] = true;
  return adj;
}

/// Component label per item; items without conflicts get a singleton label.
inline std::vector<std::size_t> oracle_components(const std::vector<std::vector<bool>>& adj) {
  const std::size_t n = adj.size();
  std::vector<std::size_t> label(n, n);
  for (std::size_t s = 0; s < n; ++s) {
    if (label[s] != n) continue;
    std::vector<std::size_t> stack{s};
    label[s] = s;
    while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < n; ++v)
        if (adj[u][v] && label[v] == n) {
          label[v] = s;
          stack.push_back(v);
        }
    }
  }
  return label;
}

/// Expected merge output as (module_id, command) in output order.
inline std::vector<TaggedCommand> oracle_merge(const std::vector<Contribution>& set, PolicyKind kind) {
  auto items = oracle_flatten(set);
  auto adj = oracle_matrix(items);
  auto label = oracle_components(adj);
  const std::size_t n = items.size();
  std::vector<bool> keep(n, true);
  for (std::size_t root = 0; root < n; ++root) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (label[i] == root) members.push_back(i);
    if (members.size() < 2) continue;
    if (kind == PolicyKind::Discard) {
      for (auto i : members) keep[i] = false;
    } else if (kind == PolicyKind::Priority) {
      const OracleItem* best = nullptr;
      for (auto i : members) {
        const auto& it = items[i];
        if (!best || it.priority > best->priority ||
            (it.priority == best->priority && it.module_id < best->module_id))
          best = &it;
      }
      for (auto i : members) keep[i] = items[i].module_id == best->module_id;
    }
  }
  std::vector<TaggedCommand> out;
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) out.push_back(TaggedCommand{items[i].module_id, items[i].command});
  return out;
}

// ---------------------------------------------------------------------------
// Discretized header space: 2 ports x 2 source MACs x 2 eth types x 2 source
// IPs x 8 destination IPs x 2 protocols x 2 destination ports = 512 headers.

struct HeaderSpace {
  std::vector<PortNo> ports{1, 2};
  std::vector<MacAddr> macs{MacAddr{0x020000000001}, MacAddr{0x020000000002}};
  std::vector<std::uint16_t> eth_types{0x0800, 0x0806};
  std::vector<Ipv4Addr> ip_srcs{Ipv4Addr{0x0A000101}, Ipv4Addr{0x0A000902}};
  std::vector<Ipv4Addr> ip_dsts;
  std::vector<std::uint8_t> protos{6, 17};
  std::vector<std::uint16_t> tp_dsts{80, 443};

  HeaderSpace() {
    for (std::uint32_t i = 0; i < 8; ++i) ip_dsts.push_back(Ipv4Addr{0x0A000000 + i});
  }

  std::vector<PacketHeaders> enumerate() const {
    std::vector<PacketHeaders> out;
    for (auto p : ports)
      for (auto m : macs)
        for (auto t : eth_types)
          for (auto s : ip_srcs)
            for (auto d : ip_dsts)
              for (auto pr : protos)
                for (auto tp : tp_dsts) {
                  PacketHeaders h;
                  h.in_port = p;
                  h.eth_src = m;
                  h.eth_dst = MacAddr{0x02000000FFFF};
                  h.eth_type = t;
                  h.ip_src = s;
                  h.ip_dst = d;
                  h.ip_proto = pr;
                  h.tp_src = 1000;
                  h.tp_dst = tp;
                  out.push_back(h);
                }
    return out;
  }

  Ipv4Prefix random_prefix(Rng& rng, const std::vector<Ipv4Addr>& pool) const {
    // Mostly prefixes around the pool, sometimes a distant one.
    if (coin(rng, 0.1)) return Ipv4Prefix::make(Ipv4Addr{0x0A630000}, 16);
    auto len = static_cast<std::uint8_t>(pick(rng, std::vector<int>{0, 24, 28, 29, 30, 31, 32, 32}));
    return Ipv4Prefix::make(pick(rng, pool), len);
  }

  /// Each field constrained with probability p_field.
  Match random_match(Rng& rng, double p_field = 0.35) const {
    Match m;
    if (coin(rng, p_field)) m.in_port = pick(rng, ports);
    if (coin(rng, p_field)) m.eth_src = pick(rng, macs);
    if (coin(rng, p_field)) m.eth_type = pick(rng, eth_types);
    if (coin(rng, p_field)) m.ip_src = random_prefix(rng, ip_srcs);
    if (coin(rng, p_field)) m.ip_dst = random_prefix(rng, ip_dsts);
    if (coin(rng, p_field)) m.ip_proto = pick(rng, protos);
    if (coin(rng, p_field)) m.tp_dst = pick(rng, tp_dsts);
    return m;
  }
};

// ---------------------------------------------------------------------------
// Whole-value generators for the codec

inline MacAddr random_mac(Rng& rng) { return MacAddr{rng()}; }
inline Ipv4Addr random_ip(Rng& rng) { return Ipv4Addr{static_cast<std::uint32_t>(rng())}; }

inline PacketHeaders random_headers(Rng& rng) {
  PacketHeaders h;
  for (HeaderField f : kAllHeaderFields) h.set(f, rng());
  return h;
}

inline Match random_full_match(Rng& rng) {
  Match m;
  if (coin(rng)) m.in_port = static_cast<PortNo>(rng());
  if (coin(rng)) m.eth_src = random_mac(rng);
  if (coin(rng)) m.eth_dst = random_mac(rng);
  if (coin(rng)) m.eth_type = static_cast<std::uint16_t>(rng());
  if (coin(rng)) m.ip_src = Ipv4Prefix::make(random_ip(rng), static_cast<std::uint8_t>(uniform(rng, 0, 32)));
  if (coin(rng)) m.ip_dst = Ipv4Prefix::make(random_ip(rng), static_cast<std::uint8_t>(uniform(rng, 0, 32)));
  if (coin(rng)) m.ip_proto = static_cast<std::uint8_t>(rng());
  if (coin(rng)) m.tp_src = static_cast<std::uint16_t>(rng());
  if (coin(rng)) m.tp_dst = static_cast<std::uint16_t>(rng());
  return m;
}

inline ActionList random_actions(Rng& rng) {
  if (coin(rng, 0.15)) return {Drop{}};
  ActionList out;
  const auto n = uniform(rng, 0, 4);
  for (std::uint64_t i = 0; i < n; ++i) {
    switch (uniform(rng, 0, 3)) {
      case 0: out.push_back(Output{static_cast<PortNo>(rng())}); break;
      case 1: {
        HeaderField f = kAllHeaderFields[uniform(rng, 0, kAllHeaderFields.size() - 1)];
        SetField s{f, 0};
        PacketHeaders tmp;
        tmp.set(f, rng());
        s.value = tmp.get(f);
        out.push_back(s);
        break;
      }
      case 2: out.push_back(Flood{}); break;
      default: out.push_back(ToController{}); break;
    }
  }
  return out;
}

inline FlowRule random_rule(Rng& rng) {
  FlowRule r;
  r.priority = static_cast<std::uint16_t>(rng());
  r.match = random_full_match(rng);
  r.actions = random_actions(rng);
  r.idle_timeout = static_cast<std::uint16_t>(rng());
  r.hard_timeout = static_cast<std::uint16_t>(rng());
  return r;
}

inline DatapathId random_dp(Rng& rng) { return coin(rng) ? uniform(rng, 1, 8) : (rng() | 1); }

inline SbiMessage random_sbi(Rng& rng) {
  const DatapathId dp = random_dp(rng);
  switch (uniform(rng, 0, 7)) {
    case 0: return PacketIn{dp, random_headers(rng)};
    case 1: return PacketOut{dp, random_headers(rng), random_actions(rng)};
    case 2: return FlowModAdd{dp, random_rule(rng)};
    case 3: return FlowModDelete{dp, random_full_match(rng)};
    case 4:
      return FlowRemoved{dp, random_rule(rng), coin(rng) ? RemovalReason::Idle : RemovalReason::Hard, rng()};
    case 5: return PortStatus{dp, static_cast<PortNo>(rng()), coin(rng)};
    case 6: return StatsRequest{dp, random_full_match(rng)};
    default: {
      StatsReply r{dp, {}};
      const auto n = uniform(rng, 0, 4);
      for (std::uint64_t i = 0; i < n; ++i) r.entries.push_back(FlowStats{random_rule(rng), rng()});
      return r;
    }
  }
}

inline std::string random_utf8(Rng& rng, bool allow_empty) {
  static const std::vector<std::string> pieces = {"a", "fw", "r1", "-", "_", "\xC3\xA9", "\xE2\x82\xAC",
                                                  "\xF0\x9F\x8C\x90", "lb", "9", " "};
  std::string s;
  const auto n = uniform(rng, allow_empty ? 0 : 1, 12);
  for (std::uint64_t i = 0; i < n; ++i) s += pick(rng, pieces);
  return s;
}

inline Message random_message(Rng& rng) {
  const Xid xid = static_cast<Xid>(rng());
  const ModuleId mid = static_cast<ModuleId>(rng());
  switch (uniform(rng, 0, 9)) {
    case 0: {
      HelloBody h;
      std::vector<ProtocolOffer> all;
      const auto n = uniform(rng, 0, 6);
      while (h.offered.size() < n) {
        ProtocolOffer o{static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng())};
        if (std::find(h.offered.begin(), h.offered.end(), o) == h.offered.end()) h.offered.push_back(o);
      }
      return make_message(xid, mid, rng(), h);
    }
    case 1: return make_message(xid, mid, rng(), ModuleAnnouncement{random_utf8(rng, false)});
    case 2: return make_message(xid, mid, rng(), ModuleAcknowledge{random_utf8(rng, false)});
    case 3: return make_message(xid, mid, rng(), FenceBody{});
    case 4:
      return make_message(xid, mid, rng(), ErrorBody{static_cast<std::uint16_t>(rng()), random_utf8(rng, true)});
    default: return make_sbi(xid, mid, random_sbi(rng));
  }
}

// ---------------------------------------------------------------------------
// Policy oracle inputs

/// Small pools so random result sets conflict often.
struct ResultSetGenerator {
  std::vector<Match> matches;
  std::vector<ActionList> actions;
  std::vector<PacketHeaders> packets;

  ResultSetGenerator() {
    HeaderSpace space;
    Rng seed(7);
    for (int i = 0; i < 6; ++i) matches.push_back(space.random_match(seed, 0.3));
    actions = {{Output{1}}, {Output{2}}, {Drop{}}, {SetField{HeaderField::EthDst, 0x020000000002}, Output{3}}};
    auto all = space.enumerate();
    for (int i = 0; i < 4; ++i) packets.push_back(all[uniform(seed, 0, all.size() - 1)]);
  }

  Command random_command(Rng& rng) const {
    const DatapathId dp = coin(rng, 0.85) ? 1 : 2;
    switch (uniform(rng, 0, 5)) {
      case 0:
      case 1:
      case 2: {
        FlowRule r;
        r.priority = 100;
        r.match = pick(rng, matches);
        r.actions = pick(rng, actions);
        return FlowModAdd{dp, r};
      }
      case 3:
      case 4: return PacketOut{dp, pick(rng, packets), pick(rng, actions)};
      default: return FlowModDelete{dp, pick(rng, matches)};
    }
  }

  std::vector<Contribution> random_set(Rng& rng) const {
    std::vector<Contribution> out;
    const auto n = uniform(rng, 2, 3);
    for (std::uint64_t m = 0; m < n; ++m) {
      Contribution c;
      c.module_id = static_cast<ModuleId>(m + 1);
      c.priority = static_cast<int>(uniform(rng, 0, 3));  // ties happen
      c.order = m;
      const auto k = uniform(rng, 0, 4);
      for (std::uint64_t i = 0; i < k; ++i) c.commands.push_back(random_command(rng));
      out.push_back(std::move(c));
    }
    return out;
  }
};

}  // namespace netcompose::testing
