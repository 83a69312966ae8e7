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

#include "netcompose/protocol.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <set>

#include "netcompose/overloaded.hpp"

namespace netcompose {

namespace {

// SBI TLV tags beyond the header fields.
constexpr std::uint8_t kTagPriority = 0x20;
constexpr std::uint8_t kTagIdleTimeout = 0x21;
constexpr std::uint8_t kTagHardTimeout = 0x22;
constexpr std::uint8_t kTagPacketCount = 0x23;
constexpr std::uint8_t kTagReason = 0x24;
constexpr std::uint8_t kTagPortUp = 0x25;
constexpr std::uint8_t kTagActions = 0x30;

constexpr std::uint8_t kActOutput = 0x01;
constexpr std::uint8_t kActDrop = 0x02;
constexpr std::uint8_t kActSetField = 0x03;
constexpr std::uint8_t kActFlood = 0x04;
constexpr std::uint8_t kActController = 0x05;

struct Malformed {
  std::string reason;
};

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) { be(v, 2); }
  void u32(std::uint32_t v) { be(v, 4); }
  void u64(std::uint64_t v) { be(v, 8); }
  void be(std::uint64_t v, unsigned width) {
    for (unsigned i = width; i-- > 0;) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void raw(std::span<const std::uint8_t> data) { bytes_.insert(bytes_.end(), data.begin(), data.end()); }
  void text(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }

  std::size_t size() const { return bytes_.size(); }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

  // Back-patches a 16-bit length at `at`.
  void patch_u16(std::size_t at, std::size_t value) {
    if (value > 0xFFFF) throw EncodeError("TLV value exceeds 65535 bytes");
    bytes_[at] = static_cast<std::uint8_t>(value >> 8);
    bytes_[at + 1] = static_cast<std::uint8_t>(value);
  }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  bool empty() const { return pos_ >= data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

  std::uint64_t be(unsigned width) {
    need(width);
    std::uint64_t v = 0;
    for (unsigned i = 0; i < width; ++i) v = (v << 8) | data_[pos_++];
    return v;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(be(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(be(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(be(4)); }
  std::uint64_t u64() { return be(8); }

  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::span<const std::uint8_t> rest() { return take(remaining()); }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw Malformed{"truncated payload"};
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

bool valid_utf8(std::span<const std::uint8_t> s) {
  std::size_t i = 0;
  while (i < s.size()) {
    std::uint8_t c = s[i];
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      if ((s[i + k] & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (s[i + k] & 0x3F);
    }
    static constexpr std::array<std::uint32_t, 4> kMin = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += extra + 1;
  }
  return true;
}

std::string to_text(std::span<const std::uint8_t> s) { return std::string(s.begin(), s.end()); }

unsigned field_bytes(HeaderField f) { return field_bits(f) / 8; }

// ---------------------------------------------------------------------------
// SBI encoding

class TlvWriter {
 public:
  explicit TlvWriter(ByteWriter& w) : w_(w) {}

  void tlv(std::uint8_t tag, std::uint64_t value, unsigned width) {
    w_.u8(tag);
    w_.u16(static_cast<std::uint16_t>(width));
    w_.be(value, width);
  }

  void prefix(std::uint8_t tag, const Ipv4Prefix& p) {
    if (p.length > 32 || Ipv4Prefix::make(p.addr, p.length) != p) {
      throw EncodeError("prefix has host bits set or length > 32");
    }
    w_.u8(tag);
    w_.u16(5);
    w_.u32(p.addr.value);
    w_.u8(p.length);
  }

  void match(const Match& m) {
    if (m.in_port) tlv(0x10, *m.in_port, 4);
    if (m.eth_src) tlv(0x11, m.eth_src->value, 6);
    if (m.eth_dst) tlv(0x12, m.eth_dst->value, 6);
    if (m.eth_type) tlv(0x13, *m.eth_type, 2);
    if (m.ip_src) prefix(0x14, *m.ip_src);
    if (m.ip_dst) prefix(0x15, *m.ip_dst);
    if (m.ip_proto) tlv(0x16, *m.ip_proto, 1);
    if (m.tp_src) tlv(0x17, *m.tp_src, 2);
    if (m.tp_dst) tlv(0x18, *m.tp_dst, 2);
  }

  void headers(const PacketHeaders& h) {
    for (HeaderField f : kAllHeaderFields) {
      auto tag = static_cast<std::uint8_t>(f);
      if (f == HeaderField::IpSrc || f == HeaderField::IpDst) {
        prefix(tag, Ipv4Prefix::host(Ipv4Addr{static_cast<std::uint32_t>(h.get(f))}));
      } else {
        tlv(tag, h.get(f), field_bytes(f));
      }
    }
  }

  void actions(const ActionList& list) {
    if (!actions_valid(list)) throw EncodeError("invalid action list");
    w_.u8(kTagActions);
    std::size_t len_at = w_.size();
    w_.u16(0);
    std::size_t start = w_.size();
    for (const auto& a : list) {
      std::size_t item_at = w_.size();
      w_.u16(0);
      std::size_t item_start = w_.size();
      std::visit(Overloaded{
                     [&](const Output& o) {
                       w_.u8(kActOutput);
                       w_.u32(o.port);
                     },
                     [&](const Drop&) { w_.u8(kActDrop); },
                     [&](const SetField& s) {
                       w_.u8(kActSetField);
                       w_.u8(static_cast<std::uint8_t>(s.field));
                       w_.be(s.value, field_bytes(s.field));
                     },
                     [&](const Flood&) { w_.u8(kActFlood); },
                     [&](const ToController&) { w_.u8(kActController); },
                 },
                 a);
      w_.patch_u16(item_at, w_.size() - item_start);
    }
    w_.patch_u16(len_at, w_.size() - start);
  }

  void rule_tail(const FlowRule& r) {
    tlv(kTagPriority, r.priority, 2);
    tlv(kTagIdleTimeout, r.idle_timeout, 2);
    tlv(kTagHardTimeout, r.hard_timeout, 2);
  }

 private:
  ByteWriter& w_;
};

void encode_sbi(ByteWriter& w, const SbiMessage& msg) {
  if (datapath_of(msg) == 0) throw EncodeError("SBI message without datapath");
  w.u8(static_cast<std::uint8_t>(msg.index() + 1));
  TlvWriter t(w);
  std::visit(Overloaded{
                 [&](const PacketIn& m) { t.headers(m.headers); },
                 [&](const PacketOut& m) {
                   t.headers(m.headers);
                   t.actions(m.actions);
                 },
                 [&](const FlowModAdd& m) {
                   t.match(m.rule.match);
                   t.rule_tail(m.rule);
                   t.actions(m.rule.actions);
                 },
                 [&](const FlowModDelete& m) { t.match(m.match); },
                 [&](const FlowRemoved& m) {
                   t.match(m.rule.match);
                   t.rule_tail(m.rule);
                   t.tlv(kTagPacketCount, m.packet_count, 8);
                   t.tlv(kTagReason, static_cast<std::uint8_t>(m.reason), 1);
                   t.actions(m.rule.actions);
                 },
                 [&](const PortStatus& m) {
                   t.tlv(0x10, m.port, 4);
                   t.tlv(kTagPortUp, m.up ? 1 : 0, 1);
                 },
                 [&](const StatsRequest& m) { t.match(m.match); },
                 [&](const StatsReply& m) {
                   for (const auto& e : m.entries) {
                     t.match(e.rule.match);
                     t.rule_tail(e.rule);
                     t.tlv(kTagPacketCount, e.packet_count, 8);
                     t.actions(e.rule.actions);
                   }
                 },
             },
             msg);
}

// ---------------------------------------------------------------------------
// SBI decoding

struct Tlv {
  std::uint8_t tag;
  std::span<const std::uint8_t> value;
};

using TlvGroup = std::vector<Tlv>;

bool is_known_tag(std::uint8_t tag) {
  return (tag >= 0x10 && tag <= 0x18) || (tag >= kTagPriority && tag <= kTagPortUp) ||
         tag == kTagActions;
}

// Splits the TLV stream into ascending runs. A run ends after an action list
// when `split_on_actions` is set; otherwise there is exactly one run.
std::vector<TlvGroup> read_tlvs(ByteReader& r, bool split_on_actions) {
  std::vector<TlvGroup> groups;
  TlvGroup current;
  int last_tag = -1;
  while (!r.empty()) {
    std::uint8_t tag = r.u8();
    std::uint16_t len = r.u16();
    auto value = r.take(len);
    if (!is_known_tag(tag)) throw Malformed{"unknown TLV tag"};
    if (static_cast<int>(tag) <= last_tag) throw Malformed{"TLV tags out of order"};
    current.push_back({tag, value});
    last_tag = tag;
    if (split_on_actions && tag == kTagActions) {
      groups.push_back(std::move(current));
      current.clear();
      last_tag = -1;
    }
  }
  if (!current.empty() || !split_on_actions) groups.push_back(std::move(current));
  if (split_on_actions && !groups.empty() && groups.back().empty()) groups.pop_back();
  return groups;
}

class GroupReader {
 public:
  GroupReader(const TlvGroup& group, std::set<std::uint8_t> allowed) : group_(group) {
    for (const auto& t : group_) {
      if (!allowed.count(t.tag)) throw Malformed{"TLV tag not allowed for this message kind"};
    }
  }

  std::optional<std::span<const std::uint8_t>> find(std::uint8_t tag) const {
    for (const auto& t : group_) {
      if (t.tag == tag) return t.value;
    }
    return std::nullopt;
  }

  std::optional<std::uint64_t> scalar(std::uint8_t tag, unsigned width) const {
    auto v = find(tag);
    if (!v) return std::nullopt;
    if (v->size() != width) throw Malformed{"TLV value has wrong length"};
    ByteReader r(*v);
    return r.be(width);
  }

  std::uint64_t required(std::uint8_t tag, unsigned width) const {
    auto v = scalar(tag, width);
    if (!v) throw Malformed{"required TLV missing"};
    return *v;
  }

  std::optional<Ipv4Prefix> prefix(std::uint8_t tag) const {
    auto v = find(tag);
    if (!v) return std::nullopt;
    if (v->size() != 5) throw Malformed{"prefix TLV has wrong length"};
    ByteReader r(*v);
    Ipv4Addr addr{r.u32()};
    std::uint8_t len = r.u8();
    if (len > 32) throw Malformed{"prefix length > 32"};
    auto p = Ipv4Prefix::make(addr, len);
    if (p.addr != addr) throw Malformed{"prefix has host bits set"};
    return p;
  }

  Match match() const {
    Match m;
    if (auto v = scalar(0x10, 4)) m.in_port = static_cast<PortNo>(*v);
    if (auto v = scalar(0x11, 6)) m.eth_src = MacAddr{*v};
    if (auto v = scalar(0x12, 6)) m.eth_dst = MacAddr{*v};
    if (auto v = scalar(0x13, 2)) m.eth_type = static_cast<std::uint16_t>(*v);
    m.ip_src = prefix(0x14);
    m.ip_dst = prefix(0x15);
    if (auto v = scalar(0x16, 1)) m.ip_proto = static_cast<std::uint8_t>(*v);
    if (auto v = scalar(0x17, 2)) m.tp_src = static_cast<std::uint16_t>(*v);
    if (auto v = scalar(0x18, 2)) m.tp_dst = static_cast<std::uint16_t>(*v);
    return m;
  }

  PacketHeaders headers() const {
    PacketHeaders h;
    for (HeaderField f : kAllHeaderFields) {
      auto tag = static_cast<std::uint8_t>(f);
      if (f == HeaderField::IpSrc || f == HeaderField::IpDst) {
        auto p = prefix(tag);
        if (!p) throw Malformed{"packet header field missing"};
        if (p->length != 32) throw Malformed{"packet address must be /32"};
        h.set(f, p->addr.value);
      } else {
        h.set(f, required(tag, field_bytes(f)));
      }
    }
    return h;
  }

  ActionList actions() const {
    auto v = find(kTagActions);
    if (!v) throw Malformed{"action list missing"};
    ActionList list;
    ByteReader r(*v);
    while (!r.empty()) {
      std::uint16_t len = r.u16();
      ByteReader item(r.take(len));
      std::uint8_t kind = item.u8();
      switch (kind) {
        case kActOutput: list.emplace_back(Output{item.u32()}); break;
        case kActDrop: list.emplace_back(Drop{}); break;
        case kActSetField: {
          auto field = field_from_tag(item.u8());
          if (!field) throw Malformed{"SET_FIELD names unknown field"};
          list.emplace_back(SetField{*field, item.be(field_bytes(*field))});
          break;
        }
        case kActFlood: list.emplace_back(Flood{}); break;
        case kActController: list.emplace_back(ToController{}); break;
        default: throw Malformed{"unknown action kind"};
      }
      if (!item.empty()) throw Malformed{"trailing bytes in action"};
    }
    if (!actions_valid(list)) throw Malformed{"drop combined with other actions"};
    return list;
  }

  FlowRule rule() const {
    FlowRule r;
    r.match = match();
    r.priority = static_cast<std::uint16_t>(required(kTagPriority, 2));
    r.idle_timeout = static_cast<std::uint16_t>(required(kTagIdleTimeout, 2));
    r.hard_timeout = static_cast<std::uint16_t>(required(kTagHardTimeout, 2));
    r.actions = actions();
    return r;
  }

 private:
  const TlvGroup& group_;
};

const std::set<std::uint8_t> kMatchTags = {0x10, 0x11, 0x12, 0x13, 0x14, 0x15, 0x16, 0x17, 0x18};

std::set<std::uint8_t> with(std::set<std::uint8_t> base, std::initializer_list<std::uint8_t> extra) {
  base.insert(extra);
  return base;
}

bool flag(std::uint64_t v) {
  if (v > 1) throw Malformed{"flag TLV must be 0 or 1"};
  return v == 1;
}

SbiMessage decode_sbi(std::span<const std::uint8_t> payload, DatapathId dp) {
  if (dp == 0) throw Malformed{"SBI frame without datapath"};
  ByteReader r(payload);
  std::uint8_t kind = r.u8();
  if (kind < 0x01 || kind > 0x08) throw Malformed{"unknown sbi_kind"};
  auto sbi_kind = static_cast<SbiKind>(kind);
  const bool multi = sbi_kind == SbiKind::StatsReply;
  auto groups = read_tlvs(r, multi);
  const TlvGroup empty_group;
  const TlvGroup& g = groups.empty() ? empty_group : groups.front();

  switch (sbi_kind) {
    case SbiKind::PacketIn: {
      GroupReader gr(g, kMatchTags);
      return PacketIn{dp, gr.headers()};
    }
    case SbiKind::PacketOut: {
      GroupReader gr(g, with(kMatchTags, {kTagActions}));
      return PacketOut{dp, gr.headers(), gr.actions()};
    }
    case SbiKind::FlowModAdd: {
      GroupReader gr(g, with(kMatchTags, {kTagPriority, kTagIdleTimeout, kTagHardTimeout, kTagActions}));
      return FlowModAdd{dp, gr.rule()};
    }
    case SbiKind::FlowModDelete: {
      GroupReader gr(g, kMatchTags);
      return FlowModDelete{dp, gr.match()};
    }
    case SbiKind::FlowRemoved: {
      GroupReader gr(g, with(kMatchTags, {kTagPriority, kTagIdleTimeout, kTagHardTimeout,
                                          kTagPacketCount, kTagReason, kTagActions}));
      FlowRemoved m{dp, gr.rule(), RemovalReason::Idle, gr.required(kTagPacketCount, 8)};
      m.reason = flag(gr.required(kTagReason, 1)) ? RemovalReason::Hard : RemovalReason::Idle;
      return m;
    }
    case SbiKind::PortStatus: {
      GroupReader gr(g, {0x10, kTagPortUp});
      return PortStatus{dp, static_cast<PortNo>(gr.required(0x10, 4)),
                        flag(gr.required(kTagPortUp, 1))};
    }
    case SbiKind::StatsRequest: {
      GroupReader gr(g, kMatchTags);
      return StatsRequest{dp, gr.match()};
    }
    case SbiKind::StatsReply: {
      StatsReply reply{dp, {}};
      auto allowed = with(kMatchTags, {kTagPriority, kTagIdleTimeout, kTagHardTimeout,
                                       kTagPacketCount, kTagActions});
      for (const auto& group : groups) {
        if (group.back().tag != kTagActions) throw Malformed{"stats entry without action list"};
        GroupReader gr(group, allowed);
        reply.entries.push_back({gr.rule(), gr.required(kTagPacketCount, 8)});
      }
      return reply;
    }
  }
  throw Malformed{"unknown sbi_kind"};
}

bool known_type(std::uint8_t t) {
  switch (static_cast<MsgType>(t)) {
    case MsgType::Hello:
    case MsgType::Error:
    case MsgType::ModuleAnnouncement:
    case MsgType::ModuleAcknowledge:
    case MsgType::Fence:
    case MsgType::Sbi: return true;
  }
  return false;
}

Payload decode_payload(MsgType type, std::span<const std::uint8_t> payload, DatapathId dp) {
  ByteReader r(payload);
  switch (type) {
    case MsgType::Hello: {
      HelloBody body;
      std::uint8_t count = r.u8();
      if (r.remaining() != 2u * count) throw Malformed{"HELLO count does not match payload"};
      std::set<ProtocolOffer> seen;
      for (unsigned i = 0; i < count; ++i) {
        ProtocolOffer offer{r.u8(), r.u8()};
        if (!seen.insert(offer).second) throw Malformed{"duplicate protocol offer"};
        body.offered.push_back(offer);
      }
      return body;
    }
    case MsgType::Error: {
      ErrorBody body;
      body.code = r.u16();
      auto text = r.rest();
      if (!valid_utf8(text)) throw Malformed{"error text is not UTF-8"};
      body.text = to_text(text);
      return body;
    }
    case MsgType::ModuleAnnouncement:
    case MsgType::ModuleAcknowledge: {
      auto name = r.rest();
      if (name.empty() || !valid_utf8(name)) throw Malformed{"module name empty or not UTF-8"};
      if (type == MsgType::ModuleAnnouncement) return ModuleAnnouncement{to_text(name)};
      return ModuleAcknowledge{to_text(name)};
    }
    case MsgType::Fence:
      if (!payload.empty()) throw Malformed{"FENCE carries a payload"};
      return FenceBody{};
    case MsgType::Sbi: return decode_sbi(payload, dp);
  }
  throw Malformed{"unknown message type"};
}

}  // namespace

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Protocol: return "protocol";
    case ErrorCode::UnknownXid: return "unknown_xid";
    case ErrorCode::DuplicateFence: return "duplicate_fence";
    case ErrorCode::UnknownModule: return "unknown_module";
    case ErrorCode::DuplicateModule: return "duplicate_module";
    case ErrorCode::UnknownDatapath: return "unknown_datapath";
    case ErrorCode::BudgetExceeded: return "budget_exceeded";
    case ErrorCode::IncompatibleProtocols: return "incompatible_protocols";
    case ErrorCode::UnexpectedMessage: return "unexpected_message";
  }
  return "unknown";
}

MsgType payload_type(const Payload& payload) {
  return std::visit(Overloaded{
                        [](const HelloBody&) { return MsgType::Hello; },
                        [](const ModuleAnnouncement&) { return MsgType::ModuleAnnouncement; },
                        [](const ModuleAcknowledge&) { return MsgType::ModuleAcknowledge; },
                        [](const FenceBody&) { return MsgType::Fence; },
                        [](const ErrorBody&) { return MsgType::Error; },
                        [](const SbiMessage&) { return MsgType::Sbi; },
                    },
                    payload);
}

std::vector<std::uint8_t> encode_payload(const Payload& payload) {
  ByteWriter w;
  std::visit(Overloaded{
                 [&](const HelloBody& b) {
                   if (b.offered.size() > 0xFF) throw EncodeError("too many protocol offers");
                   std::set<ProtocolOffer> seen(b.offered.begin(), b.offered.end());
                   if (seen.size() != b.offered.size()) throw EncodeError("duplicate protocol offer");
                   w.u8(static_cast<std::uint8_t>(b.offered.size()));
                   for (const auto& o : b.offered) {
                     w.u8(o.protocol_id);
                     w.u8(o.version);
                   }
                 },
                 [&](const ModuleAnnouncement& b) {
                   if (b.name.empty()) throw EncodeError("empty module name");
                   w.text(b.name);
                 },
                 [&](const ModuleAcknowledge& b) {
                   if (b.name.empty()) throw EncodeError("empty module name");
                   w.text(b.name);
                 },
                 [&](const FenceBody&) {},
                 [&](const ErrorBody& b) {
                   w.u16(b.code);
                   w.text(b.text);
                 },
                 [&](const SbiMessage& m) { encode_sbi(w, m); },
             },
             payload);
  if (w.size() > kMaxPayload) throw EncodeError("payload exceeds 65535 bytes");
  return std::move(w.bytes());
}

Message make_message(Xid xid, ModuleId module_id, DatapathId datapath_id, Payload payload) {
  Message m;
  if (const auto* sbi = std::get_if<SbiMessage>(&payload)) datapath_id = datapath_of(*sbi);
  m.header.type = payload_type(payload);
  m.header.payload_length = static_cast<std::uint16_t>(encode_payload(payload).size());
  m.header.xid = xid;
  m.header.module_id = module_id;
  m.header.datapath_id = datapath_id;
  m.payload = std::move(payload);
  return m;
}

Message make_fence(Xid xid, ModuleId module_id) {
  return make_message(xid, module_id, 0, FenceBody{});
}

Message make_error(Xid xid, ModuleId module_id, ErrorCode code, std::string text) {
  return make_message(xid, module_id, 0, ErrorBody{static_cast<std::uint16_t>(code), std::move(text)});
}

Message make_sbi(Xid xid, ModuleId module_id, SbiMessage body) {
  return make_message(xid, module_id, 0, std::move(body));
}

std::vector<std::uint8_t> encode_message(const Message& msg) {
  const auto& h = msg.header;
  if (h.version != kProtocolVersion) throw EncodeError("version must be 0x01");
  if (h.type != payload_type(msg.payload)) throw EncodeError("msg_type does not match payload");
  if (const auto* sbi = std::get_if<SbiMessage>(&msg.payload);
      sbi && datapath_of(*sbi) != h.datapath_id) {
    throw EncodeError("SBI datapath does not match header datapath_id");
  }
  auto payload = encode_payload(msg.payload);
  if (payload.size() != h.payload_length) throw EncodeError("payload_length does not match payload");
  ByteWriter w;
  w.u8(h.version);
  w.u8(static_cast<std::uint8_t>(h.type));
  w.u16(h.payload_length);
  w.u32(h.xid);
  w.u32(h.module_id);
  w.u64(h.datapath_id);
  w.raw(payload);
  return std::move(w.bytes());
}

DecodeResult decode_message(std::span<const std::uint8_t> bytes) {
  if (!bytes.empty() && bytes[0] != kProtocolVersion) return ProtocolError{"unsupported version"};
  if (bytes.size() >= 2 && !known_type(bytes[1])) return ProtocolError{"unknown msg_type"};
  if (bytes.size() < kHeaderSize) return NeedMoreData{kHeaderSize};

  ByteReader r(bytes.first(kHeaderSize));
  MessageHeader h;
  h.version = r.u8();
  h.type = static_cast<MsgType>(r.u8());
  h.payload_length = r.u16();
  h.xid = r.u32();
  h.module_id = r.u32();
  h.datapath_id = r.u64();

  const std::size_t total = kHeaderSize + h.payload_length;
  if (bytes.size() < total) return NeedMoreData{total};

  try {
    Payload payload = decode_payload(h.type, bytes.subspan(kHeaderSize, h.payload_length), h.datapath_id);
    return Decoded{Message{h, std::move(payload)}, total};
  } catch (const Malformed& e) {
    return ProtocolError{e.reason};
  }
}

std::vector<ProtocolOffer> negotiate_hello(const HelloBody& local, const HelloBody& remote) {
  std::vector<ProtocolOffer> agreed;
  for (const auto& offer : local.offered) {
    if (std::find(remote.offered.begin(), remote.offered.end(), offer) != remote.offered.end()) {
      agreed.push_back(offer);
    }
  }
  return agreed;
}

HelloBody default_hello() { return HelloBody{{{kSimplifiedSbi, 0x01}}}; }

}  // namespace netcompose
