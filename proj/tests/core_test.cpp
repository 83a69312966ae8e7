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

#include <gtest/gtest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "netcompose/core.hpp"
#include "netcompose/text.hpp"
#include "support/core_harness.hpp"
#include "support/criteria.hpp"

namespace netcompose {
namespace {

using testing::CoreHarness;
using testing::ScriptedModule;

PacketIn pin(DatapathId dp, std::uint32_t dst) {
  PacketHeaders h;
  h.in_port = 1;
  h.ip_dst = Ipv4Addr{dst};
  return PacketIn{dp, h};
}

ScriptedModule emits(PortNo port) {
  return [port](const Event& ev) -> std::vector<Command> {
    if (!std::holds_alternative<PacketIn>(ev)) return {};
    const auto& p = std::get<PacketIn>(ev);
    FlowRule r;
    r.match.ip_dst = Ipv4Prefix::host(p.headers.ip_dst);
    r.actions = {Output{port}};
    return {FlowModAdd{p.datapath, r}};
  };
}

ScriptedModule nop() {
  return [](const Event&) -> std::vector<Command> { return {}; };
}

std::vector<LogEntry> of_kind(const EventLog& log, std::string_view kind) {
  std::vector<LogEntry> out;
  for (const auto& e : log.entries())
    if (e.kind == kind) out.push_back(e);
  return out;
}

TEST(Core, ParallelInvokesEveryChildWithSameInput) {
  CoreHarness hx(parse_spec("module fw\nmodule r1\nexecution parallel policy=ignore { fw r1 }"),
                 {{"fw", nop()}, {"r1", nop()}});
  const Event ev = pin(1, 5);
  hx.inject(ev);
  const auto invokes = of_kind(hx.log(), "invoke");
  ASSERT_EQ(invokes.size(), 2u);
  EXPECT_EQ(invokes[0].xid, invokes[1].xid);
  EXPECT_EQ(hx.seen_by("fw"), std::vector<Event>{ev});
  EXPECT_EQ(hx.seen_by("r1"), std::vector<Event>{ev});
}

TEST(Core, SequentialInvokesFirstOnly) {
  CoreHarness hx(parse_spec("module fw\nmodule r1\nexecution sequential { fw r1 }"),
                 {{"fw", nop()}, {"r1", nop()}});
  hx.inject(pin(1, 5));
  EXPECT_EQ(hx.seen_by("fw").size(), 1u);
  EXPECT_TRUE(hx.seen_by("r1").empty());
  hx.drain_fifo();
  EXPECT_EQ(hx.seen_by("r1").size(), 1u);
  EXPECT_EQ(hx.core().pending_events(), 0u);
}

TEST(Core, FilteredModuleIsAutoFenced) {
  CoreHarness hx(parse_spec("module fw events=packet_in\nmodule r1\nexecution parallel policy=ignore { fw r1 }"),
                 {{"fw", nop()}, {"r1", nop()}});
  hx.inject(PortStatus{1, 3, false});
  EXPECT_TRUE(hx.seen_by("fw").empty());
  EXPECT_EQ(hx.seen_by("r1").size(), 1u);
  const auto autos = of_kind(hx.log(), "auto_fence");
  ASSERT_EQ(autos.size(), 1u);
  EXPECT_EQ(autos[0].module_id, hx.id_of("fw"));
  hx.drain_fifo();
  EXPECT_EQ(of_kind(hx.log(), "compose").size(), 1u);
}

TEST(Core, EventMatchedByNoModuleComposesEmpty) {
  CoreHarness hx(parse_spec("module fw events=packet_in\nexecution fw"), {{"fw", nop()}});
  hx.inject(PortStatus{1, 3, false});
  const auto composes = of_kind(hx.log(), "compose");
  ASSERT_EQ(composes.size(), 1u);
  EXPECT_EQ(composes[0].detail, "commands=0");
  EXPECT_EQ(hx.core().pending_events(), 0u);
}

TEST(Core, UnregisteredModuleIsAutoFenced) {
  CoreHarness hx(parse_spec("module fw\nmodule ghost\nexecution parallel policy=ignore { fw ghost }"),
                 {{"fw", emits(2)}});
  hx.inject(pin(1, 5));
  hx.drain_fifo();
  EXPECT_EQ(of_kind(hx.log(), "auto_fence").size(), 1u);
  EXPECT_EQ(hx.shim_frames().size(), 1u);
}

TEST(Core, NonPacketEventAlongSequentialChainWarns) {
  CoreHarness hx(parse_spec("module a\nmodule b\nexecution sequential { a b }"), {{"a", nop()}, {"b", nop()}});
  const Event ev = FlowRemoved{1, FlowRule{}, RemovalReason::Hard, 3};
  hx.inject(ev);
  hx.drain_fifo();
  EXPECT_EQ(hx.seen_by("b"), std::vector<Event>{ev});
  EXPECT_EQ(of_kind(hx.log(), "warning").size(), 1u);
  EXPECT_EQ(hx.core().metrics().warnings, 1u);
}

TEST(Core, ConflictResolvedByPriority) {
  CoreHarness hx(parse_spec("module fw priority=9\nmodule r1 priority=1\nexecution parallel policy=priority { fw r1 }"),
                 {{"fw", emits(7)}, {"r1", emits(8)}});
  hx.inject(pin(1, 5));
  hx.drain_fifo();
  ASSERT_EQ(hx.shim_frames().size(), 1u);
  EXPECT_EQ(hx.shim_frames()[0].module_id, hx.id_of("fw"));
  EXPECT_EQ(hx.core().metrics().conflicts_detected, 1u);
  EXPECT_EQ(hx.core().metrics().resolved_priority, 1u);
  EXPECT_EQ(of_kind(hx.log(), "resolve")[0].detail, "policy=priority conflicts=1 sets=1 removed=1");
}

TEST(Core, RequiresHelloFirst) {
  EventLog log;
  Core core(parse_spec("module a\nexecution a"), log);
  auto out = core.handle(1, make_message(1, 0, 0, ModuleAnnouncement{"a"}));
  ASSERT_EQ(out.size(), 1u);
  const auto* err = std::get_if<ErrorBody>(&out[0].message.payload);
  ASSERT_NE(err, nullptr);
  EXPECT_EQ(err->code, static_cast<std::uint16_t>(ErrorCode::UnexpectedMessage));
  EXPECT_EQ(core.metrics().protocol_errors, 1u);
}

TEST(Core, IncompatibleHelloRejected) {
  EventLog log;
  Core core(parse_spec("module a\nexecution a"), log);
  auto out = core.handle(1, make_message(0, 0, 0, HelloBody{{{0x04, 0x04}}}));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_TRUE(std::holds_alternative<HelloBody>(out[0].message.payload));
  EXPECT_EQ(std::get<ErrorBody>(out[1].message.payload).code,
            static_cast<std::uint16_t>(ErrorCode::IncompatibleProtocols));
}

TEST(Core, RegistrationAssignsIdsAndRejectsDuplicates) {
  EventLog log;
  Core core(parse_spec("module a\nmodule b\nexecution parallel policy=ignore { a b }"), log);
  core.handle(1, make_message(0, 0, 0, default_hello()));
  core.handle(2, make_message(0, 0, 0, default_hello()));
  auto a = core.handle(1, make_message(1, 0, 0, ModuleAnnouncement{"a"}));
  auto b = core.handle(2, make_message(1, 0, 0, ModuleAnnouncement{"b"}));
  EXPECT_EQ(a.at(0).message.header.module_id, 1u);
  EXPECT_EQ(b.at(0).message.header.module_id, 2u);
  EXPECT_EQ(std::get<ModuleAcknowledge>(b[0].message.payload).name, "b");
  auto dup = core.handle(2, make_message(2, 0, 0, ModuleAnnouncement{"a"}));
  EXPECT_EQ(std::get<ErrorBody>(dup.at(0).message.payload).code,
            static_cast<std::uint16_t>(ErrorCode::DuplicateModule));
  auto extra = core.handle(2, make_message(3, 0, 0, ModuleAnnouncement{"extra"}));
  EXPECT_TRUE(std::holds_alternative<ModuleAcknowledge>(extra.at(0).message.payload));
  EXPECT_EQ(core.metrics().warnings, 1u);
  EXPECT_EQ(core.module_id("b"), 2u);
}

class CoreErrors : public ::testing::Test {
 protected:
  void SetUp() override {
    core_.handle(1, make_message(0, 0, 0, default_hello()));
    core_.handle(1, make_message(1, 0, 0, ModuleAnnouncement{"a"}));
    core_.handle(2, make_message(0, 0, 0, default_hello()));
    core_.handle(2, make_message(1, 0, 0, ModuleAnnouncement{"b"}));
  }
  std::uint16_t code(const std::vector<Outbound>& out) {
    EXPECT_EQ(out.size(), 1u);
    if (out.empty()) return 0;
    const auto* e = std::get_if<ErrorBody>(&out[0].message.payload);
    return e ? e->code : 0;
  }
  static constexpr auto c(ErrorCode e) { return static_cast<std::uint16_t>(e); }

  EventLog log_;
  Core core_{parse_spec("module a\nmodule b\nexecution parallel policy=ignore { a b }"), log_};
};

TEST_F(CoreErrors, UnknownXid) { EXPECT_EQ(code(core_.handle(1, make_fence(99, 1))), c(ErrorCode::UnknownXid)); }

TEST_F(CoreErrors, DuplicateFenceWhilePendingAndAfterCompletion) {
  core_.dispatch_event(pin(1, 1));
  EXPECT_TRUE(core_.handle(1, make_fence(1, 1)).empty());
  EXPECT_EQ(code(core_.handle(1, make_fence(1, 1))), c(ErrorCode::DuplicateFence));
  core_.handle(2, make_fence(1, 2));
  EXPECT_EQ(core_.pending_events(), 0u);
  EXPECT_EQ(code(core_.handle(2, make_fence(1, 2))), c(ErrorCode::DuplicateFence));
}

TEST_F(CoreErrors, CommandAfterFence) {
  core_.dispatch_event(pin(1, 1));
  core_.handle(1, make_fence(1, 1));
  EXPECT_EQ(code(core_.handle(1, make_sbi(1, 1, FlowModDelete{1, {}}))), c(ErrorCode::UnexpectedMessage));
}

TEST_F(CoreErrors, ModuleIdFromWrongEndpoint) {
  core_.dispatch_event(pin(1, 1));
  EXPECT_EQ(code(core_.handle(2, make_fence(1, 1))), c(ErrorCode::UnknownModule));
  EXPECT_EQ(code(core_.handle(2, make_sbi(1, 1, FlowModDelete{1, {}}))), c(ErrorCode::UnknownModule));
}

TEST_F(CoreErrors, EventsFromBackendAndCommandsFromShimRejected) {
  core_.handle(kShimEndpoint, make_message(0, 0, 0, default_hello()));
  EXPECT_EQ(code(core_.handle(1, make_sbi(5, 1, PacketIn{1, {}}))), c(ErrorCode::UnexpectedMessage));
  EXPECT_EQ(code(core_.handle(kShimEndpoint, make_sbi(5, 0, FlowModDelete{1, {}}))),
            c(ErrorCode::UnexpectedMessage));
}

TEST_F(CoreErrors, ReceivedErrorCounts) {
  EXPECT_TRUE(core_.handle(1, make_error(0, 1, ErrorCode::BudgetExceeded, "slow")).empty());
  EXPECT_EQ(core_.metrics().protocol_errors, 1u);
  EXPECT_EQ(log_.count("error"), 1u);
}

TEST_F(CoreErrors, StatsTicketRestoresModuleXid) {
  auto fwd = core_.handle(2, make_sbi(42, 2, StatsRequest{3, Match{}}));
  ASSERT_EQ(fwd.size(), 1u);
  EXPECT_EQ(fwd[0].to, kShimEndpoint);
  const Xid core_xid = fwd[0].message.header.xid;
  EXPECT_NE(core_xid, 42u);
  EXPECT_EQ(core_.outstanding_tickets(), 1u);
  core_.handle(kShimEndpoint, make_message(0, 0, 0, default_hello()));
  auto back = core_.handle(kShimEndpoint, make_sbi(core_xid, 0, StatsReply{3, {}}));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].to, 2u);
  EXPECT_EQ(back[0].message.header.xid, 42u);
  EXPECT_EQ(back[0].message.header.module_id, 2u);
  EXPECT_EQ(core_.outstanding_tickets(), 0u);
}

TEST_F(CoreErrors, OrphanStatsReplyWarns) {
  auto out = core_.correlate_reply(77, StatsReply{3, {}});
  EXPECT_TRUE(out.empty());
  EXPECT_EQ(core_.metrics().warnings, 1u);
  EXPECT_EQ(log_.count("warning"), 1u);
}

TEST(OutputScheduler, HoldsLaterEventOnSameDatapath) {
  OutputScheduler s;
  s.admit(1, 5);
  s.admit(2, 5);
  bool held = false;
  EXPECT_TRUE(s.complete(2, 20, {}, &held).empty());
  EXPECT_TRUE(held);
  EXPECT_EQ(s.buffered(), 1u);
  auto r = s.complete(1, 10, {}, &held);
  EXPECT_FALSE(held);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].seq, 1u);
  EXPECT_EQ(r[1].seq, 2u);
  EXPECT_EQ(s.buffered(), 0u);
}

TEST(OutputScheduler, OtherDatapathReleasesImmediately) {
  OutputScheduler s;
  s.admit(1, 5);
  s.admit(2, 6);
  bool held = true;
  auto r = s.complete(2, 20, {}, &held);
  EXPECT_FALSE(held);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].datapath, 6u);
}

TEST(Core, OrderingBufferAcrossDatapaths) {
  CoreHarness hx(parse_spec("module a\nexecution a"), {{"a", emits(1)}});
  hx.inject(pin(5, 1));  // xid 1
  hx.inject(pin(5, 2));  // xid 2
  hx.inject(pin(6, 3));  // xid 3
  // The endpoint's own queue is FIFO, so answer out of order by hand.
  Core& core = hx.core();
  auto answer = [&](Xid xid, DatapathId dp) {
    EXPECT_TRUE(core.handle(1, make_sbi(xid, 1, FlowModDelete{dp, {}})).empty());
    return core.handle(1, make_fence(xid, 1));
  };
  EXPECT_TRUE(answer(2, 5).empty());  // held behind xid 1
  auto r3 = answer(3, 6);
  ASSERT_EQ(r3.size(), 1u);  // other datapath: released at once
  EXPECT_EQ(r3[0].message.header.xid, 3u);
  auto r1 = answer(1, 5);
  ASSERT_EQ(r1.size(), 2u);  // xid 1, then the held xid 2
  EXPECT_EQ(r1[0].message.header.xid, 1u);
  EXPECT_EQ(r1[1].message.header.xid, 2u);
  EXPECT_EQ(core.metrics().outputs_buffered, 1u);
}

TEST(Core, OrderingRandomSchedules) {
  auto v = testing::check_barrier(900, 30);
  EXPECT_TRUE(v.pass) << v.detail;
}

TEST(Core, MetricsMatchLogCounts) {
  testing::Rng rng(61);
  CoreHarness hx(parse_spec("module m1 priority=3\nmodule m2 priority=2\nmodule m3 priority=1\n"
                            "execution parallel policy=priority { m1 m2 m3 }"),
                 testing::barrier_modules());
  for (const auto& e : testing::barrier_events()) hx.inject(e);
  hx.drain_random(rng);
  const auto& m = hx.core().metrics();
  const auto& log = hx.log();
  EXPECT_EQ(m.events_processed, log.count("event"));
  EXPECT_EQ(m.fences_received, log.count("fence"));
  EXPECT_EQ(m.conflicts_detected, log.count("conflict"));
  EXPECT_EQ(m.resolved_priority, log.count("conflict"));
  EXPECT_EQ(m.outputs_buffered, log.count("buffer"));
  EXPECT_EQ(m.warnings, log.count("warning"));
  EXPECT_EQ(m.protocol_errors, log.count("protocol_error") + log.count("error"));
  std::uint64_t prev = 0;
  for (const auto& e : log.entries()) {
    EXPECT_GT(e.seq, prev);
    prev = e.seq;
  }
}

}  // namespace
}  // namespace netcompose
