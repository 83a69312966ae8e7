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

#include <vector>

#include "netcompose/composition.hpp"
#include "netcompose/text.hpp"
#include "support/testgen.hpp"

namespace netcompose {
namespace {

FlowModAdd add(DatapathId dp, std::string_view match, ActionList actions, std::uint16_t prio = 100) {
  FlowRule r;
  r.priority = prio;
  r.match = parse_match(match);
  r.actions = std::move(actions);
  return FlowModAdd{dp, r};
}

TEST(SpecParse, ParallelPriority) {
  const auto spec = parse_spec("module fw priority=10\nmodule r1 priority=5\nexecution parallel policy=priority { fw r1 }");
  ASSERT_EQ(spec.modules.size(), 2u);
  EXPECT_EQ(spec.modules[0].priority, 10);
  EXPECT_EQ(spec.root, ExecNode::parallel(Policy{PolicyKind::Priority, std::nullopt},
                                          {ExecNode::leaf("fw"), ExecNode::leaf("r1")}));
}

TEST(SpecParse, NestedTree) {
  const auto spec = parse_spec(
      "# nested\nmodule fw\nmodule r1\nmodule lb\n"
      "execution sequential { fw parallel policy=ignore { r1 lb } }\n");
  const ExecNode expected = ExecNode::sequential(
      {ExecNode::leaf("fw"),
       ExecNode::parallel(Policy{PolicyKind::Ignore, std::nullopt}, {ExecNode::leaf("r1"), ExecNode::leaf("lb")})});
  EXPECT_EQ(spec.root, expected);
}

TEST(SpecParse, EventsAndFields) {
  const auto spec = parse_spec(
      "module a events=packet_in,flow_removed\nmodule b\n"
      "execution parallel policy=discard fields=output,eth_dst { a b }");
  ASSERT_TRUE(spec.modules[0].events);
  EXPECT_TRUE(spec.modules[0].accepts(EventKind::FlowRemoved));
  EXPECT_FALSE(spec.modules[0].accepts(EventKind::PortStatus));
  EXPECT_TRUE(spec.modules[1].accepts(EventKind::PortStatus));
  ASSERT_TRUE(spec.root.policy.scope);
  EXPECT_TRUE(spec.root.policy.scope->output);
  EXPECT_EQ(spec.root.policy.scope->fields, std::set<HeaderField>{HeaderField::EthDst});
}

TEST(SpecParse, FormatRoundTrip) {
  const auto spec = parse_spec(
      "module fw priority=3 events=packet_in\nmodule r1\nmodule lb priority=1\n"
      "execution sequential { fw parallel policy=discard fields=ip_dst { r1 lb } }\n");
  EXPECT_EQ(parse_spec(format_spec(spec)), spec);
}

struct BadSpec {
  const char* text;
  SpecError::Kind kind;
};

class SpecErrors : public ::testing::TestWithParam<BadSpec> {};

TEST_P(SpecErrors, Rejected) {
  try {
    parse_spec(GetParam().text);
    FAIL() << "accepted: " << GetParam().text;
  } catch (const SpecError& e) {
    EXPECT_EQ(e.kind(), GetParam().kind) << e.what();
    EXPECT_GE(e.line(), 1);
  }
}

INSTANTIATE_TEST_SUITE_P(
    Cases, SpecErrors,
    ::testing::Values(BadSpec{"module fw\nexecution nat", SpecError::Kind::Semantic},
                      BadSpec{"module fw\nmodule fw\nexecution fw", SpecError::Kind::Semantic},
                      BadSpec{"module fw\nmodule r1\nexecution parallel { fw r1 }", SpecError::Kind::Semantic},
                      BadSpec{"module fw\nexecution sequential { fw fw }", SpecError::Kind::Semantic},
                      BadSpec{"module fw priority=-1\nexecution fw", SpecError::Kind::Semantic},
                      BadSpec{"module fw\nexecution sequential { }", SpecError::Kind::Syntax},
                      BadSpec{"module fw\nexecution sequential { fw", SpecError::Kind::Syntax},
                      BadSpec{"execution fw", SpecError::Kind::Syntax},
                      BadSpec{"module fw events=bogus\nexecution fw", SpecError::Kind::Semantic},
                      BadSpec{"module fw\nexecution fw fw", SpecError::Kind::Syntax}));

TEST(SpecParse, ErrorCarriesPosition) {
  try {
    parse_spec("module fw\n\nexecution parallel policy=sometimes { fw }");
    FAIL();
  } catch (const SpecError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_GT(e.column(), 1);
  }
}

TEST(Merge, TwoRulesUnderEachPolicy) {
  const Command fw = add(1, "ip_dst=10.0.3.0/24", {Drop{}}, 200);
  const Command r1 = add(1, "ip_dst=10.0.3.0/24", {Output{4}});
  const std::vector<Contribution> set = {{1, 10, 0, {fw}}, {2, 5, 1, {r1}}};

  auto discard = merge_parallel(set, {PolicyKind::Discard, std::nullopt});
  EXPECT_TRUE(discard.commands.empty());
  EXPECT_EQ(discard.report.removed, 2u);
  ASSERT_EQ(discard.report.pairs.size(), 1u);
  EXPECT_EQ(discard.report.pairs[0].first, (CommandRef{1, 0}));
  EXPECT_EQ(discard.report.pairs[0].second, (CommandRef{2, 0}));

  auto ignore = merge_parallel(set, {PolicyKind::Ignore, std::nullopt});
  EXPECT_EQ(ignore.commands, (std::vector<TaggedCommand>{{1, fw}, {2, r1}}));
  EXPECT_EQ(ignore.report.conflicting_sets, 1u);

  auto prio = merge_parallel(set, {PolicyKind::Priority, std::nullopt});
  EXPECT_EQ(prio.commands, (std::vector<TaggedCommand>{{1, fw}}));
  EXPECT_TRUE(prio.report.warnings.empty());
}

TEST(Merge, PriorityTieGoesToLowestModuleIdWithWarning) {
  const Command a = add(1, "any", {Output{1}});
  const Command b = add(1, "any", {Output{2}});
  const std::vector<Contribution> set = {{5, 7, 0, {b}}, {3, 7, 1, {a}}};
  auto r = merge_parallel(set, {PolicyKind::Priority, std::nullopt});
  EXPECT_EQ(r.commands, (std::vector<TaggedCommand>{{3, a}}));
  ASSERT_EQ(r.report.warnings.size(), 1u);
}

TEST(Merge, OwnCommandsNeverConflict) {
  const Command a = add(1, "any", {Output{1}});
  const Command b = add(1, "any", {Output{2}});
  const std::vector<Contribution> set = {{1, 1, 0, {a, b}}};
  auto r = merge_parallel(set, {PolicyKind::Discard, std::nullopt});
  EXPECT_EQ(r.commands.size(), 2u);
  EXPECT_TRUE(r.report.pairs.empty());
}

TEST(Merge, DiscardKeepsNonConflictingRemainder) {
  const Command a = add(1, "tp_dst=80", {Output{1}});
  const Command keep = add(1, "tp_dst=22", {Output{1}});
  const Command b = add(1, "tp_dst=80", {Output{2}});
  const std::vector<Contribution> set = {{1, 1, 0, {a, keep}}, {2, 1, 1, {b}}};
  auto r = merge_parallel(set, {PolicyKind::Discard, std::nullopt});
  EXPECT_EQ(r.commands, (std::vector<TaggedCommand>{{1, keep}}));
}

TEST(Merge, OutputFollowsDeclarationOrder) {
  const Command a = add(1, "tp_dst=1", {Output{1}});
  const Command b = add(1, "tp_dst=2", {Output{1}});
  const std::vector<Contribution> set = {{1, 0, 1, {a}}, {2, 0, 0, {b}}};
  auto r = merge_parallel(set, {PolicyKind::Ignore, std::nullopt});
  EXPECT_EQ(r.commands, (std::vector<TaggedCommand>{{2, b}, {1, a}}));
}

TEST(Merge, ScopedPolicyIgnoresOtherFields) {
  const Command a = add(1, "any", {SetField{HeaderField::EthDst, 1}, Output{1}});
  const Command b = add(1, "any", {SetField{HeaderField::EthDst, 2}, Output{1}});
  const std::vector<Contribution> set = {{1, 0, 0, {a}}, {2, 0, 1, {b}}};
  auto out_only = merge_parallel(set, {PolicyKind::Discard, ConflictScope{true, {}}});
  EXPECT_EQ(out_only.commands.size(), 2u);
  auto eth = merge_parallel(set, {PolicyKind::Discard, ConflictScope{false, {HeaderField::EthDst}}});
  EXPECT_TRUE(eth.commands.empty());
}

TEST(Merge, PoliciesAgreeWithOracle) {
  testing::Rng rng(51);
  testing::ResultSetGenerator gen;
  for (int i = 0; i < 300; ++i) {
    const auto set = gen.random_set(rng);
    for (PolicyKind k : {PolicyKind::Discard, PolicyKind::Ignore, PolicyKind::Priority}) {
      ASSERT_EQ(merge_parallel(set, {k, std::nullopt}).commands, testing::oracle_merge(set, k));
    }
  }
}

TEST(Merge, NopContributesNothing) {
  testing::Rng rng(52);
  testing::ResultSetGenerator gen;
  for (int i = 0; i < 100; ++i) {
    auto set = gen.random_set(rng);
    auto with_nop = set;
    with_nop.push_back(Contribution{9, 100, 9, {}});
    for (PolicyKind k : {PolicyKind::Discard, PolicyKind::Ignore, PolicyKind::Priority}) {
      EXPECT_EQ(merge_parallel(set, {k, std::nullopt}).commands, merge_parallel(with_nop, {k, std::nullopt}).commands);
    }
  }
}

PacketIn pin(std::string_view headers) { return PacketIn{1, parse_headers(headers)}; }

TEST(Sequential, NopLeavesInputUnchanged) {
  const Event ev = pin("in_port=1,ip_dst=10.0.2.100");
  const std::vector<std::vector<Command>> prior = {{}};
  auto d = derive_sequential_input(ev, prior);
  EXPECT_EQ(d.event, ev);
  EXPECT_FALSE(d.short_circuit);
}

TEST(Sequential, DropShortCircuits) {
  const Event ev = pin("in_port=1,ip_dst=10.0.3.10");
  const std::vector<std::vector<Command>> prior = {{add(1, "ip_dst=10.0.3.0/24", {Drop{}})}};
  EXPECT_TRUE(derive_sequential_input(ev, prior).short_circuit);
}

TEST(Sequential, RewriteApplies) {
  const Event ev = pin("in_port=1,ip_dst=10.0.2.100");
  const std::vector<std::vector<Command>> prior = {
      {add(1, "ip_dst=10.0.2.100", {SetField{HeaderField::IpDst, 0x0A000209}, Output{2}})}};
  auto d = derive_sequential_input(ev, prior);
  EXPECT_EQ(std::get<PacketIn>(d.event).headers, parse_headers("in_port=1,ip_dst=10.0.2.9"));
}

TEST(Sequential, RulesNotCoveringThePacketAreIgnored) {
  const Event ev = pin("in_port=1,ip_dst=10.0.2.100");
  const std::vector<std::vector<Command>> prior = {
      {add(1, "ip_dst=10.0.9.0/24", {Drop{}}), add(2, "any", {Drop{}}),
       PacketOut{1, parse_headers("in_port=2"), {Drop{}}}}};
  auto d = derive_sequential_input(ev, prior);
  EXPECT_FALSE(d.short_circuit);
  EXPECT_EQ(d.event, ev);
}

TEST(Sequential, PacketOutForSamePacketApplies) {
  const Event ev = pin("in_port=1,ip_dst=10.0.2.100");
  const auto& h = std::get<PacketIn>(ev).headers;
  const std::vector<std::vector<Command>> prior = {
      {PacketOut{1, h, {SetField{HeaderField::TpDst, 8080}, Output{1}}}}};
  auto d = derive_sequential_input(ev, prior);
  EXPECT_EQ(std::get<PacketIn>(d.event).headers.tp_dst, 8080);
}

TEST(Sequential, LaterStageSeesEarlierRewrite) {
  const Event ev = pin("ip_dst=10.0.2.100");
  const std::vector<std::vector<Command>> prior = {
      {add(1, "ip_dst=10.0.2.100", {SetField{HeaderField::IpDst, 0x0A00020A}})},
      {add(1, "ip_dst=10.0.2.10", {SetField{HeaderField::TpDst, 81}})}};
  auto d = derive_sequential_input(ev, prior);
  EXPECT_EQ(std::get<PacketIn>(d.event).headers, parse_headers("ip_dst=10.0.2.10,tp_dst=81"));
}

TEST(Sequential, NonPacketEventsPassThrough) {
  const Event ev = PortStatus{1, 2, false};
  const std::vector<std::vector<Command>> prior = {{add(1, "any", {Drop{}})}};
  auto d = derive_sequential_input(ev, prior);
  EXPECT_TRUE(d.passthrough);
  EXPECT_FALSE(d.short_circuit);
  EXPECT_EQ(d.event, ev);
}

}  // namespace
}  // namespace netcompose
