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

#include "netcompose/core.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <utility>

#include "netcompose/overloaded.hpp"
#include "netcompose/text.hpp"

namespace netcompose {

// ---------------------------------------------------------------------------
// OutputScheduler

void OutputScheduler::admit(std::uint64_t seq, DatapathId datapath) {
  queues_[datapath].push_back(Slot{seq, false, {}});
  datapath_of_[seq] = datapath;
}

std::vector<OutputScheduler::Release> OutputScheduler::complete(
    std::uint64_t seq, Xid xid, std::vector<TaggedCommand> commands, bool* held) {
  std::vector<Release> out;
  auto dp_it = datapath_of_.find(seq);
  if (dp_it == datapath_of_.end()) {
    if (held) *held = false;
    return out;
  }
  auto& queue = queues_[dp_it->second];
  for (auto& slot : queue) {
    if (slot.seq == seq) {
      slot.done = true;
      slot.release = Release{seq, xid, dp_it->second, std::move(commands)};
      break;
    }
  }
  bool released_self = false;
  while (!queue.empty() && queue.front().done) {
    if (queue.front().seq == seq) released_self = true;
    datapath_of_.erase(queue.front().seq);
    out.push_back(std::move(queue.front().release));
    queue.pop_front();
  }
  if (held) *held = !released_self;
  return out;
}

std::size_t OutputScheduler::buffered() const {
  std::size_t n = 0;
  for (const auto& [dp, queue] : queues_) {
    for (const auto& slot : queue) n += slot.done ? 1 : 0;
  }
  return n;
}

// ---------------------------------------------------------------------------
// Core

struct Core::NodeRun {
  const ExecNode* node = nullptr;
  NodeRun* parent = nullptr;
  Event input;
  std::vector<TaggedCommand> output;

  ModuleId module = 0;
  std::vector<Command> collected;

  std::vector<std::unique_ptr<NodeRun>> children;
  std::vector<std::vector<Command>> stage_results;
  std::size_t next_stage = 0;
  std::size_t remaining = 0;
  bool starting = false;
};

struct Core::PendingEvent {
  Xid xid = 0;
  std::uint64_t seq = 0;
  DatapathId datapath = 0;
  std::unique_ptr<NodeRun> root;
  std::map<ModuleId, NodeRun*> awaiting;
  std::set<ModuleId> fenced;
  bool composed = false;
};

namespace {

std::vector<Command> untag(const std::vector<TaggedCommand>& tagged) {
  std::vector<Command> out;
  out.reserve(tagged.size());
  for (const auto& t : tagged) out.push_back(t.command);
  return out;
}

}  // namespace

Core::Core(CompositionSpec spec, EventLog& log, CoreOptions options)
    : spec_(std::move(spec)), log_(log), options_(std::move(options)) {}

Core::~Core() = default;

std::optional<ModuleId> Core::module_id(std::string_view name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

Outbound Core::reject(EndpointId from, Xid xid, ModuleId module_id, ErrorCode code,
                      std::string text) {
  ++metrics_.protocol_errors;
  log_.append("protocol_error", xid, module_id, 0,
              std::string(error_code_name(code)) + ": " + text);
  return Outbound{from, make_error(xid, module_id, code, std::move(text))};
}

std::vector<Outbound> Core::handle(EndpointId from, const Message& msg) {
  const auto& h = msg.header;
  if (std::holds_alternative<HelloBody>(msg.payload)) return on_hello(from, msg);
  if (!hello_done_[from]) {
    return {reject(from, h.xid, h.module_id, ErrorCode::UnexpectedMessage,
                   "no successful HELLO on this connection")};
  }
  return std::visit(
      Overloaded{
          [&](const HelloBody&) -> std::vector<Outbound> { return {}; },
          [&](const ModuleAnnouncement&) { return on_announcement(from, msg); },
          [&](const ModuleAcknowledge&) -> std::vector<Outbound> {
            return {reject(from, h.xid, h.module_id, ErrorCode::UnexpectedMessage,
                           "MODULE_ACKNOWLEDGE is sent by the core only")};
          },
          [&](const FenceBody&) { return handle_fence(from, h.xid, h.module_id); },
          [&](const ErrorBody& e) -> std::vector<Outbound> {
            ++metrics_.protocol_errors;
            log_.append("error", h.xid, h.module_id, h.datapath_id,
                        "code=" + std::to_string(e.code) + " " + e.text);
            return {};
          },
          [&](const SbiMessage& body) -> std::vector<Outbound> {
            if (from == kShimEndpoint) {
              if (const auto* reply = std::get_if<StatsReply>(&body)) {
                return correlate_reply(h.xid, *reply);
              }
              if (auto ev = as_event(body)) return dispatch_event(*ev);
              return {reject(from, h.xid, h.module_id, ErrorCode::UnexpectedMessage,
                             "commands are not accepted from the network side")};
            }
            if (auto cmd = as_command(body)) return on_command(from, msg, *cmd);
            return {reject(from, h.xid, h.module_id, ErrorCode::UnexpectedMessage,
                           "events are not accepted from a backend")};
          },
      },
      msg.payload);
}

std::vector<Outbound> Core::on_hello(EndpointId from, const Message& msg) {
  const auto& remote = std::get<HelloBody>(msg.payload);
  auto agreed = negotiate_hello(options_.hello, remote);
  std::vector<Outbound> out;
  out.push_back(Outbound{from, make_message(msg.header.xid, 0, 0, options_.hello)});
  if (agreed.empty()) {
    hello_done_[from] = false;
    out.push_back(reject(from, msg.header.xid, 0, ErrorCode::IncompatibleProtocols,
                         "no protocol in common"));
    return out;
  }
  hello_done_[from] = true;
  log_.append("hello", msg.header.xid, 0, 0,
              "endpoint=" + std::to_string(from) + " protocols=" + std::to_string(agreed.size()));
  return out;
}

std::vector<Outbound> Core::on_announcement(EndpointId from, const Message& msg) {
  const auto& name = std::get<ModuleAnnouncement>(msg.payload).name;
  if (by_name_.count(name) != 0) {
    return {reject(from, msg.header.xid, 0, ErrorCode::DuplicateModule,
                   "module '" + name + "' is already registered")};
  }
  const ModuleId id = next_module_id_++;
  modules_[id] = RegisteredModule{id, name, from};
  by_name_.emplace(name, id);
  log_.append("register", msg.header.xid, id, 0, name);
  if (spec_.find(name) == nullptr) {
    ++metrics_.warnings;
    log_.append("warning", msg.header.xid, id, 0,
                "module '" + name + "' is not part of the composition");
  }
  return {Outbound{from, make_message(msg.header.xid, id, 0, ModuleAcknowledge{name})}};
}

std::vector<Outbound> Core::on_command(EndpointId from, const Message& msg, const Command& cmd) {
  const auto& h = msg.header;
  auto mod = modules_.find(h.module_id);
  if (mod == modules_.end() || mod->second.endpoint != from) {
    return {reject(from, h.xid, h.module_id, ErrorCode::UnknownModule,
                   "module id not registered on this connection")};
  }

  if (const auto* req = std::get_if<StatsRequest>(&cmd)) {
    // Read-state requests skip composition and go straight to the network.
    const Xid core_xid = next_xid_++;
    tickets_[core_xid] = ReadStateTicket{core_xid, h.module_id, h.xid, from};
    log_.append("stats_forward", core_xid, h.module_id, req->datapath,
                "module_xid=" + std::to_string(h.xid));
    return {Outbound{kShimEndpoint, make_sbi(core_xid, h.module_id, *req)}};
  }

  auto it = pending_.find(h.xid);
  if (it == pending_.end()) {
    if (completed_.count(h.xid) != 0) {
      return {reject(from, h.xid, h.module_id, ErrorCode::UnexpectedMessage,
                     "command after the event completed")};
    }
    return {reject(from, h.xid, h.module_id, ErrorCode::UnknownXid, "no such pending event")};
  }
  PendingEvent& pe = *it->second;
  auto a = pe.awaiting.find(h.module_id);
  if (a == pe.awaiting.end()) {
    if (pe.fenced.count(h.module_id) != 0) {
      return {reject(from, h.xid, h.module_id, ErrorCode::UnexpectedMessage,
                     "command after FENCE")};
    }
    return {reject(from, h.xid, h.module_id, ErrorCode::UnknownModule,
                   "module was not invoked for this event")};
  }
  a->second->collected.push_back(cmd);
  log_.append("command", h.xid, h.module_id, datapath_of(cmd), format_command(cmd));
  return {};
}

std::vector<Outbound> Core::dispatch_event(const Event& ev) {
  std::vector<Outbound> out;
  auto owned = std::make_unique<PendingEvent>();
  PendingEvent& pe = *owned;
  pe.xid = next_xid_++;
  pe.seq = next_seq_++;
  pe.datapath = datapath_of(ev);
  pe.root = std::make_unique<NodeRun>();
  pe.root->node = &spec_.root;
  pe.root->input = ev;
  pending_.emplace(pe.xid, std::move(owned));

  ++metrics_.events_processed;
  log_.append("event", pe.xid, 0, pe.datapath, format_event(ev));
  scheduler_.admit(pe.seq, pe.datapath);

  start(pe, *pe.root, out);
  if (pe.composed) {
    completed_.insert(pe.xid);
    pending_.erase(pe.xid);
  }
  return out;
}

std::vector<Outbound> Core::handle_fence(EndpointId from, Xid xid, ModuleId module_id) {
  auto it = pending_.find(xid);
  if (it == pending_.end()) {
    if (completed_.count(xid) != 0) {
      return {reject(from, xid, module_id, ErrorCode::DuplicateFence,
                     "event already complete")};
    }
    return {reject(from, xid, module_id, ErrorCode::UnknownXid, "no such pending event")};
  }
  PendingEvent& pe = *it->second;
  auto a = pe.awaiting.find(module_id);
  if (a == pe.awaiting.end()) {
    if (pe.fenced.count(module_id) != 0) {
      return {reject(from, xid, module_id, ErrorCode::DuplicateFence,
                     "module already fenced this event")};
    }
    return {reject(from, xid, module_id, ErrorCode::UnknownModule,
                   "module was not invoked for this event")};
  }
  auto mod = modules_.find(module_id);
  if (mod == modules_.end() || mod->second.endpoint != from) {
    return {reject(from, xid, module_id, ErrorCode::UnknownModule,
                   "module id not registered on this connection")};
  }

  NodeRun& run = *a->second;
  pe.awaiting.erase(a);
  pe.fenced.insert(module_id);
  ++metrics_.fences_received;
  log_.append("fence", xid, module_id, pe.datapath,
              "commands=" + std::to_string(run.collected.size()));
  for (auto& cmd : run.collected) run.output.push_back(TaggedCommand{module_id, std::move(cmd)});
  run.collected.clear();

  std::vector<Outbound> out;
  finish(pe, run, out);
  if (pe.composed) {
    completed_.insert(xid);
    pending_.erase(xid);
  }
  return out;
}

std::vector<Outbound> Core::correlate_reply(Xid core_xid, const StatsReply& reply) {
  auto it = tickets_.find(core_xid);
  if (it == tickets_.end()) {
    ++metrics_.warnings;
    log_.append("warning", core_xid, 0, reply.datapath, "stats reply with no outstanding request");
    return {};
  }
  ReadStateTicket t = it->second;
  tickets_.erase(it);
  log_.append("stats_reply", t.module_xid, t.module_id, reply.datapath,
              "entries=" + std::to_string(reply.entries.size()));
  return {Outbound{t.endpoint, make_sbi(t.module_xid, t.module_id, reply)}};
}

void Core::start(PendingEvent& pe, NodeRun& run, std::vector<Outbound>& out) {
  const ExecNode& node = *run.node;
  switch (node.kind) {
    case ExecNode::Kind::Module: {
      const ModuleDecl* decl = spec_.find(node.module);
      auto reg = by_name_.find(node.module);
      if (reg == by_name_.end()) {
        log_.append("auto_fence", pe.xid, 0, pe.datapath, node.module + " not registered");
        finish(pe, run, out);
        return;
      }
      const EventKind kind = event_kind(run.input);
      if (decl != nullptr && !decl->accepts(kind)) {
        log_.append("auto_fence", pe.xid, reg->second, pe.datapath,
                    node.module + " filters " + std::string(event_kind_name(kind)));
        finish(pe, run, out);
        return;
      }
      run.module = reg->second;
      pe.awaiting[run.module] = &run;
      log_.append("invoke", pe.xid, run.module, pe.datapath, node.module);
      out.push_back(Outbound{modules_.at(run.module).endpoint,
                             make_sbi(pe.xid, run.module, to_sbi(run.input))});
      return;
    }
    case ExecNode::Kind::Sequential:
      run.next_stage = 0;
      start_next_stage(pe, run, out);
      return;
    case ExecNode::Kind::Parallel: {
      for (const auto& child : node.children) {
        auto c = std::make_unique<NodeRun>();
        c->node = &child;
        c->parent = &run;
        c->input = run.input;
        run.children.push_back(std::move(c));
      }
      run.remaining = run.children.size();
      run.starting = true;
      for (auto& c : run.children) start(pe, *c, out);
      run.starting = false;
      if (run.remaining == 0) finish_parallel(pe, run, out);
      return;
    }
  }
}

void Core::start_next_stage(PendingEvent& pe, NodeRun& seq, std::vector<Outbound>& out) {
  const auto& children = seq.node->children;
  if (seq.next_stage == children.size()) {
    finish(pe, seq, out);
    return;
  }
  Event input = seq.input;
  if (seq.next_stage > 0) {
    DerivedInput d = derive_sequential_input(seq.input, seq.stage_results);
    if (d.short_circuit) {
      log_.append("short_circuit", pe.xid, 0, pe.datapath,
                  "skipped=" + std::to_string(children.size() - seq.next_stage));
      finish(pe, seq, out);
      return;
    }
    if (d.passthrough && seq.next_stage == 1) {
      ++metrics_.warnings;
      log_.append("warning", pe.xid, 0, pe.datapath,
                  std::string(event_kind_name(event_kind(seq.input))) +
                      " passed unmodified along a sequential chain");
    }
    input = std::move(d.event);
  }
  auto c = std::make_unique<NodeRun>();
  c->node = &children[seq.next_stage];
  c->parent = &seq;
  c->input = std::move(input);
  NodeRun& child = *c;
  seq.children.push_back(std::move(c));
  ++seq.next_stage;
  start(pe, child, out);
}

void Core::finish(PendingEvent& pe, NodeRun& run, std::vector<Outbound>& out) {
  if (run.parent == nullptr) {
    compose(pe, out);
    return;
  }
  NodeRun& parent = *run.parent;
  if (parent.node->kind == ExecNode::Kind::Sequential) {
    parent.stage_results.push_back(untag(run.output));
    parent.output.insert(parent.output.end(), run.output.begin(), run.output.end());
    start_next_stage(pe, parent, out);
    return;
  }
  assert(parent.remaining > 0);
  --parent.remaining;
  if (parent.remaining == 0 && !parent.starting) finish_parallel(pe, parent, out);
}

void Core::finish_parallel(PendingEvent& pe, NodeRun& run, std::vector<Outbound>& out) {
  std::vector<Contribution> contributions;
  contributions.reserve(run.children.size());
  for (const auto& c : run.children) {
    contributions.push_back(Contribution{subtree_module(*c->node), subtree_priority(*c->node),
                                         subtree_order(*c->node), untag(c->output)});
  }
  const Policy& policy = run.node->policy;
  MergeResult merged = merge_parallel(contributions, policy);
  const auto& report = merged.report;
  for (const auto& [a, b] : report.pairs) {
    log_.append("conflict", pe.xid, a.module_id, pe.datapath,
                "module=" + std::to_string(a.module_id) + "#" + std::to_string(a.index) +
                    " module=" + std::to_string(b.module_id) + "#" + std::to_string(b.index));
  }
  metrics_.conflicts_detected += report.pairs.size();
  if (!report.pairs.empty()) {
    switch (policy.kind) {
      case PolicyKind::Discard: metrics_.resolved_discard += report.pairs.size(); break;
      case PolicyKind::Ignore: metrics_.resolved_ignore += report.pairs.size(); break;
      case PolicyKind::Priority: metrics_.resolved_priority += report.pairs.size(); break;
    }
    log_.append("resolve", pe.xid, 0, pe.datapath,
                "policy=" + std::string(policy_name(policy.kind)) +
                    " conflicts=" + std::to_string(report.pairs.size()) +
                    " sets=" + std::to_string(report.conflicting_sets) +
                    " removed=" + std::to_string(report.removed));
  }
  for (const auto& w : report.warnings) {
    ++metrics_.warnings;
    log_.append("warning", pe.xid, 0, pe.datapath, w);
  }
  run.output = std::move(merged.commands);
  finish(pe, run, out);
}

void Core::compose(PendingEvent& pe, std::vector<Outbound>& out) {
  pe.composed = true;
  std::vector<TaggedCommand> composed = std::move(pe.root->output);
  log_.append("compose", pe.xid, 0, pe.datapath,
              "commands=" + std::to_string(composed.size()));
  bool held = false;
  auto releases = scheduler_.complete(pe.seq, pe.xid, std::move(composed), &held);
  if (held) {
    ++metrics_.outputs_buffered;
    log_.append("buffer", pe.xid, 0, pe.datapath, "seq=" + std::to_string(pe.seq));
    if (scheduler_.buffered() > options_.buffer_high_water) {
      ++metrics_.warnings;
      log_.append("warning", pe.xid, 0, pe.datapath,
                  "ordering buffer holds " + std::to_string(scheduler_.buffered()) + " outputs");
    }
  }
  for (auto& r : releases) {
    log_.append("release", r.xid, 0, r.datapath,
                "seq=" + std::to_string(r.seq) + " commands=" + std::to_string(r.commands.size()));
    for (auto& tc : r.commands) {
      out.push_back(Outbound{kShimEndpoint, make_sbi(r.xid, tc.module_id, to_sbi(tc.command))});
    }
  }
}

int Core::subtree_priority(const ExecNode& node) const {
  if (node.kind == ExecNode::Kind::Module) {
    const ModuleDecl* d = spec_.find(node.module);
    return d ? d->priority : 0;
  }
  int best = std::numeric_limits<int>::min();
  for (const auto& c : node.children) best = std::max(best, subtree_priority(c));
  return best;
}

std::size_t Core::subtree_order(const ExecNode& node) const {
  if (node.kind == ExecNode::Kind::Module) return spec_.declaration_index(node.module);
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (const auto& c : node.children) best = std::min(best, subtree_order(c));
  return best;
}

ModuleId Core::subtree_module(const ExecNode& node) const {
  if (node.kind == ExecNode::Kind::Module) {
    auto it = by_name_.find(node.module);
    return it == by_name_.end() ? 0 : it->second;
  }
  for (const auto& c : node.children) {
    if (ModuleId id = subtree_module(c); id != 0) return id;
  }
  return 0;
}

}  // namespace netcompose
