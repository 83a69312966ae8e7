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

#include "netcompose/backend.hpp"

#include "netcompose/overloaded.hpp"

namespace netcompose {

Backend::Backend(std::string name, std::vector<std::unique_ptr<AppModule>> modules, EventLog* log,
                 BackendOptions options)
    : name_(std::move(name)), modules_(std::move(modules)), log_(log), options_(std::move(options)) {}

std::optional<ModuleId> Backend::module_id(const std::string& module) const {
  auto it = ids_.find(module);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

AppModule* Backend::module(ModuleId id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : it->second;
}

void Backend::note(std::string_view kind, Xid xid, ModuleId id, DatapathId dp, std::string detail) {
  if (log_ != nullptr) log_->append(kind, xid, id, dp, "backend=" + name_ + " " + detail);
}

void Backend::fail(std::string why) {
  state_ = State::Failed;
  failure_ = std::move(why);
  note("backend_failed", 0, 0, 0, failure_);
}

std::vector<Message> Backend::start() {
  state_ = State::HelloSent;
  return {make_message(0, 0, 0, options_.hello)};
}

std::vector<Message> Backend::handle(const Message& msg) {
  return std::visit(
      Overloaded{
          [&](const HelloBody&) { return on_hello(msg); },
          [&](const ModuleAcknowledge&) { return on_ack(msg); },
          [&](const ErrorBody& e) -> std::vector<Message> {
            note("backend_error", msg.header.xid, msg.header.module_id, msg.header.datapath_id,
                 "code=" + std::to_string(e.code) + " " + e.text);
            if (state_ == State::Registering || state_ == State::HelloSent) {
              fail("registration aborted: " + e.text);
            }
            return {};
          },
          [&](const SbiMessage&) { return on_sbi(msg); },
          [&](const auto&) -> std::vector<Message> {
            return {make_error(msg.header.xid, msg.header.module_id, ErrorCode::UnexpectedMessage,
                               "unexpected message type at backend")};
          },
      },
      msg.payload);
}

std::vector<Message> Backend::on_hello(const Message& msg) {
  if (state_ != State::HelloSent) {
    return {make_error(msg.header.xid, 0, ErrorCode::UnexpectedMessage, "unexpected HELLO")};
  }
  if (negotiate_hello(options_.hello, std::get<HelloBody>(msg.payload)).empty()) {
    fail("no protocol in common with the core");
    return {};
  }
  state_ = State::Registering;
  std::vector<Message> out;
  Xid xid = 1;
  for (const auto& m : modules_) {
    out.push_back(make_message(xid++, 0, 0, ModuleAnnouncement{m->name()}));
  }
  if (modules_.empty()) state_ = State::Ready;
  return out;
}

std::vector<Message> Backend::on_ack(const Message& msg) {
  const auto& name = std::get<ModuleAcknowledge>(msg.payload).name;
  if (state_ != State::Registering) {
    return {make_error(msg.header.xid, msg.header.module_id, ErrorCode::UnexpectedMessage,
                       "unexpected MODULE_ACKNOWLEDGE")};
  }
  AppModule* target = nullptr;
  for (const auto& m : modules_) {
    if (m->name() == name) target = m.get();
  }
  if (target == nullptr || ids_.count(name) != 0 || msg.header.module_id == 0 ||
      by_id_.count(msg.header.module_id) != 0) {
    return {make_error(msg.header.xid, msg.header.module_id, ErrorCode::UnknownModule,
                       "acknowledgement for '" + name + "' does not match an announcement")};
  }
  ids_[name] = msg.header.module_id;
  by_id_[msg.header.module_id] = target;
  if (++acked_ == modules_.size()) state_ = State::Ready;
  return {};
}

std::vector<Message> Backend::on_sbi(const Message& msg) {
  const auto& h = msg.header;
  if (state_ != State::Ready) {
    return {make_error(h.xid, h.module_id, ErrorCode::UnexpectedMessage, "backend not ready")};
  }
  AppModule* m = module(h.module_id);
  if (m == nullptr) {
    return {make_error(h.xid, h.module_id, ErrorCode::UnknownModule,
                       "module id " + std::to_string(h.module_id) + " is not hosted here")};
  }
  const auto& body = std::get<SbiMessage>(msg.payload);
  auto ev = as_event(body);
  if (!ev) {
    return {make_error(h.xid, h.module_id, ErrorCode::UnexpectedMessage,
                       "commands are not accepted by a backend")};
  }
  if (const auto* reply = std::get_if<StatsReply>(&*ev)) {
    m->on_stats_reply(*reply);
    return {};
  }
  return deliver_event(h.xid, h.module_id, *ev);
}

std::vector<Message> Backend::deliver_event(Xid xid, ModuleId id, const Event& ev) {
  std::vector<Message> out;
  StepBudget budget(options_.step_budget);
  try {
    for (const auto& cmd : module(id)->handle(ev, budget)) {
      out.push_back(make_sbi(xid, id, to_sbi(cmd)));
    }
  } catch (const BudgetExceeded& e) {
    out.clear();
    note("budget_exceeded", xid, id, datapath_of(ev), e.what());
    out.push_back(make_error(xid, id, ErrorCode::BudgetExceeded, e.what()));
  }
  out.push_back(make_fence(xid, id));
  return out;
}

}  // namespace netcompose
