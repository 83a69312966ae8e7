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

#include "netcompose/engine.hpp"

#include "netcompose/text.hpp"

namespace netcompose {

Engine::Engine(CompositionSpec spec, Topology topology, const std::vector<ModuleSetup>& modules,
               EngineOptions options)
    : options_(std::move(options)), rng_(options_.shuffle_seed.value_or(0)) {
  network_ = std::make_unique<Network>(std::move(topology), &log_);
  shim_ = std::make_unique<Shim>(*network_, &log_, options_.core.hello);
  core_ = std::make_unique<Core>(std::move(spec), log_, options_.core);

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::unique_ptr<AppModule>>> grouped;
  for (const auto& m : modules) {
    if (grouped.find(m.backend) == grouped.end()) order.push_back(m.backend);
    grouped[m.backend].push_back(make_module(m));
  }
  for (const auto& name : order) {
    backends_.push_back(
        std::make_unique<Backend>(name, std::move(grouped[name]), &log_, options_.backend));
  }
  for (std::size_t i = 0; i <= backends_.size(); ++i) {
    links_.push_back(Link{make_channel(options_.transport), make_channel(options_.transport)});
  }
}

Engine::~Engine() = default;

Backend* Engine::backend(const std::string& name) {
  for (auto& b : backends_) {
    if (b->name() == name) return b.get();
  }
  return nullptr;
}

bool Engine::start() {
  send_all(kShimEndpoint, true, shim_->start());
  for (std::size_t i = 0; i < backends_.size(); ++i) {
    send_all(static_cast<EndpointId>(i + 1), true, backends_[i]->start());
  }
  settle();
  bool ok = shim_->ready();
  for (const auto& b : backends_) ok = ok && b->state() == Backend::State::Ready;
  return ok;
}

void Engine::send(EndpointId endpoint, bool up, const Message& msg) {
  Link& link = links_.at(endpoint);
  (up ? link.up : link.down)->send(msg);
  if (options_.shuffle_seed) {
    ++queued_[{endpoint, up}];
  } else {
    fifo_.push_back(Token{endpoint, up});
  }
}

void Engine::send_all(EndpointId endpoint, bool up, const std::vector<Message>& msgs) {
  for (const auto& m : msgs) send(endpoint, up, m);
}

std::optional<Engine::Token> Engine::next_token() {
  if (!options_.shuffle_seed) {
    if (fifo_.empty()) return std::nullopt;
    Token t = fifo_.front();
    fifo_.pop_front();
    return t;
  }
  std::vector<std::pair<EndpointId, bool>> ready;
  for (const auto& [key, n] : queued_) {
    if (n > 0) ready.push_back(key);
  }
  if (ready.empty()) return std::nullopt;
  auto key = ready[rng_() % ready.size()];
  --queued_[key];
  return Token{key.first, key.second};
}

void Engine::deliver(const Token& t) {
  Link& link = links_.at(t.endpoint);
  Channel& ch = t.up ? *link.up : *link.down;
  std::optional<Message> msg;
  try {
    msg = ch.receive();
  } catch (const TransportError& e) {
    ++framing_errors_;
    log_.append("framing_error", 0, 0, 0,
                "endpoint=" + std::to_string(t.endpoint) + " " + e.what());
    ch.discard_input();
    return;
  }
  if (!msg) return;

  if (t.up) {
    for (const auto& o : core_->handle(t.endpoint, *msg)) send(o.to, false, o.message);
  } else if (t.endpoint == kShimEndpoint) {
    send_all(kShimEndpoint, true, shim_->handle(*msg));
  } else {
    send_all(t.endpoint, true, backends_.at(t.endpoint - 1)->handle(*msg));
  }
}

void Engine::settle() {
  while (auto t = next_token()) deliver(*t);
}

void Engine::inject(DatapathId dp, const PacketHeaders& headers) {
  send_all(kShimEndpoint, true, shim_->inject(dp, headers));
  settle();
}

void Engine::advance_time(std::uint64_t to_ms) {
  send_all(kShimEndpoint, true, shim_->advance_time(to_ms));
  settle();
}

void Engine::dump_stats(DatapathId dp, const Match& match) {
  const Switch* sw = network_->find(dp);
  if (sw == nullptr) return;
  auto reply = sw->stats(match);
  log_.append("stats_dump", 0, kNetworkModuleId, dp,
              "match=" + format_match(match) + " entries=" + std::to_string(reply.entries.size()));
  for (const auto& e : reply.entries) {
    log_.append("stats_entry", 0, kNetworkModuleId, dp,
                format_rule(e.rule) + " packets=" + std::to_string(e.packet_count));
  }
}

}  // namespace netcompose
