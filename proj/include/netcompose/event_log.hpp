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

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "netcompose/types.hpp"

namespace netcompose {

struct LogEntry {
  std::uint64_t seq = 0;
  std::uint64_t time_ms = 0;
  std::string kind;
  Xid xid = 0;
  ModuleId module_id = 0;
  DatapathId datapath_id = 0;
  std::string detail;

  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

/// Ordered record of everything the engine does. Sequence numbers start at 1
/// and increase by one per entry; time is the simulated clock.
class EventLog {
 public:
  using Sink = std::function<void(const LogEntry&)>;

  void set_time(std::uint64_t ms) { now_ms_ = ms; }
  std::uint64_t time() const { return now_ms_; }

  const LogEntry& append(std::string_view kind, Xid xid, ModuleId module_id,
                         DatapathId datapath_id, std::string detail = {});

  const std::vector<LogEntry>& entries() const { return entries_; }
  std::size_t count(std::string_view kind) const;

  /// Called for every appended entry (diagnostic mirroring).
  void set_sink(Sink sink) { sink_ = std::move(sink); }

 private:
  std::vector<LogEntry> entries_;
  std::uint64_t now_ms_ = 0;
  Sink sink_;
};

}  // namespace netcompose
