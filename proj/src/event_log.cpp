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

#include "netcompose/event_log.hpp"

#include <algorithm>

namespace netcompose {

const LogEntry& EventLog::append(std::string_view kind, Xid xid, ModuleId module_id,
                                 DatapathId datapath_id, std::string detail) {
  // Details end up on a single report line.
  std::replace(detail.begin(), detail.end(), '\n', ' ');
  entries_.push_back(LogEntry{entries_.size() + 1, now_ms_, std::string(kind), xid, module_id,
                              datapath_id, std::move(detail)});
  if (sink_) sink_(entries_.back());
  return entries_.back();
}

std::size_t EventLog::count(std::string_view kind) const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [&](const LogEntry& e) { return e.kind == kind; }));
}

}  // namespace netcompose
