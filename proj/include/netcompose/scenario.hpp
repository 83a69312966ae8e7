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

// Scenario files, the runner, and run reports.
//
// Trace file ('#' starts a comment), times in milliseconds, non-decreasing:
//
//   at <ms> inject dp=<id> port=<n> <field>=<value> ...
//   at <ms> tick
//   at <ms> stats dp=<id> [<field>=<value> ...]
//
// Machine report format, one record per line, fields separated by a single
// space, no trailing spaces:
//
//   netcompose-report 1
//   metric <name>=<value>                                  (fixed order)
//   log seq=<n> time=<ms> kind=<k> xid=<n> module=<n> dp=<n> detail=<rest of line>
//   switch dp=<n>                                          (ascending dp)
//   flow dp=<n> priority=<n> idle=<s> hard=<s> packets=<n> installed=<ms>
//        last_hit=<ms> seq=<n> match=<match> actions=<actions>
//                                                          (one line; table order)
//   end

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "netcompose/composition.hpp"
#include "netcompose/engine.hpp"
#include "netcompose/event_log.hpp"
#include "netcompose/modules.hpp"
#include "netcompose/network.hpp"

namespace netcompose {

struct TraceDirective {
  enum class Kind { Inject, Tick, Stats };

  Kind kind = Kind::Tick;
  std::uint64_t time_ms = 0;
  DatapathId datapath = 0;
  PacketHeaders headers;  // Inject; headers.in_port is the ingress port
  Match match;            // Stats
  int line = 0;

  friend bool operator==(const TraceDirective&, const TraceDirective&) = default;
};

/// Throws ParseError on malformed lines or decreasing times.
std::vector<TraceDirective> parse_trace(std::string_view text);

struct Scenario {
  Topology topology;
  CompositionSpec composition;
  std::vector<ModuleSetup> modules;
  std::vector<TraceDirective> trace;
};

struct ScenarioPaths {
  std::filesystem::path topology;
  std::filesystem::path composition;
  std::filesystem::path modules;
  std::filesystem::path trace;
};

/// File or content error, prefixed with "<path>:<line>: ".
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Scenario load_scenario(const ScenarioPaths& paths);

/// Cross-file checks: every composed module is configured, and trace
/// directives name existing switches and ports. Throws LoadError.
void validate_scenario(const Scenario& scenario);

struct RunReport {
  std::vector<std::pair<std::string, std::uint64_t>> metrics;
  std::vector<LogEntry> log;
  std::map<DatapathId, std::vector<FlowEntry>> tables;

  std::uint64_t metric(std::string_view name) const;
  friend bool operator==(const RunReport&, const RunReport&) = default;
};

struct RunResult {
  RunReport report;
  int exit_code = 0;  // 0 clean, 2 protocol errors
};

RunResult run_scenario(const Scenario& scenario, const EngineOptions& options = {});

/// Snapshot of a running engine.
RunReport make_report(const Engine& engine);

enum class ReportFormat { Text, Machine };

/// Throws std::invalid_argument for anything but "text" and "machine".
ReportFormat parse_report_format(std::string_view name);

std::string dump_state(const RunReport& report, ReportFormat format);

/// Inverse of dump_state(_, Machine). Throws ParseError.
RunReport parse_machine_report(std::string_view text);

}  // namespace netcompose
