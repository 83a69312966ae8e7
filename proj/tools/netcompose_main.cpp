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

// netcompose run --topology F --composition F --modules F --trace F
//                [--transport inmem|socket] [--dump-tables PATH]
//                [--report PATH] [--format text|machine] [--log-level L]
//
// Exit status: 0 clean run, 1 load or usage error, 2 protocol errors.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>

#include "netcompose/scenario.hpp"

namespace {

bool write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return true;
  }
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) {
    spdlog::error("cannot write {}", path);
    return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace netcompose;

  CLI::App app{"SDN application composition engine"};
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "Run a scenario and report the result");

  ScenarioPaths paths;
  std::string transport = "inmem";
  std::string format = "text";
  std::string report_path;
  std::string tables_path;
  std::string log_level = "warn";
  run->add_option("--topology", paths.topology, "Topology file")->required();
  run->add_option("--composition", paths.composition, "Composition specification")->required();
  run->add_option("--modules", paths.modules, "Module configuration")->required();
  run->add_option("--trace", paths.trace, "Packet trace")->required();
  run->add_option("--transport", transport, "inmem or socket")
      ->check(CLI::IsMember({"inmem", "socket"}));
  run->add_option("--report", report_path, "Write the report here (default: stdout)");
  run->add_option("--dump-tables", tables_path, "Write the final flow tables here");
  run->add_option("--format", format, "text or machine");
  run->add_option("--log-level", log_level, "trace, debug, info, warn, error, off");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  spdlog::set_level(spdlog::level::from_str(log_level));
  ReportFormat report_format;
  try {
    report_format = parse_report_format(format);
  } catch (const std::invalid_argument& e) {
    spdlog::error("{}", e.what());
    return 1;
  }

  Scenario scenario;
  try {
    scenario = load_scenario(paths);
  } catch (const LoadError& e) {
    spdlog::error("{}", e.what());
    return 1;
  }

  EngineOptions options;
  options.transport = transport == "socket" ? Transport::Socket : Transport::InMemory;
  RunResult result;
  try {
    result = run_scenario(scenario, options);
  } catch (const std::exception& e) {
    spdlog::error("run aborted: {}", e.what());
    return 2;
  }
  for (const auto& e : result.report.log) {
    spdlog::debug("#{} t={} {} xid={} module={} dp={} {}", e.seq, e.time_ms, e.kind, e.xid,
                  e.module_id, e.datapath_id, e.detail);
  }

  if (!write_output(report_path, dump_state(result.report, report_format))) return 1;
  if (!tables_path.empty()) {
    RunReport tables;
    tables.tables = result.report.tables;
    if (!write_output(tables_path, dump_state(tables, report_format))) return 1;
  }
  if (result.exit_code != 0) {
    spdlog::warn("{} protocol errors, {} incomplete events", result.report.metric("protocol_errors"),
                 result.report.metric("events_incomplete"));
  }
  return result.exit_code;
}
