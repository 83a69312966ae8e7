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
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "netcompose/parse_error.hpp"
#include "netcompose/scenario.hpp"
#include "netcompose/text.hpp"
#include "support/criteria.hpp"

namespace netcompose {
namespace {

namespace fs = std::filesystem;

fs::path scenario_dir(const char* name) { return fs::path(NETCOMPOSE_SCENARIO_DIR) / name; }

TEST(Trace, ParsesDirectives) {
  const auto t = parse_trace(
      "# comment\n"
      "at 0 inject dp=1 port=2 ip_dst=10.0.0.1 tp_dst=80\n"
      "at 10 tick\n"
      "at 10 stats dp=3 ip_dst=10.0.0.0/8\n");
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[0].kind, TraceDirective::Kind::Inject);
  EXPECT_EQ(t[0].headers.in_port, 2u);
  EXPECT_EQ(t[0].headers.tp_dst, 80u);
  EXPECT_EQ(t[0].line, 2);
  EXPECT_EQ(t[1].kind, TraceDirective::Kind::Tick);
  EXPECT_EQ(t[2].match, parse_match("ip_dst=10.0.0.0/8"));
  EXPECT_EQ(t[2].datapath, 3u);
}

class TraceErrors : public ::testing::TestWithParam<const char*> {};
TEST_P(TraceErrors, Rejected) { EXPECT_THROW(parse_trace(GetParam()), ParseError); }
INSTANTIATE_TEST_SUITE_P(Cases, TraceErrors,
                         ::testing::Values("at 10 tick\nat 5 tick\n", "at x tick\n", "at 1 tick now\n",
                                           "at 1 inject port=1\n", "at 1 inject dp=1\n", "at 1 stats\n",
                                           "at 1 jump\n", "inject dp=1 port=1\n",
                                           "at 1 inject dp=1 port=1 colour=red\n"));

TEST(Trace, EmptyRunHasNoEvents) {
  Scenario s;
  s.topology = parse_topology("switch 1 ports=2\n");
  s.composition = parse_spec("module a priority=1\nexecution a\n");
  s.modules = parse_module_config("module a type=nop\n");
  const auto r = run_scenario(s);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report.metric("events_processed"), 0u);
  EXPECT_TRUE(r.report.tables.at(1).empty());
}

TEST(Report, MachineRoundTrip) {
  for (const char* name : {"vdc", "vdc_evolved"}) {
    const auto r = run_scenario(load_scenario(testing::scenario_paths(scenario_dir(name)))).report;
    const auto text = dump_state(r, ReportFormat::Machine);
    EXPECT_EQ(parse_machine_report(text), r);
    EXPECT_EQ(dump_state(parse_machine_report(text), ReportFormat::Machine), text);
  }
}

TEST(Report, EmptyReportHeaders) {
  EXPECT_EQ(dump_state(RunReport{}, ReportFormat::Text), "netcompose run report\nmetrics:\nlog:\ntables:\n");
  EXPECT_EQ(dump_state(RunReport{}, ReportFormat::Machine), "netcompose-report 1\nend\n");
}

TEST(Report, MalformedMachineInput) {
  EXPECT_THROW(parse_machine_report("netcompose-report 2\nend\n"), ParseError);
  EXPECT_THROW(parse_machine_report("netcompose-report 1\n"), ParseError);
  EXPECT_THROW(parse_machine_report("netcompose-report 1\nmetric x\nend\n"), ParseError);
  EXPECT_THROW(parse_machine_report("netcompose-report 1\nbogus\nend\n"), ParseError);
}

TEST(Report, FormatNames) {
  EXPECT_EQ(parse_report_format("text"), ReportFormat::Text);
  EXPECT_EQ(parse_report_format("machine"), ReportFormat::Machine);
  EXPECT_THROW(parse_report_format("json"), std::invalid_argument);
}

TEST(Report, MetricsAgreeWithLog) {
  for (const char* name : {"vdc", "vdc_evolved"}) {
    const auto r = run_scenario(load_scenario(testing::scenario_paths(scenario_dir(name)))).report;
    auto count = [&](const char* kind) {
      std::uint64_t n = 0;
      for (const auto& e : r.log) n += e.kind == kind;
      return n;
    };
    EXPECT_EQ(r.metric("events_processed"), count("event"));
    EXPECT_EQ(r.metric("fences_received"), count("fence"));
    EXPECT_EQ(r.metric("conflicts_detected"), count("conflict"));
    EXPECT_EQ(r.metric("outputs_buffered_for_ordering"), count("buffer"));
    EXPECT_EQ(r.metric("warnings"), count("warning"));
    EXPECT_EQ(r.metric("packets_delivered"), count("deliver"));
  }
}

class LoadFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("netcompose_scn_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
    fs::copy(scenario_dir("vdc"), dir_, fs::copy_options::overwrite_existing | fs::copy_options::recursive);
  }
  void TearDown() override { fs::remove_all(dir_); }
  void write(const char* file, const std::string& text) { std::ofstream(dir_ / file) << text; }
  std::string load_error() {
    try {
      load_scenario(testing::scenario_paths(dir_));
    } catch (const LoadError& e) {
      return e.what();
    }
    return {};
  }
  fs::path dir_;
};

TEST_F(LoadFixture, ErrorsNameFileAndLine) {
  write("trace.txt", "at 0 tick\nat 1 bogus\n");
  const auto msg = load_error();
  EXPECT_NE(msg.find("trace.txt"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
}

TEST_F(LoadFixture, SpecErrorsCarryPosition) {
  write("composition.txt", "module fw priority=2\n\nexecution {\n");
  const auto msg = load_error();
  EXPECT_NE(msg.find("composition.txt:"), std::string::npos) << msg;
}

TEST_F(LoadFixture, MissingFile) {
  fs::remove(dir_ / "modules.txt");
  EXPECT_NE(load_error().find("cannot read"), std::string::npos);
}

TEST_F(LoadFixture, UnconfiguredModule) {
  write("modules.txt", "module fw type=firewall\n");
  EXPECT_NE(load_error().find("no configuration"), std::string::npos);
}

TEST_F(LoadFixture, TraceNamesMissingSwitchOrPort) {
  write("trace.txt", "at 0 inject dp=77 port=1\n");
  EXPECT_NE(load_error().find("unknown switch"), std::string::npos);
  write("trace.txt", "at 0 inject dp=1 port=99\n");
  EXPECT_NE(load_error().find("no port"), std::string::npos);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + NETCOMPOSE_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string cli_scenario_args(const fs::path& dir) {
  return "run --topology " + (dir / "topology.txt").string() + " --composition " +
         (dir / "composition.txt").string() + " --modules " + (dir / "modules.txt").string() +
         " --trace " + (dir / "trace.txt").string();
}

TEST(Cli, ExitCodes) {
  const auto args = cli_scenario_args(scenario_dir("vdc"));
  EXPECT_EQ(run_cli(args), 0);
  EXPECT_EQ(run_cli(args + " --transport socket --format machine"), 0);
  EXPECT_EQ(run_cli(args + " --format yaml"), 1);
  EXPECT_EQ(run_cli(args + " --transport carrier-pigeon"), 1);
  EXPECT_EQ(run_cli("run --topology /nonexistent --composition x --modules y --trace z"), 1);
  EXPECT_EQ(run_cli(""), 1);
}

TEST(Cli, ReportMatchesLibrary) {
  const auto out = fs::temp_directory_path() / ("netcompose_cli_" + std::to_string(::getpid()) + ".txt");
  ASSERT_EQ(run_cli(cli_scenario_args(scenario_dir("vdc")) + " --format machine --report " + out.string()), 0);
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  fs::remove(out);
  const auto r = run_scenario(load_scenario(testing::scenario_paths(scenario_dir("vdc")))).report;
  EXPECT_EQ(ss.str(), dump_state(r, ReportFormat::Machine));
}

}  // namespace
}  // namespace netcompose
