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

#include "netcompose/scenario.hpp"

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "netcompose/parse_error.hpp"
#include "netcompose/text.hpp"

namespace netcompose {

// ---------------------------------------------------------------------------
// Trace

std::vector<TraceDirective> parse_trace(std::string_view text) {
  std::vector<TraceDirective> out;
  std::uint64_t last = 0;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto t = split_ws(line);
    if (t.empty()) continue;
    if (t.size() < 3 || t[0] != "at") throw ParseError(line_no, "expected: at <ms> <directive> ...");
    auto time = parse_uint(t[1]);
    if (!time) throw ParseError(line_no, "bad time '" + std::string(t[1]) + "'");
    if (*time < last) {
      throw ParseError(line_no, "time " + std::to_string(*time) + " is before " + std::to_string(last));
    }
    last = *time;

    TraceDirective d;
    d.time_ms = *time;
    d.line = line_no;
    std::optional<DatapathId> dp;
    std::optional<PortNo> port;
    auto args = std::span(t).subspan(3);
    auto each_kv = [&](const std::function<void(std::string_view, std::string_view)>& f) {
      for (auto tok : args) {
        auto eq = tok.find('=');
        if (eq == std::string_view::npos || eq == 0) {
          throw ParseError(line_no, "expected key=value, got '" + std::string(tok) + "'");
        }
        auto key = tok.substr(0, eq);
        auto value = tok.substr(eq + 1);
        if (key == "dp") {
          auto v = parse_uint(value);
          if (!v || *v == 0 || dp) throw ParseError(line_no, "bad or repeated dp");
          dp = *v;
          continue;
        }
        try {
          f(key, value);
        } catch (const TextError& e) {
          throw ParseError(line_no, e.what());
        }
      }
    };

    if (t[2] == "inject") {
      d.kind = TraceDirective::Kind::Inject;
      std::set<std::string_view> seen;
      each_kv([&](std::string_view key, std::string_view value) {
        if (!seen.insert(key).second) throw ParseError(line_no, "repeated " + std::string(key));
        if (key == "port") {
          auto v = parse_uint(value);
          if (!v || *v == 0 || *v > UINT32_MAX) throw ParseError(line_no, "bad port");
          port = static_cast<PortNo>(*v);
          return;
        }
        auto f = field_from_name(key);
        if (!f || *f == HeaderField::InPort) {
          throw ParseError(line_no, "unknown header field '" + std::string(key) + "'");
        }
        auto v = parse_field_value(*f, value);
        if (!v) throw ParseError(line_no, "bad value for " + std::string(key));
        d.headers.set(*f, *v);
      });
      if (!dp || !port) throw ParseError(line_no, "inject needs dp= and port=");
      d.datapath = *dp;
      d.headers.in_port = *port;
    } else if (t[2] == "tick") {
      if (!args.empty()) throw ParseError(line_no, "tick takes no arguments");
      d.kind = TraceDirective::Kind::Tick;
    } else if (t[2] == "stats") {
      d.kind = TraceDirective::Kind::Stats;
      each_kv([&](std::string_view key, std::string_view value) { set_match_field(d.match, key, value); });
      if (!dp) throw ParseError(line_no, "stats needs dp=");
      d.datapath = *dp;
    } else {
      throw ParseError(line_no, "unknown directive '" + std::string(t[2]) + "'");
    }
    out.push_back(d);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Loading

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path.string() + ": cannot read file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename F>
auto load_lines(const std::filesystem::path& path, F parse) {
  std::string text = read_file(path);
  try {
    return parse(text);
  } catch (const ParseError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

void collect_leaves(const ExecNode& node, std::vector<std::string>& out) {
  if (node.kind == ExecNode::Kind::Module) {
    out.push_back(node.module);
    return;
  }
  for (const auto& c : node.children) collect_leaves(c, out);
}

}  // namespace

Scenario load_scenario(const ScenarioPaths& paths) {
  Scenario s;
  s.topology = load_lines(paths.topology, [](const std::string& t) { return parse_topology(t); });
  {
    std::string text = read_file(paths.composition);
    try {
      s.composition = parse_spec(text);
    } catch (const SpecError& e) {
      throw LoadError(paths.composition.string() + ":" + std::to_string(e.line()) + ":" +
                      std::to_string(e.column()) + ": " + e.what());
    }
  }
  s.modules = load_lines(paths.modules, [](const std::string& t) { return parse_module_config(t); });
  s.trace = load_lines(paths.trace, [](const std::string& t) { return parse_trace(t); });
  try {
    validate_scenario(s);
  } catch (const LoadError& e) {
    throw LoadError(std::string("scenario: ") + e.what());
  }
  return s;
}

void validate_scenario(const Scenario& s) {
  std::set<std::string> configured;
  for (const auto& m : s.modules) configured.insert(m.name);
  std::vector<std::string> leaves;
  collect_leaves(s.composition.root, leaves);
  for (const auto& name : leaves) {
    if (configured.count(name) == 0) {
      throw LoadError("composed module '" + name + "' has no configuration");
    }
  }
  for (const auto& d : s.trace) {
    if (d.kind == TraceDirective::Kind::Tick) continue;
    auto sw = s.topology.switches.find(d.datapath);
    if (sw == s.topology.switches.end()) {
      throw LoadError("trace line " + std::to_string(d.line) + ": unknown switch " +
                      std::to_string(d.datapath));
    }
    if (d.kind == TraceDirective::Kind::Inject && d.headers.in_port > sw->second) {
      throw LoadError("trace line " + std::to_string(d.line) + ": switch " +
                      std::to_string(d.datapath) + " has no port " +
                      std::to_string(d.headers.in_port));
    }
  }
}

// ---------------------------------------------------------------------------
// Running

std::uint64_t RunReport::metric(std::string_view name) const {
  for (const auto& [k, v] : metrics) {
    if (k == name) return v;
  }
  return 0;
}

RunReport make_report(const Engine& engine) {
  const auto& m = engine.core().metrics();
  RunReport r;
  r.metrics = {
      {"events_processed", m.events_processed},
      {"fences_received", m.fences_received},
      {"conflicts_detected", m.conflicts_detected},
      {"conflicts_resolved_discard", m.resolved_discard},
      {"conflicts_resolved_ignore", m.resolved_ignore},
      {"conflicts_resolved_priority", m.resolved_priority},
      {"outputs_buffered_for_ordering", m.outputs_buffered},
      {"protocol_errors", m.protocol_errors + engine.framing_errors()},
      {"warnings", m.warnings},
      {"events_incomplete", engine.core().pending_events()},
      {"packets_delivered", engine.network().deliveries().size()},
      {"packets_dropped", engine.network().drops()},
  };
  r.log = engine.log().entries();
  for (const auto& [dp, sw] : engine.network().switches()) r.tables[dp] = sw.table();
  return r;
}

RunResult run_scenario(const Scenario& scenario, const EngineOptions& options) {
  Engine engine(scenario.composition, scenario.topology, scenario.modules, options);
  const bool started = engine.start();
  if (started) {
    for (const auto& d : scenario.trace) {
      engine.advance_time(d.time_ms);
      switch (d.kind) {
        case TraceDirective::Kind::Inject: engine.inject(d.datapath, d.headers); break;
        case TraceDirective::Kind::Tick: break;
        case TraceDirective::Kind::Stats: engine.dump_stats(d.datapath, d.match); break;
      }
    }
  } else {
    engine.log().append("startup_failed", 0, 0, 0, "registration did not complete");
  }
  RunResult result;
  result.report = make_report(engine);
  const bool clean = started && result.report.metric("protocol_errors") == 0 &&
                     result.report.metric("events_incomplete") == 0;
  result.exit_code = clean ? 0 : 2;
  return result;
}

// ---------------------------------------------------------------------------
// Reports

ReportFormat parse_report_format(std::string_view name) {
  if (name == "text") return ReportFormat::Text;
  if (name == "machine") return ReportFormat::Machine;
  throw std::invalid_argument("unknown report format '" + std::string(name) + "'");
}

namespace {

std::string machine(const RunReport& r) {
  std::ostringstream os;
  os << "netcompose-report 1\n";
  for (const auto& [k, v] : r.metrics) os << "metric " << k << "=" << v << "\n";
  for (const auto& e : r.log) {
    os << "log seq=" << e.seq << " time=" << e.time_ms << " kind=" << e.kind << " xid=" << e.xid
       << " module=" << e.module_id << " dp=" << e.datapath_id << " detail=" << e.detail << "\n";
  }
  for (const auto& [dp, entries] : r.tables) {
    os << "switch dp=" << dp << "\n";
    for (const auto& f : entries) {
      os << "flow dp=" << dp << " priority=" << f.rule.priority << " idle=" << f.rule.idle_timeout
         << " hard=" << f.rule.hard_timeout << " packets=" << f.packet_count
         << " installed=" << f.install_ms << " last_hit=" << f.last_hit_ms << " seq=" << f.seq
         << " match=" << format_match(f.rule.match) << " actions=" << format_actions(f.rule.actions)
         << "\n";
    }
  }
  os << "end\n";
  return os.str();
}

std::string text(const RunReport& r) {
  std::ostringstream os;
  os << "netcompose run report\n";
  os << "metrics:\n";
  for (const auto& [k, v] : r.metrics) os << "  " << k << " " << v << "\n";
  os << "log:\n";
  for (const auto& e : r.log) {
    os << "  #" << e.seq << " t=" << e.time_ms << "ms " << e.kind << " xid=" << e.xid
       << " module=" << e.module_id << " dp=" << e.datapath_id;
    if (!e.detail.empty()) os << "  " << e.detail;
    os << "\n";
  }
  os << "tables:\n";
  for (const auto& [dp, entries] : r.tables) {
    os << "  switch " << dp << " (" << entries.size() << " entries)\n";
    for (const auto& f : entries) {
      os << "    " << format_rule(f.rule) << " packets=" << f.packet_count << "\n";
    }
  }
  return os.str();
}

class FieldReader {
 public:
  FieldReader(int line, std::string_view rest) : line_(line), rest_(rest) {}

  std::string_view word(std::string_view key) {
    auto prefix = std::string(key) + "=";
    if (rest_.substr(0, prefix.size()) != prefix) {
      throw ParseError(line_, "expected " + prefix);
    }
    rest_.remove_prefix(prefix.size());
    auto sp = rest_.find(' ');
    std::string_view v = rest_.substr(0, sp);
    rest_ = sp == std::string_view::npos ? std::string_view{} : rest_.substr(sp + 1);
    return v;
  }

  std::uint64_t number(std::string_view key, std::uint64_t max = UINT64_MAX) {
    auto w = word(key);
    auto v = parse_uint(w);
    if (!v || *v > max || (w.size() > 1 && w[0] == '0')) {
      throw ParseError(line_, "bad " + std::string(key) + " '" + std::string(w) + "'");
    }
    return *v;
  }

  /// Everything after "key=", spaces included.
  std::string_view tail(std::string_view key) {
    auto prefix = std::string(key) + "=";
    if (rest_.substr(0, prefix.size()) != prefix) throw ParseError(line_, "expected " + prefix);
    auto v = rest_.substr(prefix.size());
    rest_ = {};
    return v;
  }

  void done() {
    if (!rest_.empty()) throw ParseError(line_, "trailing text '" + std::string(rest_) + "'");
  }

 private:
  int line_;
  std::string_view rest_;
};

}  // namespace

std::string dump_state(const RunReport& report, ReportFormat format) {
  return format == ReportFormat::Machine ? machine(report) : text(report);
}

RunReport parse_machine_report(std::string_view input) {
  RunReport r;
  int line_no = 0;
  std::size_t pos = 0;
  bool header = false;
  bool ended = false;
  while (pos < input.size()) {
    auto nl = input.find('\n', pos);
    if (nl == std::string_view::npos) throw ParseError(line_no + 1, "missing final newline");
    std::string_view line = input.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (ended) throw ParseError(line_no, "text after end");
    if (!header) {
      if (line != "netcompose-report 1") throw ParseError(line_no, "not a netcompose report");
      header = true;
      continue;
    }
    auto sp = line.find(' ');
    std::string_view tag = line.substr(0, sp);
    std::string_view rest = sp == std::string_view::npos ? std::string_view{} : line.substr(sp + 1);
    try {
      if (tag == "end" && rest.empty()) {
        ended = true;
      } else if (tag == "metric") {
        auto eq = rest.find('=');
        if (eq == std::string_view::npos || eq == 0) throw ParseError(line_no, "bad metric");
        auto v = parse_uint(rest.substr(eq + 1));
        if (!v) throw ParseError(line_no, "bad metric value");
        r.metrics.emplace_back(std::string(rest.substr(0, eq)), *v);
      } else if (tag == "log") {
        FieldReader f(line_no, rest);
        LogEntry e;
        e.seq = f.number("seq");
        e.time_ms = f.number("time");
        e.kind = std::string(f.word("kind"));
        e.xid = static_cast<Xid>(f.number("xid", UINT32_MAX));
        e.module_id = static_cast<ModuleId>(f.number("module", UINT32_MAX));
        e.datapath_id = f.number("dp");
        e.detail = std::string(f.tail("detail"));
        if (e.kind.empty()) throw ParseError(line_no, "empty kind");
        r.log.push_back(std::move(e));
      } else if (tag == "switch") {
        FieldReader f(line_no, rest);
        auto dp = f.number("dp");
        f.done();
        if (!r.tables.emplace(dp, std::vector<FlowEntry>{}).second) {
          throw ParseError(line_no, "repeated switch");
        }
      } else if (tag == "flow") {
        FieldReader f(line_no, rest);
        auto dp = f.number("dp");
        auto sw = r.tables.find(dp);
        if (sw == r.tables.end()) throw ParseError(line_no, "flow before its switch line");
        FlowEntry e;
        e.rule.priority = static_cast<std::uint16_t>(f.number("priority", 0xFFFF));
        e.rule.idle_timeout = static_cast<std::uint16_t>(f.number("idle", 0xFFFF));
        e.rule.hard_timeout = static_cast<std::uint16_t>(f.number("hard", 0xFFFF));
        e.packet_count = f.number("packets");
        e.install_ms = f.number("installed");
        e.last_hit_ms = f.number("last_hit");
        e.seq = f.number("seq");
        e.rule.match = parse_match(f.word("match"));
        e.rule.actions = parse_actions(f.word("actions"));
        f.done();
        sw->second.push_back(std::move(e));
      } else {
        throw ParseError(line_no, "unknown record '" + std::string(tag) + "'");
      }
    } catch (const TextError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (!header) throw ParseError(1, "empty input");
  if (!ended) throw ParseError(line_no, "missing end line");
  return r;
}

}  // namespace netcompose
