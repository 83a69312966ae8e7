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

#include "netcompose/composition.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "netcompose/conflict_kernel.hpp"
#include "netcompose/text.hpp"

namespace netcompose {

namespace {

struct Token {
  std::string text;
  int line = 0;
  int column = 0;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  int line = 1;
  int column = 1;
  std::size_t i = 0;
  auto advance = [&] {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
    ++i;
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance();
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      advance();
    } else if (c == '{' || c == '}') {
      tokens.push_back({std::string(1, c), line, column});
      advance();
    } else {
      Token t{{}, line, column};
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
             text[i] != '{' && text[i] != '}' && text[i] != '#') {
        t.text += text[i];
        advance();
      }
      tokens.push_back(std::move(t));
    }
  }
  return tokens;
}

bool is_keyword(std::string_view s) {
  return s == "module" || s == "execution" || s == "sequential" || s == "parallel";
}

bool is_name(std::string_view s) {
  if (s.empty() || is_keyword(s)) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

class SpecParser {
 public:
  explicit SpecParser(std::string_view text) : tokens_(tokenize(text)) {}

  CompositionSpec parse() {
    CompositionSpec spec;
    if (at_end() || peek().text != "module") syntax("expected 'module' declaration");
    while (!at_end() && peek().text == "module") spec.modules.push_back(parse_decl(spec));
    expect("execution");
    spec.root = parse_node(spec);
    if (!at_end()) syntax("unexpected '" + peek().text + "' after execution tree");
    return spec;
  }

 private:
  bool at_end() const { return pos_ >= tokens_.size(); }
  const Token& peek() const { return tokens_[pos_]; }

  const Token& next(const char* what) {
    if (at_end()) syntax(std::string("unexpected end of input, expected ") + what);
    return tokens_[pos_++];
  }

  void expect(std::string_view word) {
    const Token& t = next(std::string(word).c_str());
    if (t.text != word) error_at(SpecError::Kind::Syntax, t, "expected '" + std::string(word) + "', got '" + t.text + "'");
  }

  [[noreturn]] void syntax(const std::string& what) {
    if (at_end()) {
      int line = tokens_.empty() ? 1 : tokens_.back().line;
      int col = tokens_.empty() ? 1 : tokens_.back().column + static_cast<int>(tokens_.back().text.size());
      throw SpecError(SpecError::Kind::Syntax, line, col, format(line, col, what));
    }
    error_at(SpecError::Kind::Syntax, peek(), what);
  }

  [[noreturn]] static void error_at(SpecError::Kind kind, const Token& t, const std::string& what) {
    throw SpecError(kind, t.line, t.column, format(t.line, t.column, what));
  }

  static std::string format(int line, int col, const std::string& what) {
    return std::to_string(line) + ":" + std::to_string(col) + ": " + what;
  }

  ModuleDecl parse_decl(const CompositionSpec& spec) {
    next("module");
    const Token& name = next("module name");
    if (!is_name(name.text)) error_at(SpecError::Kind::Syntax, name, "invalid module name '" + name.text + "'");
    if (spec.find(name.text)) {
      error_at(SpecError::Kind::Semantic, name, "module '" + name.text + "' declared twice");
    }
    ModuleDecl decl{name.text, 0, std::nullopt};
    bool seen_priority = false;
    while (!at_end()) {
      const Token& t = peek();
      if (t.text.rfind("priority=", 0) == 0 && !seen_priority) {
        ++pos_;
        seen_priority = true;
        std::string_view value = std::string_view(t.text).substr(9);
        bool negative = !value.empty() && value[0] == '-';
        auto v = parse_uint(negative ? value.substr(1) : value);
        if (!v || *v > 1'000'000) error_at(SpecError::Kind::Syntax, t, "invalid priority '" + std::string(value) + "'");
        if (negative) error_at(SpecError::Kind::Semantic, t, "priority of '" + decl.name + "' is negative");
        decl.priority = static_cast<int>(*v);
      } else if (t.text.rfind("events=", 0) == 0 && !decl.events) {
        ++pos_;
        std::set<EventKind> kinds;
        for (auto item : split(std::string_view(t.text).substr(7), ',')) {
          auto kind = event_kind_from_name(item);
          if (!kind || *kind == EventKind::StatsReply) {
            error_at(SpecError::Kind::Semantic, t, "unknown event kind '" + std::string(item) + "'");
          }
          kinds.insert(*kind);
        }
        if (kinds.empty()) error_at(SpecError::Kind::Syntax, t, "empty event list");
        decl.events = std::move(kinds);
      } else {
        break;
      }
    }
    return decl;
  }

  ExecNode parse_node(const CompositionSpec& spec) {
    const Token& t = next("execution node");
    if (t.text == "sequential") {
      return ExecNode::sequential(parse_children(spec));
    }
    if (t.text == "parallel") {
      std::optional<PolicyKind> kind;
      std::optional<ConflictScope> scope;
      while (!at_end() && peek().text != "{") {
        const Token& opt = next("parallel option");
        if (opt.text.rfind("policy=", 0) == 0 && !kind) {
          auto value = opt.text.substr(7);
          if (value == "discard") kind = PolicyKind::Discard;
          else if (value == "ignore") kind = PolicyKind::Ignore;
          else if (value == "priority") kind = PolicyKind::Priority;
          else error_at(SpecError::Kind::Syntax, opt, "unknown policy '" + value + "'");
        } else if (opt.text.rfind("fields=", 0) == 0 && !scope) {
          ConflictScope s;
          for (auto item : split(std::string_view(opt.text).substr(7), ',')) {
            if (item == "output") {
              s.output = true;
            } else if (auto f = field_from_name(item)) {
              s.fields.insert(*f);
            } else {
              error_at(SpecError::Kind::Semantic, opt, "unknown conflict field '" + std::string(item) + "'");
            }
          }
          if (!s.output && s.fields.empty()) error_at(SpecError::Kind::Semantic, opt, "empty fields= scope");
          scope = std::move(s);
        } else {
          error_at(SpecError::Kind::Syntax, opt, "unexpected '" + opt.text + "' in parallel node");
        }
      }
      if (!kind) error_at(SpecError::Kind::Semantic, t, "parallel node without policy");
      return ExecNode::parallel(Policy{*kind, scope}, parse_children(spec));
    }
    if (!is_name(t.text)) error_at(SpecError::Kind::Syntax, t, "unexpected '" + t.text + "'");
    if (!spec.find(t.text)) error_at(SpecError::Kind::Semantic, t, "module '" + t.text + "' is not declared");
    if (!used_.insert(t.text).second) {
      error_at(SpecError::Kind::Semantic, t, "module '" + t.text + "' appears more than once");
    }
    return ExecNode::leaf(t.text);
  }

  std::vector<ExecNode> parse_children(const CompositionSpec& spec) {
    expect("{");
    std::vector<ExecNode> children;
    while (true) {
      if (at_end()) syntax("missing '}'");
      if (peek().text == "}") break;
      children.push_back(parse_node(spec));
    }
    if (children.empty()) syntax("empty node list");
    ++pos_;
    return children;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::set<std::string> used_;
};

void format_node(std::ostringstream& os, const ExecNode& node) {
  switch (node.kind) {
    case ExecNode::Kind::Module: os << node.module; return;
    case ExecNode::Kind::Sequential: os << "sequential {"; break;
    case ExecNode::Kind::Parallel: {
      os << "parallel policy=" << policy_name(node.policy.kind);
      if (node.policy.scope) {
        os << " fields=";
        bool first = true;
        auto emit = [&](std::string_view s) {
          if (!first) os << ',';
          os << s;
          first = false;
        };
        if (node.policy.scope->output) emit("output");
        for (auto f : node.policy.scope->fields) emit(field_name(f));
      }
      os << " {";
      break;
    }
  }
  for (const auto& child : node.children) {
    os << ' ';
    format_node(os, child);
  }
  os << " }";
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

std::string_view policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Discard: return "discard";
    case PolicyKind::Ignore: return "ignore";
    case PolicyKind::Priority: return "priority";
  }
  return "?";
}

ExecNode ExecNode::leaf(std::string name) {
  ExecNode n;
  n.kind = Kind::Module;
  n.module = std::move(name);
  return n;
}

ExecNode ExecNode::sequential(std::vector<ExecNode> children) {
  ExecNode n;
  n.kind = Kind::Sequential;
  n.children = std::move(children);
  return n;
}

ExecNode ExecNode::parallel(Policy policy, std::vector<ExecNode> children) {
  ExecNode n;
  n.kind = Kind::Parallel;
  n.policy = std::move(policy);
  n.children = std::move(children);
  return n;
}

const ModuleDecl* CompositionSpec::find(std::string_view name) const {
  for (const auto& m : modules) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

std::size_t CompositionSpec::declaration_index(std::string_view name) const {
  for (std::size_t i = 0; i < modules.size(); ++i) {
    if (modules[i].name == name) return i;
  }
  return modules.size();
}

CompositionSpec parse_spec(std::string_view text) { return SpecParser(text).parse(); }

std::string format_spec(const CompositionSpec& spec) {
  std::ostringstream os;
  for (const auto& m : spec.modules) {
    os << "module " << m.name << " priority=" << m.priority;
    if (m.events) {
      os << " events=";
      bool first = true;
      for (auto k : *m.events) {
        if (!first) os << ',';
        os << event_kind_name(k);
        first = false;
      }
    }
    os << '\n';
  }
  os << "execution ";
  format_node(os, spec.root);
  os << '\n';
  return os.str();
}

MergeResult merge_parallel(std::span<const Contribution> contributions, const Policy& policy) {
  std::vector<const Contribution*> ordered;
  for (const auto& c : contributions) ordered.push_back(&c);
  std::stable_sort(ordered.begin(), ordered.end(), [](const Contribution* a, const Contribution* b) {
    return a->order != b->order ? a->order < b->order : a->module_id < b->module_id;
  });

  std::vector<Command> commands;
  std::vector<std::size_t> groups;
  std::vector<CommandRef> refs;
  for (std::size_t g = 0; g < ordered.size(); ++g) {
    for (std::size_t k = 0; k < ordered[g]->commands.size(); ++k) {
      commands.push_back(ordered[g]->commands[k]);
      groups.push_back(g);
      refs.push_back({ordered[g]->module_id, k});
    }
  }

  MergeResult result;
  const std::size_t n = commands.size();
  ConflictMatrix matrix = compute_conflicts(commands, groups, policy.scope);
  DisjointSets sets(n);
  for (auto [i, j] : matrix.pairs()) {
    result.report.pairs.emplace_back(refs[i], refs[j]);
    sets.unite(i, j);
  }

  std::map<std::size_t, std::vector<std::size_t>> components;
  for (std::size_t i = 0; i < n; ++i) components[sets.find(i)].push_back(i);

  std::vector<bool> keep(n, true);
  for (const auto& [root, members] : components) {
    if (members.size() < 2) continue;
    ++result.report.conflicting_sets;
    switch (policy.kind) {
      case PolicyKind::Ignore: break;
      case PolicyKind::Discard:
        for (auto i : members) keep[i] = false;
        break;
      case PolicyKind::Priority: {
        int best = std::numeric_limits<int>::min();
        for (auto i : members) best = std::max(best, ordered[groups[i]]->priority);
        std::set<std::size_t> top;
        for (auto i : members) {
          if (ordered[groups[i]]->priority == best) top.insert(groups[i]);
        }
        std::size_t winner = *std::min_element(top.begin(), top.end(), [&](std::size_t a, std::size_t b) {
          return ordered[a]->module_id < ordered[b]->module_id;
        });
        if (top.size() > 1) {
          std::ostringstream os;
          os << "priority tie at " << best << " between modules";
          for (auto g : top) os << ' ' << ordered[g]->module_id;
          os << "; keeping module " << ordered[winner]->module_id;
          result.report.warnings.push_back(os.str());
        }
        for (auto i : members) keep[i] = groups[i] == winner;
        break;
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) {
      result.commands.push_back({refs[i].module_id, commands[i]});
    } else {
      ++result.report.removed;
    }
  }
  return result;
}

DerivedInput derive_sequential_input(const Event& original,
                                     std::span<const std::vector<Command>> prior) {
  const auto* packet_in = std::get_if<PacketIn>(&original);
  if (!packet_in) return DerivedInput{original, false, true};

  PacketIn current = *packet_in;
  for (const auto& stage : prior) {
    // Applicability is judged against the packet this stage was given.
    const PacketHeaders seen = current.headers;
    for (const auto& cmd : stage) {
      const ActionList* actions = nullptr;
      if (const auto* fm = std::get_if<FlowModAdd>(&cmd)) {
        if (fm->datapath == current.datapath && match_covers(fm->rule.match, seen)) {
          actions = &fm->rule.actions;
        }
      } else if (const auto* po = std::get_if<PacketOut>(&cmd)) {
        if (po->datapath == current.datapath && po->headers == seen) actions = &po->actions;
      }
      if (!actions) continue;
      for (const auto& a : *actions) {
        if (std::holds_alternative<Drop>(a)) return DerivedInput{Event{current}, true, false};
        if (const auto* sf = std::get_if<SetField>(&a)) current.headers.set(sf->field, sf->value);
      }
    }
  }
  return DerivedInput{Event{current}, false, false};
}

}  // namespace netcompose
