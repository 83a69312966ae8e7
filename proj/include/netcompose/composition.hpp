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

// Composition specifications and the pure composition operators: the
// parallel merge under a conflict policy and the sequential input rewrite.
//
// Specification grammar ('#' starts a comment):
//
//   spec        := module_decl+ "execution" node
//   module_decl := "module" NAME ["priority=" INT] ["events=" KIND ("," KIND)*]
//   node        := NAME
//                | "sequential" "{" node+ "}"
//                | "parallel" "policy=" ("discard"|"ignore"|"priority")
//                             ["fields=" FIELD ("," FIELD)*] "{" node+ "}"
//
// KIND is packet_in, port_status or flow_removed. FIELD is "output" or a
// header field name.

#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "netcompose/sbi.hpp"

namespace netcompose {

enum class PolicyKind { Discard, Ignore, Priority };

std::string_view policy_name(PolicyKind kind);

struct Policy {
  PolicyKind kind = PolicyKind::Ignore;
  std::optional<ConflictScope> scope;
  friend bool operator==(const Policy&, const Policy&) = default;
};

struct ModuleDecl {
  std::string name;
  int priority = 0;
  std::optional<std::set<EventKind>> events;  // nullopt = all kinds

  bool accepts(EventKind kind) const { return !events || events->count(kind) != 0; }
  friend bool operator==(const ModuleDecl&, const ModuleDecl&) = default;
};

struct ExecNode {
  enum class Kind { Module, Sequential, Parallel };

  Kind kind = Kind::Module;
  std::string module;             // Kind::Module
  std::vector<ExecNode> children;  // Sequential / Parallel
  Policy policy;                  // Parallel

  static ExecNode leaf(std::string name);
  static ExecNode sequential(std::vector<ExecNode> children);
  static ExecNode parallel(Policy policy, std::vector<ExecNode> children);

  friend bool operator==(const ExecNode&, const ExecNode&) = default;
};

struct CompositionSpec {
  std::vector<ModuleDecl> modules;
  ExecNode root;

  const ModuleDecl* find(std::string_view name) const;
  /// Position in the declaration list; modules.size() when undeclared.
  std::size_t declaration_index(std::string_view name) const;

  friend bool operator==(const CompositionSpec&, const CompositionSpec&) = default;
};

class SpecError : public std::runtime_error {
 public:
  enum class Kind { Syntax, Semantic };

  SpecError(Kind kind, int line, int column, const std::string& what)
      : std::runtime_error(what), kind_(kind), line_(line), column_(column) {}

  Kind kind() const { return kind_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  Kind kind_;
  int line_;
  int column_;
};

/// Throws SpecError on syntax errors (with position) and on semantic errors:
/// duplicate declarations, undeclared or repeated leaves, parallel nodes
/// without a policy, negative priorities.
CompositionSpec parse_spec(std::string_view text);

/// Re-renders a spec in the grammar above; parse_spec(format_spec(s)) == s.
std::string format_spec(const CompositionSpec& spec);

// ---------------------------------------------------------------------------
// Parallel merge

/// One child's output in a parallel node.
struct Contribution {
  ModuleId module_id = 0;
  int priority = 0;
  std::size_t order = 0;  // declaration order, used for output ordering
  std::vector<Command> commands;
};

struct TaggedCommand {
  ModuleId module_id = 0;
  Command command;
  friend bool operator==(const TaggedCommand&, const TaggedCommand&) = default;
};

struct CommandRef {
  ModuleId module_id = 0;
  std::size_t index = 0;  // position within that module's command list
  friend auto operator<=>(const CommandRef&, const CommandRef&) = default;
};

struct ConflictReport {
  std::vector<std::pair<CommandRef, CommandRef>> pairs;
  std::size_t conflicting_sets = 0;
  std::size_t removed = 0;
  std::vector<std::string> warnings;  // priority ties
};

struct MergeResult {
  std::vector<TaggedCommand> commands;
  ConflictReport report;
};

/// Pairwise cross-module conflict detection followed by the policy:
///   Ignore   keeps everything and only reports,
///   Discard  removes every command that takes part in a conflict,
///   Priority keeps, per connected conflicting set, only the commands of the
///            highest-priority module (ties go to the lowest module id).
/// Output is ordered by Contribution::order, preserving each module's order.
MergeResult merge_parallel(std::span<const Contribution> contributions, const Policy& policy);

// ---------------------------------------------------------------------------
// Sequential input

struct DerivedInput {
  Event event;
  bool short_circuit = false;  // a prior result drops the packet
  bool passthrough = false;    // non-PacketIn forwarded unmodified
};

/// Input for the next module of a sequential chain. `prior` holds the results
/// of the earlier modules in chain order. SetField effects of prior rules
/// covering the packet, and of prior packet-outs for the same packet, are
/// applied in order; a Drop in any of them short-circuits the chain.
DerivedInput derive_sequential_input(const Event& original,
                                     std::span<const std::vector<Command>> prior);

}  // namespace netcompose
