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

#include "netcompose/conflict_kernel.hpp"

#include <cassert>

namespace netcompose {

std::vector<std::pair<std::size_t, std::size_t>> ConflictMatrix::pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (at(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

ConflictMatrix compute_conflicts_serial(std::span<const Command> commands,
                                        std::span<const std::size_t> groups,
                                        const std::optional<ConflictScope>& scope) {
  assert(commands.size() == groups.size());
  const std::size_t n = commands.size();
  ConflictMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (groups[i] != groups[j] && commands_conflict(commands[i], commands[j], scope)) {
        m.mark(i, j);
      }
    }
  }
  return m;
}

ConflictMatrix compute_conflicts_parallel(std::span<const Command> commands,
                                          std::span<const std::size_t> groups,
                                          const std::optional<ConflictScope>& scope) {
  assert(commands.size() == groups.size());
  const auto n = static_cast<std::ptrdiff_t>(commands.size());
  ConflictMatrix m(commands.size());
  // Each (i, j) pair with i < j is visited by exactly one iteration, so the
  // two cells it marks are never written concurrently.
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::ptrdiff_t j = i + 1; j < n; ++j) {
      if (groups[i] != groups[j] && commands_conflict(commands[i], commands[j], scope)) {
        m.mark(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      }
    }
  }
  return m;
}

ConflictMatrix compute_conflicts(std::span<const Command> commands,
                                 std::span<const std::size_t> groups,
                                 const std::optional<ConflictScope>& scope) {
  if (commands.size() >= kParallelConflictThreshold) {
    return compute_conflicts_parallel(commands, groups, scope);
  }
  return compute_conflicts_serial(commands, groups, scope);
}

}  // namespace netcompose
