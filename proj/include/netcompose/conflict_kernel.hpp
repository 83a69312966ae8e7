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

// Pairwise cross-group conflict matrix over a batch of commands.
//
// compute_conflicts_serial is the reference; compute_conflicts_parallel splits
// the upper triangle across OpenMP threads and must produce the identical
// matrix. compute_conflicts picks one by batch size.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "netcompose/sbi.hpp"

namespace netcompose {

class ConflictMatrix {
 public:
  ConflictMatrix() = default;
  explicit ConflictMatrix(std::size_t n) : n_(n), cells_(n * n, 0) {}

  std::size_t size() const { return n_; }
  bool at(std::size_t i, std::size_t j) const { return cells_[i * n_ + j] != 0; }
  void mark(std::size_t i, std::size_t j) {
    cells_[i * n_ + j] = 1;
    cells_[j * n_ + i] = 1;
  }

  /// Conflicting pairs (i < j) in row-major order.
  std::vector<std::pair<std::size_t, std::size_t>> pairs() const;

  friend bool operator==(const ConflictMatrix&, const ConflictMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> cells_;
};

/// Commands in the same group never conflict with each other.
ConflictMatrix compute_conflicts_serial(std::span<const Command> commands,
                                        std::span<const std::size_t> groups,
                                        const std::optional<ConflictScope>& scope);

ConflictMatrix compute_conflicts_parallel(std::span<const Command> commands,
                                          std::span<const std::size_t> groups,
                                          const std::optional<ConflictScope>& scope);

/// Batches at least this large go to the parallel kernel.
inline constexpr std::size_t kParallelConflictThreshold = 256;

ConflictMatrix compute_conflicts(std::span<const Command> commands,
                                 std::span<const std::size_t> groups,
                                 const std::optional<ConflictScope>& scope);

}  // namespace netcompose
