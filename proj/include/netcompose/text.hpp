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

// Canonical text forms of SBI values shared by the config, trace and report
// formats. Every format_* output is accepted by the matching parse_*.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "netcompose/sbi.hpp"

namespace netcompose {

class TextError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Value text of a header field ("10.0.0.1", "02:00:00:00:00:01", "80").
std::string format_field_value(HeaderField f, std::uint64_t value);
std::optional<std::uint64_t> parse_field_value(HeaderField f, std::string_view text);

/// "any" for the wildcard match, otherwise "field=value" joined by commas in
/// tag order.
std::string format_match(const Match& m);
/// Parses the comma-joined form produced by format_match.
Match parse_match(std::string_view text);
/// Applies one "field=value" constraint; throws TextError on bad input.
void set_match_field(Match& m, std::string_view key, std::string_view value);

/// "none" for an empty list, otherwise e.g. "set:eth_dst=02:00:00:00:00:02,output:3".
std::string format_actions(const ActionList& actions);
ActionList parse_actions(std::string_view text);

std::string format_headers(const PacketHeaders& h);
PacketHeaders parse_headers(std::string_view text);

std::string format_rule(const FlowRule& r);
std::string format_command(const Command& cmd);
std::string format_event(const Event& ev);

/// Splits on `sep`, dropping empty pieces.
std::vector<std::string_view> split(std::string_view text, char sep);
/// Splits on ASCII whitespace.
std::vector<std::string_view> split_ws(std::string_view text);
std::string_view trim(std::string_view text);

}  // namespace netcompose
