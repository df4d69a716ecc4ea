// Copyright 2026-present the regimewatch authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Trade logs, strategy configuration and report serialization.
//
// Trade CSV header (fixed order, mandatory):
//   trade_id,entry_time,exit_time,side,entry_price,exit_price,quantity,transaction_costs,exit_reason
// JSON-lines logs carry one object per line with exactly these keys. Timestamps are
// ISO-8601 UTC, e.g. 2024-03-01T14:30:00Z or 2024-03-01T14:30:00.250Z.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "regimewatch/metrics.hpp"
#include "regimewatch/monitor.hpp"

namespace regimewatch::io {

using json = nlohmann::json;

inline constexpr std::string_view kConfigEnvVar = "REGIMEWATCH_CONFIG";

/// A malformed trade log row. line() is 1-based; field() names the column.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::string field, const std::string& message);

    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

/// A configuration document that fails schema validation.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

/// Parses a decimal number that must consume the whole string.
double parse_decimal(std::string_view text);
/// Shortest string that parses back to the same double.
std::string format_decimal(double value);

enum class TradeFormat { Csv, JsonLines };

/// .jsonl / .ndjson / .json are JSON lines; everything else is CSV.
TradeFormat detect_format(const std::filesystem::path& path);

std::vector<TradeRecord> parse_trades(const std::filesystem::path& path);
std::vector<TradeRecord> parse_trades(std::istream& in, TradeFormat format);
std::vector<TradeRecord> parse_trades_csv(std::istream& in);
std::vector<TradeRecord> parse_trades_jsonl(std::istream& in);

void write_trades_csv(std::ostream& out, std::span<const TradeRecord> trades);
void write_trades_jsonl(std::ostream& out, std::span<const TradeRecord> trades);

json trade_to_json(const TradeRecord& trade);
/// Strict: every key required, unknown keys rejected. Throws InvalidTrade naming the field.
TradeRecord trade_from_json(const json& j);

json config_to_json(const StrategyConfig& config);
/// Strict schema. A missing strategy_id is left empty for the caller to assign.
StrategyConfig config_from_json(const json& j);
StrategyConfig load_config(const std::filesystem::path& path);

json report_to_json(const BoundReport& report);
BoundReport report_from_json(const json& j);
json reports_to_json(std::span<const BoundReport> reports);

/// {"append": {"W": [0, 0]}, "mu": {"W": 0.45}}; both keys optional.
WhatIf whatif_from_json(const json& j);
json whatif_to_json(const WhatIf& w);

}  // namespace regimewatch::io
