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

#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "regimewatch/bounds.hpp"

namespace regimewatch {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

enum class Side { Long, Short };
enum class ExitReason { TargetHit, StopHit, RuleExit, Manual };

/// Raised when a trade violates the record invariants.
class InvalidTrade : public std::invalid_argument {
public:
    InvalidTrade(std::string field, const std::string& what)
        : std::invalid_argument(what), field_(std::move(field)) {}

    /// Name of the offending field.
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Raised when a per-trade outcome falls outside its metric's declared bounds.
class BoundednessViolation : public std::runtime_error {
public:
    BoundednessViolation(std::string trade_id, const std::string& what)
        : std::runtime_error(what), trade_id_(std::move(trade_id)) {}

    [[nodiscard]] const std::string& trade_id() const noexcept { return trade_id_; }

private:
    std::string trade_id_;
};

/// One completed round-trip trade.
struct TradeRecord {
    std::string trade_id;
    Timestamp entry_time;
    Timestamp exit_time;
    Side side = Side::Long;
    double entry_price = 0.0;
    double exit_price = 0.0;
    double quantity = 0.0;
    double transaction_costs = 0.0;
    ExitReason exit_reason = ExitReason::Manual;

    /// Throws InvalidTrade when an invariant does not hold.
    void validate() const;

    bool operator==(const TradeRecord&) const = default;
};

/// How a trade is turned into a number.
///   W: gross win indicator        P: net profit indicator
///   U: target exit indicator      D: stop exit indicator
///   M: a named rule (see MetricRule)
enum class MetricKind { W, P, U, D, M };

/// Extraction rules available to M metrics.
///   ReturnOnEquity   net PnL / (entry price * quantity)
///   LogReturn        ln(1 + return on equity), the continuously compounded return
///   UpsideThreshold  1 if return on equity >= threshold
///   LossThreshold    1 if return on equity <= -threshold
enum class MetricRule { ReturnOnEquity, LogReturn, UpsideThreshold, LossThreshold };

struct MetricSpec {
    MetricKind kind = MetricKind::W;
    /// Identifier used in reports; defaults to the kind letter.
    std::string name;
    Bounds bounds = Bounds::unit();
    std::optional<MetricRule> rule;  // set iff kind == M
    double threshold = 0.0;          // used by the threshold rules

    static MetricSpec standard(MetricKind kind);
    static MetricSpec custom(std::string name, MetricRule rule, Bounds bounds, double threshold = 0.0);

    /// W/P/U/D must use [0, 1]; M must carry a rule, and indicator rules must use [0, 1].
    void validate() const;

    bool operator==(const MetricSpec&) const = default;
};

struct OutcomeOptions {
    /// Annual continuously compounded rate charged on notional over the holding period.
    double discount_rate = 0.0;
};

/// Inclusive index range [first, last] into a trade sequence.
struct Window {
    std::size_t first = 0;
    std::size_t last = 0;

    [[nodiscard]] std::size_t size() const noexcept { return last - first + 1; }
};

struct RateSnapshot {
    MetricSpec metric;
    Window window;
    SampleCount n{1};
    double observed_mean = 0.0;
};

/// Signed PnL before costs: (exit - entry) * qty for longs, (entry - exit) * qty for shorts.
double gross_pnl(const TradeRecord& trade);
/// Gross PnL less costs and the financing charge notional * (e^(r * years) - 1).
double net_pnl(const TradeRecord& trade, const OutcomeOptions& options = {});
double return_on_equity(const TradeRecord& trade, const OutcomeOptions& options = {});

/// The value a single trade contributes to a metric. Throws BoundednessViolation
/// when the value falls outside the metric's bounds.
double trade_outcome(const TradeRecord& trade, const MetricSpec& metric, const OutcomeOptions& options = {});

/// Arithmetic mean of trade outcomes over the window, one snapshot per spec.
std::vector<RateSnapshot> compute_rates(std::span<const TradeRecord> trades, Window window,
                                        std::span<const MetricSpec> specs,
                                        const OutcomeOptions& options = {});

std::string_view to_string(Side side);
std::string_view to_string(ExitReason reason);
std::string_view to_string(MetricKind kind);
std::string_view to_string(MetricRule rule);
Side parse_side(std::string_view text);
ExitReason parse_exit_reason(std::string_view text);
MetricKind parse_metric_kind(std::string_view text);
MetricRule parse_metric_rule(std::string_view text);

}  // namespace regimewatch
