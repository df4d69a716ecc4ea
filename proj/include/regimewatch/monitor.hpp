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

// Sequential monitor for one strategy. The trader commits an expected value mu for
// each bounded metric; after every completed trade the monitor recomputes the
// largest probability that the observed adverse gap between mu and the running mean
// could arise while mu still holds, and maps it to a signal tier.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "regimewatch/bounds.hpp"
#include "regimewatch/metrics.hpp"

namespace regimewatch {

enum class AdverseDirection { Shortfall, Excess };

/// Ordered by severity.
enum class SignalTier { Normal = 0, Watch = 1, SignificantRisk = 2, RegimeChange = 3 };

enum class DrivingBound { Exponential, Tight };

struct Threshold {
    double probability;
    SignalTier tier;

    bool operator==(const Threshold&) const = default;
};

/// 50% Watch, 25% SignificantRisk, 10% RegimeChange.
std::vector<Threshold> default_thresholds();

struct WindowPolicy {
    /// Empty means every trade since the strategy started.
    std::optional<std::size_t> rolling_length;

    static WindowPolicy since_inception() { return {}; }
    static WindowPolicy rolling(std::size_t length) { return {length}; }

    bool operator==(const WindowPolicy&) const = default;
};

struct TrackedMetric {
    MetricSpec spec;
    double committed_mu = 0.0;
    AdverseDirection direction = AdverseDirection::Shortfall;

    bool operator==(const TrackedMetric&) const = default;
};

/// Shortfall for W, P and U; excess for D. M has no default and throws.
AdverseDirection default_direction(MetricKind kind);

struct StrategyConfig {
    std::string strategy_id;
    std::vector<TrackedMetric> metrics;
    std::vector<Threshold> thresholds = default_thresholds();
    WindowPolicy window;
    DrivingBound driving_bound = DrivingBound::Exponential;
    double discount_rate = 0.0;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    bool operator==(const StrategyConfig&) const = default;
};

struct BoundReport {
    std::string metric;
    MetricKind kind = MetricKind::W;
    std::int64_t n = 0;
    double observed_mean = 0.0;
    double committed_mu = 0.0;
    AdverseDirection direction = AdverseDirection::Shortfall;
    double lower = 0.0;
    double upper = 1.0;
    /// Adverse gap in metric units; 0 when performance is at or better than mu.
    double tolerance_t = 0.0;
    BoundValue p_exp{1.0};
    BoundValue p_tight{1.0};
    SignalTier tier = SignalTier::Normal;
    Timestamp timestamp{};

    bool operator==(const BoundReport&) const = default;
};

/// Raised when a report is requested without any observations.
class NoCompletedTrades : public std::logic_error {
public:
    NoCompletedTrades() : std::logic_error("no completed trades") {}
};

/// Raised when a trade id is already in the journal.
class DuplicateTrade : public std::invalid_argument {
public:
    explicit DuplicateTrade(const std::string& id) : std::invalid_argument("duplicate trade_id '" + id + "'") {}
};

/// Hypothetical changes applied to a scratch copy of the monitor.
struct WhatIf {
    /// Outcomes appended after the journal, per metric name.
    std::map<std::string, std::vector<double>> appended;
    /// Replacement committed means, per metric name.
    std::map<std::string, double> alternative_mu;

    [[nodiscard]] bool empty() const noexcept { return appended.empty() && alternative_mu.empty(); }
};

/// Most severe tier whose threshold is strictly above p; Normal otherwise.
SignalTier assign_tier(BoundValue p, std::span<const Threshold> thresholds);

/// Bound report for one metric given the sample size and observed mean.
BoundReport make_report(const TrackedMetric& metric, std::int64_t n, double observed_mean,
                        std::span<const Threshold> thresholds, DrivingBound driving, Timestamp timestamp);

class Monitor {
public:
    explicit Monitor(StrategyConfig config);

    /// Rebuilds a monitor by folding every trade through update().
    static Monitor replay(StrategyConfig config, std::span<const TradeRecord> trades);

    /// Appends a trade and refreshes every report. On any exception the monitor is unchanged.
    const std::vector<BoundReport>& update(const TradeRecord& trade);

    /// Recomputes every report from the journal. Throws NoCompletedTrades on an empty window.
    [[nodiscard]] std::vector<BoundReport> evaluate() const;

    /// Reports for a hypothetical continuation; never modifies the monitor.
    [[nodiscard]] std::vector<BoundReport> what_if(const WhatIf& hypothetical) const;

    /// Reports cached by the last update; empty before the first trade.
    [[nodiscard]] const std::vector<BoundReport>& latest() const noexcept { return latest_; }
    [[nodiscard]] const StrategyConfig& config() const noexcept { return config_; }
    [[nodiscard]] const std::vector<TradeRecord>& journal() const noexcept { return journal_; }
    [[nodiscard]] bool contains(std::string_view trade_id) const;

    /// Inclusive window the policy selects over the current journal.
    [[nodiscard]] std::optional<Window> current_window() const;

    /// Most severe tier across the latest reports.
    [[nodiscard]] SignalTier overall_tier() const noexcept;

private:
    [[nodiscard]] OutcomeOptions outcome_options() const { return {config_.discount_rate}; }

    StrategyConfig config_;
    std::vector<TradeRecord> journal_;
    std::unordered_set<std::string> ids_;
    std::vector<BoundReport> latest_;
};

/// Points of p_exp and p_tight against sample size at fixed (mu, t).
struct BoundCurve {
    std::vector<double> n;
    std::vector<double> p_exp;
    std::vector<double> p_tight;
};

/// Curve for n = 1..max_n for a metric with mean mu, adverse tolerance t and direction.
BoundCurve bound_curve(const Bounds& bounds, double mu, double t, AdverseDirection direction, std::int64_t max_n);

std::string_view to_string(SignalTier tier);
std::string_view to_string(AdverseDirection direction);
std::string_view to_string(DrivingBound bound);
SignalTier parse_signal_tier(std::string_view text);
AdverseDirection parse_adverse_direction(std::string_view text);
DrivingBound parse_driving_bound(std::string_view text);

}  // namespace regimewatch
