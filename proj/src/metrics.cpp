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

#include "regimewatch/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace regimewatch {

namespace {

constexpr double kSecondsPerYear = 365.25 * 86400.0;

double holding_years(const TradeRecord& trade) {
    const auto held = std::chrono::duration_cast<std::chrono::duration<double>>(trade.exit_time - trade.entry_time);
    return held.count() / kSecondsPerYear;
}

double indicator(bool condition) {
    return condition ? 1.0 : 0.0;
}

}  // namespace

void TradeRecord::validate() const {
    auto fail = [&](const char* field, const std::string& what) {
        throw InvalidTrade(field, "trade '" + trade_id + "': " + what);
    };
    if (trade_id.empty()) {
        throw InvalidTrade("trade_id", "trade_id must not be empty");
    }
    if (exit_time < entry_time) {
        fail("exit_time", "exit_time precedes entry_time");
    }
    if (!(entry_price > 0.0) || !std::isfinite(entry_price)) {
        fail("entry_price", "entry_price must be > 0");
    }
    if (!(exit_price > 0.0) || !std::isfinite(exit_price)) {
        fail("exit_price", "exit_price must be > 0");
    }
    if (!(quantity > 0.0) || !std::isfinite(quantity)) {
        fail("quantity", "quantity must be > 0");
    }
    if (!(transaction_costs >= 0.0) || !std::isfinite(transaction_costs)) {
        fail("transaction_costs", "transaction_costs must be >= 0");
    }
}

MetricSpec MetricSpec::standard(MetricKind kind) {
    if (kind == MetricKind::M) {
        throw std::invalid_argument("M metrics need a rule; use MetricSpec::custom");
    }
    MetricSpec spec;
    spec.kind = kind;
    spec.name = std::string(to_string(kind));
    return spec;
}

MetricSpec MetricSpec::custom(std::string name, MetricRule rule, Bounds bounds, double threshold) {
    MetricSpec spec;
    spec.kind = MetricKind::M;
    spec.name = std::move(name);
    spec.bounds = bounds;
    spec.rule = rule;
    spec.threshold = threshold;
    spec.validate();
    return spec;
}

void MetricSpec::validate() const {
    if (name.empty()) {
        throw std::invalid_argument("metric name must not be empty");
    }
    if (kind != MetricKind::M) {
        if (bounds != Bounds::unit()) {
            throw std::invalid_argument("metric " + name + ": W/P/U/D rates are bounded by [0, 1]");
        }
        if (rule) {
            throw std::invalid_argument("metric " + name + ": only M metrics take a rule");
        }
        return;
    }
    if (!rule) {
        throw std::invalid_argument("metric " + name + ": M metrics must declare a rule");
    }
    const bool indicator_rule = *rule == MetricRule::UpsideThreshold || *rule == MetricRule::LossThreshold;
    if (indicator_rule && bounds != Bounds::unit()) {
        throw std::invalid_argument("metric " + name + ": threshold rules produce rates on [0, 1]");
    }
    if (indicator_rule && !(threshold >= 0.0)) {
        throw std::invalid_argument("metric " + name + ": threshold must be >= 0");
    }
}

double gross_pnl(const TradeRecord& trade) {
    const double move = trade.side == Side::Long ? trade.exit_price - trade.entry_price
                                                 : trade.entry_price - trade.exit_price;
    return move * trade.quantity;
}

double net_pnl(const TradeRecord& trade, const OutcomeOptions& options) {
    double financing = 0.0;
    if (options.discount_rate != 0.0) {
        const double notional = trade.entry_price * trade.quantity;
        financing = notional * std::expm1(options.discount_rate * holding_years(trade));
    }
    return gross_pnl(trade) - trade.transaction_costs - financing;
}

double return_on_equity(const TradeRecord& trade, const OutcomeOptions& options) {
    return net_pnl(trade, options) / (trade.entry_price * trade.quantity);
}

double trade_outcome(const TradeRecord& trade, const MetricSpec& metric, const OutcomeOptions& options) {
    double value = 0.0;
    switch (metric.kind) {
        case MetricKind::W:
            value = indicator(gross_pnl(trade) > 0.0);
            break;
        case MetricKind::P:
            value = indicator(net_pnl(trade, options) > 0.0);
            break;
        case MetricKind::U:
            value = indicator(trade.exit_reason == ExitReason::TargetHit);
            break;
        case MetricKind::D:
            value = indicator(trade.exit_reason == ExitReason::StopHit);
            break;
        case MetricKind::M: {
            if (!metric.rule) {
                throw std::invalid_argument("metric " + metric.name + " has no rule");
            }
            const double roe = return_on_equity(trade, options);
            switch (*metric.rule) {
                case MetricRule::ReturnOnEquity:
                    value = roe;
                    break;
                case MetricRule::LogReturn:
                    value = roe > -1.0 ? std::log1p(roe) : -std::numeric_limits<double>::infinity();
                    break;
                case MetricRule::UpsideThreshold:
                    value = indicator(roe >= metric.threshold);
                    break;
                case MetricRule::LossThreshold:
                    value = indicator(roe <= -metric.threshold);
                    break;
            }
            break;
        }
    }
    if (!metric.bounds.contains(value)) {
        throw BoundednessViolation(trade.trade_id, "trade '" + trade.trade_id + "': " + metric.name + " outcome " +
                                                       std::to_string(value) + " is outside [" +
                                                       std::to_string(metric.bounds.lower()) + ", " +
                                                       std::to_string(metric.bounds.upper()) + "]");
    }
    return value;
}

std::vector<RateSnapshot> compute_rates(std::span<const TradeRecord> trades, Window window,
                                        std::span<const MetricSpec> specs, const OutcomeOptions& options) {
    if (trades.empty() || window.first > window.last || window.last >= trades.size()) {
        throw std::out_of_range("window [" + std::to_string(window.first) + ", " + std::to_string(window.last) +
                                "] is empty or outside a sequence of " + std::to_string(trades.size()) + " trades");
    }
    std::vector<RateSnapshot> out;
    out.reserve(specs.size());
    const auto n = static_cast<std::int64_t>(window.size());
    for (const MetricSpec& spec : specs) {
        double sum = 0.0;
        for (std::size_t i = window.first; i <= window.last; ++i) {
            sum += trade_outcome(trades[i], spec, options);
        }
        // Rounding in the sum may not carry the mean outside the bounds.
        const double mean = std::clamp(sum / static_cast<double>(n), spec.bounds.lower(), spec.bounds.upper());
        out.push_back({spec, window, SampleCount(n), mean});
    }
    return out;
}

std::string_view to_string(Side side) {
    return side == Side::Long ? "long" : "short";
}

std::string_view to_string(ExitReason reason) {
    switch (reason) {
        case ExitReason::TargetHit: return "target_hit";
        case ExitReason::StopHit: return "stop_hit";
        case ExitReason::RuleExit: return "rule_exit";
        case ExitReason::Manual: return "manual";
    }
    return "manual";
}

std::string_view to_string(MetricKind kind) {
    switch (kind) {
        case MetricKind::W: return "W";
        case MetricKind::P: return "P";
        case MetricKind::U: return "U";
        case MetricKind::D: return "D";
        case MetricKind::M: return "M";
    }
    return "M";
}

std::string_view to_string(MetricRule rule) {
    switch (rule) {
        case MetricRule::ReturnOnEquity: return "return_on_equity";
        case MetricRule::LogReturn: return "log_return";
        case MetricRule::UpsideThreshold: return "upside_threshold";
        case MetricRule::LossThreshold: return "loss_threshold";
    }
    return "return_on_equity";
}

Side parse_side(std::string_view text) {
    if (text == "long") return Side::Long;
    if (text == "short") return Side::Short;
    throw std::invalid_argument("side must be 'long' or 'short', got '" + std::string(text) + "'");
}

ExitReason parse_exit_reason(std::string_view text) {
    if (text == "target_hit") return ExitReason::TargetHit;
    if (text == "stop_hit") return ExitReason::StopHit;
    if (text == "rule_exit") return ExitReason::RuleExit;
    if (text == "manual") return ExitReason::Manual;
    throw std::invalid_argument("exit_reason must be one of target_hit, stop_hit, rule_exit, manual; got '" +
                                std::string(text) + "'");
}

MetricKind parse_metric_kind(std::string_view text) {
    if (text == "W") return MetricKind::W;
    if (text == "P") return MetricKind::P;
    if (text == "U") return MetricKind::U;
    if (text == "D") return MetricKind::D;
    if (text == "M") return MetricKind::M;
    throw std::invalid_argument("metric kind must be one of W, P, U, D, M; got '" + std::string(text) + "'");
}

MetricRule parse_metric_rule(std::string_view text) {
    if (text == "return_on_equity") return MetricRule::ReturnOnEquity;
    if (text == "log_return") return MetricRule::LogReturn;
    if (text == "upside_threshold") return MetricRule::UpsideThreshold;
    if (text == "loss_threshold") return MetricRule::LossThreshold;
    throw std::invalid_argument("unknown metric rule '" + std::string(text) + "'");
}

}  // namespace regimewatch
