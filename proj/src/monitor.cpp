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

#include "regimewatch/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "regimewatch/kernels.hpp"

namespace regimewatch {

std::vector<Threshold> default_thresholds() {
    return {{0.50, SignalTier::Watch}, {0.25, SignalTier::SignificantRisk}, {0.10, SignalTier::RegimeChange}};
}

AdverseDirection default_direction(MetricKind kind) {
    switch (kind) {
        case MetricKind::W:
        case MetricKind::P:
        case MetricKind::U:
            return AdverseDirection::Shortfall;
        case MetricKind::D:
            return AdverseDirection::Excess;
        case MetricKind::M:
            break;
    }
    throw std::invalid_argument("M metrics must declare an adverse direction");
}

void StrategyConfig::validate() const {
    if (strategy_id.empty()) {
        throw std::invalid_argument("strategy_id must not be empty");
    }
    if (metrics.empty()) {
        throw std::invalid_argument("strategy " + strategy_id + ": at least one metric is required");
    }
    std::unordered_set<std::string> names;
    for (const TrackedMetric& m : metrics) {
        m.spec.validate();
        if (!names.insert(m.spec.name).second) {
            throw std::invalid_argument("metric name '" + m.spec.name + "' appears twice");
        }
        if (!std::isfinite(m.committed_mu) || !m.spec.bounds.contains(m.committed_mu)) {
            throw std::invalid_argument("metric " + m.spec.name + ": committed mu " + std::to_string(m.committed_mu) +
                                        " is outside its bounds");
        }
    }
    if (thresholds.empty()) {
        throw std::invalid_argument("at least one threshold is required");
    }
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        const Threshold& th = thresholds[i];
        if (!(th.probability > 0.0 && th.probability < 1.0)) {
            throw std::invalid_argument("threshold probabilities must lie in (0, 1)");
        }
        if (th.tier == SignalTier::Normal) {
            throw std::invalid_argument("a threshold cannot map to the Normal tier");
        }
        if (i > 0) {
            if (!(th.probability < thresholds[i - 1].probability)) {
                throw std::invalid_argument("threshold probabilities must be strictly descending");
            }
            if (!(th.tier > thresholds[i - 1].tier)) {
                throw std::invalid_argument("threshold tiers must increase in severity");
            }
        }
    }
    if (window.rolling_length && *window.rolling_length == 0) {
        throw std::invalid_argument("rolling window length must be >= 1");
    }
    if (!std::isfinite(discount_rate)) {
        throw std::invalid_argument("discount_rate must be finite");
    }
}

SignalTier assign_tier(BoundValue p, std::span<const Threshold> thresholds) {
    SignalTier tier = SignalTier::Normal;
    for (const Threshold& th : thresholds) {
        if (p.value() < th.probability && th.tier > tier) {
            tier = th.tier;
        }
    }
    return tier;
}

BoundReport make_report(const TrackedMetric& metric, std::int64_t n, double observed_mean,
                        std::span<const Threshold> thresholds, DrivingBound driving, Timestamp timestamp) {
    const Bounds& bounds = metric.spec.bounds;
    const double gap = metric.direction == AdverseDirection::Shortfall ? metric.committed_mu - observed_mean
                                                                       : observed_mean - metric.committed_mu;
    const double t = std::max(0.0, gap);
    const NormalizedPair pair = normalize(metric.committed_mu, t, bounds);
    const SampleCount count(n);
    const Tail tail = metric.direction == AdverseDirection::Excess ? Tail::upper : Tail::lower;

    const BoundValue p_exp = exp_bound(pair.t_dot, count);
    // The tight form never exceeds the exponential one; min() absorbs last-ulp rounding.
    const BoundValue p_tight(std::min(tight_bound(pair, count, tail).value(), p_exp.value()));

    BoundReport report;
    report.metric = metric.spec.name;
    report.kind = metric.spec.kind;
    report.n = n;
    report.observed_mean = observed_mean;
    report.committed_mu = metric.committed_mu;
    report.direction = metric.direction;
    report.lower = bounds.lower();
    report.upper = bounds.upper();
    report.tolerance_t = t;
    report.p_exp = p_exp;
    report.p_tight = p_tight;
    report.tier = assign_tier(driving == DrivingBound::Exponential ? p_exp : p_tight, thresholds);
    report.timestamp = timestamp;
    return report;
}

Monitor::Monitor(StrategyConfig config) : config_(std::move(config)) {
    config_.validate();
}

Monitor Monitor::replay(StrategyConfig config, std::span<const TradeRecord> trades) {
    Monitor monitor(std::move(config));
    for (const TradeRecord& trade : trades) {
        monitor.update(trade);
    }
    return monitor;
}

bool Monitor::contains(std::string_view trade_id) const {
    return ids_.contains(std::string(trade_id));
}

std::optional<Window> Monitor::current_window() const {
    if (journal_.empty()) {
        return std::nullopt;
    }
    const std::size_t size = journal_.size();
    std::size_t first = 0;
    if (config_.window.rolling_length && size > *config_.window.rolling_length) {
        first = size - *config_.window.rolling_length;
    }
    return Window{first, size - 1};
}

const std::vector<BoundReport>& Monitor::update(const TradeRecord& trade) {
    trade.validate();
    if (contains(trade.trade_id)) {
        throw DuplicateTrade(trade.trade_id);
    }
    const OutcomeOptions options = outcome_options();
    for (const TrackedMetric& m : config_.metrics) {
        (void)trade_outcome(trade, m.spec, options);
    }

    journal_.push_back(trade);
    try {
        ids_.insert(trade.trade_id);
        latest_ = evaluate();
    } catch (...) {
        journal_.pop_back();
        ids_.erase(trade.trade_id);
        throw;
    }
    return latest_;
}

std::vector<BoundReport> Monitor::evaluate() const {
    const auto window = current_window();
    if (!window) {
        throw NoCompletedTrades();
    }
    std::vector<MetricSpec> specs;
    specs.reserve(config_.metrics.size());
    for (const TrackedMetric& m : config_.metrics) {
        specs.push_back(m.spec);
    }
    const auto snapshots = compute_rates(journal_, *window, specs, outcome_options());
    const Timestamp ts = journal_[window->last].exit_time;

    std::vector<BoundReport> reports;
    reports.reserve(snapshots.size());
    for (std::size_t i = 0; i < snapshots.size(); ++i) {
        reports.push_back(make_report(config_.metrics[i], snapshots[i].n.value(), snapshots[i].observed_mean,
                                      config_.thresholds, config_.driving_bound, ts));
    }
    return reports;
}

std::vector<BoundReport> Monitor::what_if(const WhatIf& hypothetical) const {
    auto known = [&](const std::string& name) {
        return std::any_of(config_.metrics.begin(), config_.metrics.end(),
                           [&](const TrackedMetric& m) { return m.spec.name == name; });
    };
    for (const auto& [name, values] : hypothetical.appended) {
        if (!known(name)) {
            throw std::invalid_argument("what-if names unknown metric '" + name + "'");
        }
    }
    for (const auto& [name, mu] : hypothetical.alternative_mu) {
        if (!known(name)) {
            throw std::invalid_argument("what-if names unknown metric '" + name + "'");
        }
    }

    const OutcomeOptions options = outcome_options();
    const auto window = current_window();
    const Timestamp ts = window ? journal_[window->last].exit_time : Timestamp{};

    std::vector<BoundReport> reports;
    reports.reserve(config_.metrics.size());
    for (const TrackedMetric& base : config_.metrics) {
        TrackedMetric metric = base;
        if (auto it = hypothetical.alternative_mu.find(metric.spec.name); it != hypothetical.alternative_mu.end()) {
            metric.committed_mu = it->second;
            if (!std::isfinite(metric.committed_mu) || !metric.spec.bounds.contains(metric.committed_mu)) {
                throw DomainError("what-if mu for " + metric.spec.name + " is outside the metric bounds");
            }
        }

        std::vector<double> outcomes;
        if (window) {
            for (std::size_t i = window->first; i <= window->last; ++i) {
                outcomes.push_back(trade_outcome(journal_[i], metric.spec, options));
            }
        }
        if (auto it = hypothetical.appended.find(metric.spec.name); it != hypothetical.appended.end()) {
            for (double v : it->second) {
                if (!std::isfinite(v) || !metric.spec.bounds.contains(v)) {
                    throw BoundednessViolation("hypothetical", "hypothetical " + metric.spec.name + " outcome " +
                                                                   std::to_string(v) + " is outside the metric bounds");
                }
                outcomes.push_back(v);
            }
        }
        if (config_.window.rolling_length && outcomes.size() > *config_.window.rolling_length) {
            outcomes.erase(outcomes.begin(),
                           outcomes.end() - static_cast<std::ptrdiff_t>(*config_.window.rolling_length));
        }
        if (outcomes.empty()) {
            throw NoCompletedTrades();
        }

        // Same summation order as compute_rates, so an empty what-if matches evaluate().
        double sum = 0.0;
        for (double v : outcomes) {
            sum += v;
        }
        const auto n = static_cast<std::int64_t>(outcomes.size());
        const double mean = std::clamp(sum / static_cast<double>(n), metric.spec.bounds.lower(),
                                       metric.spec.bounds.upper());
        reports.push_back(make_report(metric, n, mean, config_.thresholds, config_.driving_bound, ts));
    }
    return reports;
}

SignalTier Monitor::overall_tier() const noexcept {
    SignalTier worst = SignalTier::Normal;
    for (const BoundReport& r : latest_) {
        worst = std::max(worst, r.tier);
    }
    return worst;
}

BoundCurve bound_curve(const Bounds& bounds, double mu, double t, AdverseDirection direction, std::int64_t max_n) {
    if (max_n < 1) {
        throw DomainError("curve needs max_n >= 1");
    }
    const NormalizedPair pair = normalize(mu, t, bounds);
    const Tail tail = direction == AdverseDirection::Excess ? Tail::upper : Tail::lower;

    BoundCurve curve;
    const auto count = static_cast<std::size_t>(max_n);
    curve.n.resize(count);
    curve.p_exp.resize(count);
    curve.p_tight.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        curve.n[i] = static_cast<double>(i + 1);
    }
    kernels::exp_linear(-2.0 * pair.t_dot * pair.t_dot, curve.n, curve.p_exp);
    kernels::exp_linear(tight_log_rate(pair, tail), curve.n, curve.p_tight);
    for (std::size_t i = 0; i < count; ++i) {
        curve.p_tight[i] = std::min(curve.p_tight[i], curve.p_exp[i]);
    }
    return curve;
}

std::string_view to_string(SignalTier tier) {
    switch (tier) {
        case SignalTier::Normal: return "Normal";
        case SignalTier::Watch: return "Watch";
        case SignalTier::SignificantRisk: return "SignificantRisk";
        case SignalTier::RegimeChange: return "RegimeChange";
    }
    return "Normal";
}

std::string_view to_string(AdverseDirection direction) {
    return direction == AdverseDirection::Shortfall ? "shortfall" : "excess";
}

std::string_view to_string(DrivingBound bound) {
    return bound == DrivingBound::Exponential ? "exponential" : "tight";
}

SignalTier parse_signal_tier(std::string_view text) {
    if (text == "Normal") return SignalTier::Normal;
    if (text == "Watch") return SignalTier::Watch;
    if (text == "SignificantRisk") return SignalTier::SignificantRisk;
    if (text == "RegimeChange") return SignalTier::RegimeChange;
    throw std::invalid_argument("unknown tier '" + std::string(text) + "'");
}

AdverseDirection parse_adverse_direction(std::string_view text) {
    if (text == "shortfall") return AdverseDirection::Shortfall;
    if (text == "excess") return AdverseDirection::Excess;
    throw std::invalid_argument("direction must be 'shortfall' or 'excess', got '" + std::string(text) + "'");
}

DrivingBound parse_driving_bound(std::string_view text) {
    if (text == "exponential") return DrivingBound::Exponential;
    if (text == "tight") return DrivingBound::Tight;
    throw std::invalid_argument("driving_bound must be 'exponential' or 'tight', got '" + std::string(text) + "'");
}

}  // namespace regimewatch
