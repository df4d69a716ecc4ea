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

#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "regimewatch/monitor.hpp"
#include "trade_gen.hpp"

using namespace regimewatch;
using testgen::make_trade;

namespace {

TrackedMetric tracked(MetricKind kind, double mu) {
    return {MetricSpec::standard(kind), mu, default_direction(kind)};
}

StrategyConfig single(MetricKind kind, double mu) {
    StrategyConfig c;
    c.strategy_id = "s";
    c.metrics = {tracked(kind, mu)};
    return c;
}

// wins[i] decides the sign of the i-th trade's gross PnL; stops[i] its exit reason.
std::vector<TradeRecord> sequence(const std::vector<bool>& wins, const std::vector<bool>& stops = {}) {
    std::vector<TradeRecord> out;
    for (std::size_t i = 0; i < wins.size(); ++i) {
        const bool stop = i < stops.size() && stops[i];
        out.push_back(make_trade("T" + std::to_string(i + 1), Side::Long, 100, wins[i] ? 102 : 99, 1, 0.1,
                                 stop ? ExitReason::StopHit : ExitReason::TargetHit, static_cast<int>(i)));
    }
    return out;
}

std::vector<bool> five_of_twelve() {
    return {true, false, false, true, false, true, false, false, true, false, true, false};
}

}  // namespace

TEST_CASE("tier assignment uses strict less-than") {
    const auto th = default_thresholds();
    CHECK(assign_tier(BoundValue(0.55), th) == SignalTier::Normal);
    CHECK(assign_tier(BoundValue(0.3829), th) == SignalTier::Watch);
    CHECK(assign_tier(BoundValue(0.08), th) == SignalTier::RegimeChange);
    CHECK(assign_tier(BoundValue(0.50), th) == SignalTier::Normal);
    CHECK(assign_tier(BoundValue(0.25), th) == SignalTier::Watch);
    CHECK(assign_tier(BoundValue(0.10), th) == SignalTier::SignificantRisk);
    CHECK(assign_tier(BoundValue(0.0), th) == SignalTier::RegimeChange);
    CHECK(assign_tier(BoundValue(1.0), th) == SignalTier::Normal);
}

TEST_CASE("config validation") {
    StrategyConfig c = single(MetricKind::W, 0.6);
    CHECK_NOTHROW(c.validate());

    StrategyConfig bad = c;
    bad.strategy_id.clear();
    CHECK_THROWS(bad.validate());
    bad = c;
    bad.metrics.clear();
    CHECK_THROWS(bad.validate());
    bad = c;
    bad.metrics[0].committed_mu = 1.2;
    CHECK_THROWS(bad.validate());
    bad = c;
    bad.metrics.push_back(c.metrics[0]);
    CHECK_THROWS(bad.validate());
    bad = c;
    bad.thresholds = {{0.25, SignalTier::Watch}, {0.5, SignalTier::SignificantRisk}};
    CHECK_THROWS(bad.validate());
    bad = c;
    bad.thresholds = {{0.5, SignalTier::SignificantRisk}, {0.25, SignalTier::Watch}};
    CHECK_THROWS(bad.validate());
    bad = c;
    bad.thresholds = {{1.0, SignalTier::Watch}};
    CHECK_THROWS(bad.validate());
    bad = c;
    bad.thresholds = {{0.5, SignalTier::Normal}};
    CHECK_THROWS(bad.validate());
    bad = c;
    bad.window = WindowPolicy::rolling(0);
    CHECK_THROWS(bad.validate());

    CHECK(default_direction(MetricKind::W) == AdverseDirection::Shortfall);
    CHECK(default_direction(MetricKind::D) == AdverseDirection::Excess);
    CHECK_THROWS(default_direction(MetricKind::M));
}

TEST_CASE("five wins in twelve trades end to end") {
    Monitor m(single(MetricKind::W, 0.6));
    CHECK(m.latest().empty());
    CHECK_THROWS_AS((void)m.evaluate(), NoCompletedTrades);
    for (const auto& t : sequence(five_of_twelve())) {
        m.update(t);
    }
    const BoundReport& r = m.latest().at(0);
    CHECK(r.n == 12);
    CHECK(r.observed_mean == doctest::Approx(5.0 / 12.0).epsilon(1e-15));
    CHECK(r.tolerance_t == doctest::Approx(0.18333333333333335).epsilon(1e-14));
    CHECK(r.p_exp.value() == doctest::Approx(0.44634340062571279).epsilon(1e-12));
    CHECK(r.p_tight.value() <= r.p_exp.value());
    CHECK(r.tier == SignalTier::Watch);
    CHECK(m.overall_tier() == SignalTier::Watch);
    CHECK(r.timestamp == m.journal().back().exit_time);
    CHECK(m.evaluate() == m.latest());
    CHECK(m.evaluate() == m.evaluate());
}

TEST_CASE("favorable performance is Normal") {
    std::vector<bool> wins(12, false);
    for (int i = 0; i < 8; ++i) wins[static_cast<std::size_t>(i)] = true;
    const auto m = Monitor::replay(single(MetricKind::W, 0.6), sequence(wins));
    const BoundReport& r = m.latest().at(0);
    CHECK(r.tolerance_t == 0.0);
    CHECK(r.p_exp.value() == 1.0);
    CHECK(r.p_tight.value() == 1.0);
    CHECK(r.tier == SignalTier::Normal);

    const auto one = Monitor::replay(single(MetricKind::W, 0.6), sequence({true}));
    CHECK(one.latest().at(0).observed_mean == 1.0);
    CHECK(one.latest().at(0).tier == SignalTier::Normal);
}

TEST_CASE("stop-loss rate uses the excess direction") {
    std::vector<bool> stops(20, false);
    for (int i : {1, 4, 7, 11, 15, 18}) stops[static_cast<std::size_t>(i)] = true;
    const auto m = Monitor::replay(single(MetricKind::D, 0.1), sequence(std::vector<bool>(20, true), stops));
    const BoundReport& r = m.latest().at(0);
    CHECK(r.direction == AdverseDirection::Excess);
    CHECK(r.observed_mean == doctest::Approx(0.3));
    CHECK(r.tolerance_t == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(r.p_exp.value() == doctest::Approx(0.20189651799465538).epsilon(1e-12));
    CHECK(r.tier == SignalTier::SignificantRisk);
}

TEST_CASE("what-if scenarios") {
    const auto m = Monitor::replay(single(MetricKind::W, 0.6), sequence(five_of_twelve()));
    const auto before = m.latest();

    WhatIf losses;
    losses.appended["W"] = {0.0, 0.0, 0.0};
    const auto r1 = m.what_if(losses).at(0);
    CHECK(r1.n == 15);
    CHECK(r1.observed_mean == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(r1.tolerance_t == doctest::Approx(0.26666666666666666).epsilon(1e-14));
    CHECK(r1.p_exp.value() == doctest::Approx(0.11844183).epsilon(1e-7));
    CHECK(r1.tier == SignalTier::SignificantRisk);

    WhatIf alt;
    alt.alternative_mu["W"] = 0.45;
    const auto r2 = m.what_if(alt).at(0);
    CHECK(r2.tolerance_t == doctest::Approx(0.033333333333333).epsilon(1e-10));
    CHECK(r2.p_exp.value() == doctest::Approx(0.97368575).epsilon(1e-7));
    CHECK(r2.tier == SignalTier::Normal);

    CHECK(m.what_if(WhatIf{}) == m.evaluate());
    CHECK(m.latest() == before);
    CHECK(m.journal().size() == 12);

    WhatIf out_of_bounds;
    out_of_bounds.appended["W"] = {1.5};
    CHECK_THROWS_AS((void)m.what_if(out_of_bounds), BoundednessViolation);
    WhatIf unknown;
    unknown.appended["Z"] = {1.0};
    CHECK_THROWS_AS((void)m.what_if(unknown), std::invalid_argument);
    WhatIf bad_mu;
    bad_mu.alternative_mu["W"] = -0.1;
    CHECK_THROWS_AS((void)m.what_if(bad_mu), DomainError);

    // Appends on an empty journal are allowed; nothing at all is not.
    Monitor empty(single(MetricKind::W, 0.6));
    CHECK(empty.what_if(losses).at(0).n == 3);
    CHECK_THROWS_AS((void)empty.what_if(WhatIf{}), NoCompletedTrades);
}

TEST_CASE("update rejects duplicates and violations without changing state") {
    StrategyConfig c = single(MetricKind::W, 0.6);
    c.metrics.push_back({MetricSpec::custom("roe", MetricRule::ReturnOnEquity, Bounds(-0.05, 0.05)), 0.0,
                         AdverseDirection::Shortfall});
    Monitor m(c);
    m.update(make_trade("a", Side::Long, 100, 101));
    const auto snapshot = m.latest();

    CHECK_THROWS_AS(m.update(make_trade("a", Side::Long, 100, 101)), DuplicateTrade);
    try {
        m.update(make_trade("huge", Side::Long, 100, 120));
        FAIL("expected a boundedness violation");
    } catch (const BoundednessViolation& e) {
        CHECK(e.trade_id() == "huge");
    }
    CHECK_THROWS_AS(m.update(make_trade("", Side::Long, 100, 101)), InvalidTrade);
    CHECK(m.journal().size() == 1);
    CHECK(m.latest() == snapshot);
    CHECK_FALSE(m.contains("huge"));
    CHECK(m.contains("a"));
}

TEST_CASE("rolling window keeps the last L trades") {
    StrategyConfig c = single(MetricKind::W, 0.6);
    c.window = WindowPolicy::rolling(4);
    std::vector<bool> wins = {true, true, true, true, false, false, false, true};
    Monitor m(c);
    std::size_t i = 0;
    for (const auto& t : sequence(wins)) {
        m.update(t);
        ++i;
        CHECK(m.latest().at(0).n == static_cast<std::int64_t>(std::min<std::size_t>(i, 4)));
    }
    CHECK(m.latest().at(0).observed_mean == doctest::Approx(0.25));
    const auto w = m.current_window();
    REQUIRE(w.has_value());
    CHECK(w->first == 4);
    CHECK(w->last == 7);

    WhatIf two;
    two.appended["W"] = {1.0, 1.0};
    const auto r = m.what_if(two).at(0);
    CHECK(r.n == 4);
    CHECK(r.observed_mean == doctest::Approx(0.75));
}

TEST_CASE("replay determinism on randomized journals") {
    std::mt19937_64 gen(5150);
    StrategyConfig c;
    c.strategy_id = "rand";
    c.metrics = {tracked(MetricKind::W, 0.55), tracked(MetricKind::P, 0.5), tracked(MetricKind::U, 0.3),
                 tracked(MetricKind::D, 0.25),
                 {MetricSpec::custom("roe", MetricRule::ReturnOnEquity, Bounds(-0.2, 0.2)), 0.01,
                  AdverseDirection::Shortfall}};
    for (int rep = 0; rep < 50; ++rep) {
        StrategyConfig cfg = c;
        cfg.window = rep % 2 ? WindowPolicy::rolling(1 + rep % 7) : WindowPolicy::since_inception();
        cfg.driving_bound = rep % 3 ? DrivingBound::Exponential : DrivingBound::Tight;
        cfg.discount_rate = rep % 4 == 0 ? 0.05 : 0.0;
        const auto trades = testgen::random_journal(gen, 1 + static_cast<std::size_t>(rep) % 40);
        Monitor incremental(cfg);
        for (const auto& t : trades) incremental.update(t);
        const Monitor batch = Monitor::replay(cfg, trades);
        CHECK(incremental.latest() == batch.evaluate());
        CHECK(incremental.evaluate() == incremental.latest());
        for (const BoundReport& r : incremental.latest()) {
            CHECK(r.p_tight.value() <= r.p_exp.value());
            CHECK(r.p_exp.value() >= 0.0);
            CHECK(r.p_exp.value() <= 1.0);
            CHECK(r.tolerance_t >= 0.0);
        }
    }
}

TEST_CASE("tier severity is non-decreasing in n at a fixed adverse mean") {
    const TrackedMetric w = tracked(MetricKind::W, 0.6);
    SignalTier prev = SignalTier::Normal;
    for (std::int64_t n = 1; n <= 200; ++n) {
        const auto r = make_report(w, n, 0.45, default_thresholds(), DrivingBound::Exponential, {});
        CHECK(r.tier >= prev);
        prev = r.tier;
    }
    CHECK(prev == SignalTier::RegimeChange);
}

TEST_CASE("reports are invariant under rescaling the bounds") {
    const TrackedMetric unit{MetricSpec::custom("u", MetricRule::ReturnOnEquity, Bounds::unit()), 0.6,
                             AdverseDirection::Shortfall};
    const TrackedMetric wide{MetricSpec::custom("w", MetricRule::ReturnOnEquity, Bounds(-2.0, 2.0)), 0.4,
                             AdverseDirection::Shortfall};
    for (DrivingBound d : {DrivingBound::Exponential, DrivingBound::Tight}) {
        for (std::int64_t n : {3, 12, 50}) {
            const double unit_mean = 5.0 / 12.0;
            const double wide_mean = -2.0 + 4.0 * unit_mean;
            const auto a = make_report(unit, n, unit_mean, default_thresholds(), d, {});
            const auto b = make_report(wide, n, wide_mean, default_thresholds(), d, {});
            CHECK(b.tolerance_t == doctest::Approx(4.0 * a.tolerance_t).epsilon(1e-14));
            CHECK(b.p_exp.value() == doctest::Approx(a.p_exp.value()).epsilon(1e-12));
            CHECK(b.p_tight.value() == doctest::Approx(a.p_tight.value()).epsilon(1e-12));
            CHECK(a.tier == b.tier);
        }
    }
}

TEST_CASE("driving bound selects the tier source") {
    TrackedMetric w = tracked(MetricKind::W, 0.6);
    // mean 0.425 at n = 12: p_exp ~ 0.48 (Watch) while p_tight is lower.
    const auto e = make_report(w, 12, 0.425, default_thresholds(), DrivingBound::Exponential, {});
    const auto t = make_report(w, 12, 0.425, default_thresholds(), DrivingBound::Tight, {});
    CHECK(e.p_exp == t.p_exp);
    CHECK(e.tier == assign_tier(e.p_exp, default_thresholds()));
    CHECK(t.tier == assign_tier(t.p_tight, default_thresholds()));
}

TEST_CASE("bound curve") {
    const auto c = bound_curve(Bounds::unit(), 0.6, 0.2, AdverseDirection::Shortfall, 50);
    REQUIRE(c.n.size() == 50);
    for (std::size_t i = 0; i < c.n.size(); ++i) {
        const SampleCount n(static_cast<std::int64_t>(i + 1));
        CHECK(c.n[i] == static_cast<double>(i + 1));
        CHECK(c.p_exp[i] == doctest::Approx(exp_bound(0.2, n).value()).epsilon(4e-15));
        CHECK(c.p_tight[i] ==
              doctest::Approx(tight_bound({0.6, 0.2}, n, Tail::lower).value()).epsilon(4e-15));
        CHECK(c.p_tight[i] <= c.p_exp[i]);
    }
    CHECK_THROWS(bound_curve(Bounds::unit(), 0.6, 0.2, AdverseDirection::Shortfall, 0));
    const auto zero = bound_curve(Bounds::unit(), 0.6, 0.5, AdverseDirection::Excess, 3);
    CHECK(zero.p_tight[2] == 0.0);
}

TEST_CASE("enum text round trips") {
    for (SignalTier t : {SignalTier::Normal, SignalTier::Watch, SignalTier::SignificantRisk, SignalTier::RegimeChange}) {
        CHECK(parse_signal_tier(to_string(t)) == t);
    }
    CHECK(parse_adverse_direction("excess") == AdverseDirection::Excess);
    CHECK(parse_driving_bound("tight") == DrivingBound::Tight);
    CHECK_THROWS(parse_signal_tier("Panic"));
}
