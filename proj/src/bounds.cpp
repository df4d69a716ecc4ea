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

#include "regimewatch/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace regimewatch {

namespace {

std::string fmt(double x) {
    return std::to_string(x);
}

double clamp_probability(double p) {
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace

UnitInterval::UnitInterval(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw DomainError("value " + fmt(value) + " is outside [0, 1]");
    }
}

Bounds::Bounds(double lower, double upper) : lower_(lower), upper_(upper) {
    if (!std::isfinite(lower) || !std::isfinite(upper) || !(upper > lower)) {
        throw DomainError("bounds require finite a < b, got [" + fmt(lower) + ", " + fmt(upper) + "]");
    }
}

NormalizedPair::NormalizedPair(double mu_dot_value, double t_dot_value)
    : mu_dot(mu_dot_value), t_dot(t_dot_value) {
    if (!(t_dot_value >= 0.0) || !std::isfinite(t_dot_value)) {
        throw DomainError("normalized tolerance must be finite and >= 0, got " + fmt(t_dot_value));
    }
}

SampleCount::SampleCount(std::int64_t n) : n_(n) {
    if (n < 1) {
        throw DomainError("sample count must be >= 1, got " + std::to_string(n));
    }
}

BoundValue::BoundValue(double p) : p_(p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError("probability bound " + fmt(p) + " is outside [0, 1]");
    }
}

NormalizedPair normalize(double mu, double t, const Bounds& bounds) {
    if (!bounds.contains(mu)) {
        throw DomainError("mean " + fmt(mu) + " is outside [" + fmt(bounds.lower()) + ", " +
                          fmt(bounds.upper()) + "]");
    }
    if (!(t >= 0.0)) {
        throw DomainError("tolerance must be >= 0, got " + fmt(t));
    }
    // Rounding can push (mu - a) / (b - a) a hair past 1 when mu == b.
    const double mu_dot = std::min(1.0, (mu - bounds.lower()) / bounds.width());
    return {mu_dot, t / bounds.width()};
}

BoundValue exp_bound(double t_dot, SampleCount n) {
    if (!(t_dot > 0.0)) {
        return BoundValue(1.0);
    }
    const double exponent = -2.0 * t_dot * t_dot * static_cast<double>(n.value());
    return BoundValue(clamp_probability(std::exp(exponent)));
}

BoundValue two_sided_exp_bound(double t_dot, SampleCount n) {
    if (!(t_dot > 0.0)) {
        return BoundValue(1.0);
    }
    const double exponent = -2.0 * t_dot * t_dot * static_cast<double>(n.value());
    return BoundValue(clamp_probability(2.0 * std::exp(exponent)));
}

double tight_log_rate(const NormalizedPair& pair, Tail tail) {
    const double t = pair.t_dot;
    const double mu = tail == Tail::upper ? pair.mu_dot.value() : 1.0 - pair.mu_dot.value();
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();

    if (t == 0.0) {
        return 0.0;
    }
    if (mu + t > 1.0 || mu == 0.0) {
        return kNegInf;
    }
    if (mu + t == 1.0) {
        return std::log(mu);
    }
    const double rest = 1.0 - mu - t;
    // (mu+t) ln(mu/(mu+t)) + (1-mu-t) ln((1-mu)/(1-mu-t))
    return -(mu + t) * std::log1p(t / mu) + rest * std::log1p(t / rest);
}

BoundValue tight_bound(const NormalizedPair& pair, SampleCount n, Tail tail) {
    const double rate = tight_log_rate(pair, tail);
    if (rate == 0.0) {
        return BoundValue(1.0);
    }
    return BoundValue(clamp_probability(std::exp(rate * static_cast<double>(n.value()))));
}

double optimal_h(const NormalizedPair& pair) {
    const double mu = pair.mu_dot.value();
    const double t = pair.t_dot;
    if (mu <= 0.0 || mu >= 1.0) {
        throw DomainError("optimal_h needs 0 < mu_dot < 1, got " + fmt(mu));
    }
    if (t >= 1.0 - mu) {
        throw DomainError("optimal_h needs t_dot < 1 - mu_dot, got t_dot=" + fmt(t));
    }
    if (t == 0.0) {
        return 0.0;
    }
    // ln((1-mu)/(1-mu-t)) + ln((mu+t)/mu), each term non-negative.
    return std::log1p(t / (1.0 - mu - t)) + std::log1p(t / mu);
}

double a4_rhs(const NormalizedPair& pair, SampleCount n, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw DomainError("a4_rhs needs h > 0, got " + fmt(h));
    }
    const double mu = pair.mu_dot.value();
    const double t = pair.t_dot;
    // ln(1 - mu + mu e^h) = h + ln(mu + (1 - mu) e^-h), finite for every h > 0.
    double log_mgf;
    if (mu == 0.0) {
        log_mgf = 0.0;
    } else {
        log_mgf = h + std::log(mu + (1.0 - mu) * std::exp(-h));
    }
    const double per_draw = -h * (t + mu) + log_mgf;
    return std::exp(per_draw * static_cast<double>(n.value()));
}

double lemma1_line_bound(double x, double h, const Bounds& bounds) {
    if (!bounds.contains(x)) {
        throw DomainError("x " + fmt(x) + " is outside [" + fmt(bounds.lower()) + ", " +
                          fmt(bounds.upper()) + "]");
    }
    const double a = bounds.lower();
    const double b = bounds.upper();
    const double w = bounds.width();
    return (b - x) / w * std::exp(h * a) + (x - a) / w * std::exp(h * b);
}

double variance_cap(double mu, const Bounds& bounds) {
    if (!bounds.contains(mu)) {
        throw DomainError("mean " + fmt(mu) + " is outside [" + fmt(bounds.lower()) + ", " +
                          fmt(bounds.upper()) + "]");
    }
    return (mu - bounds.lower()) * (bounds.upper() - mu);
}

namespace detail {

double geometric_mean(std::span<const double> values) {
    if (values.empty()) {
        throw DomainError("geometric mean of an empty sequence");
    }
    double log_sum = 0.0;
    for (double v : values) {
        if (!(v > 0.0)) {
            throw DomainError("geometric mean needs positive values");
        }
        log_sum += std::log(v);
    }
    return std::exp(log_sum / static_cast<double>(values.size()));
}

double arithmetic_mean(std::span<const double> values) {
    if (values.empty()) {
        throw DomainError("arithmetic mean of an empty sequence");
    }
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace detail

}  // namespace regimewatch
