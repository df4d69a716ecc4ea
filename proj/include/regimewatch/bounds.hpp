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

#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace regimewatch {

/// Raised when an argument lies outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A real number in the closed interval [0, 1].
class UnitInterval {
public:
    explicit UnitInterval(double value);

    [[nodiscard]] double value() const noexcept { return value_; }
    auto operator<=>(const UnitInterval&) const = default;

private:
    double value_;
};

/// Closed range [a, b] with b > a that contains every observation of a variable.
class Bounds {
public:
    Bounds(double lower, double upper);

    static Bounds unit() { return {0.0, 1.0}; }

    [[nodiscard]] double lower() const noexcept { return lower_; }
    [[nodiscard]] double upper() const noexcept { return upper_; }
    [[nodiscard]] double width() const noexcept { return upper_ - lower_; }
    [[nodiscard]] bool contains(double x) const noexcept { return x >= lower_ && x <= upper_; }

    bool operator==(const Bounds&) const = default;

private:
    double lower_;
    double upper_;
};

/// Mean and tolerance rescaled to the unit interval.
struct NormalizedPair {
    NormalizedPair(double mu_dot, double t_dot);

    UnitInterval mu_dot;
    double t_dot;
};

/// Number of observations, always at least one.
class SampleCount {
public:
    explicit SampleCount(std::int64_t n);

    [[nodiscard]] std::int64_t value() const noexcept { return n_; }
    auto operator<=>(const SampleCount&) const = default;

private:
    std::int64_t n_;
};

/// Upper bound on the probability of a deviation event.
class BoundValue {
public:
    explicit BoundValue(double p);

    [[nodiscard]] double value() const noexcept { return p_; }
    auto operator<=>(const BoundValue&) const = default;

private:
    double p_;
};

/// Which tail of the sample mean a bound refers to.
///   upper: P[mean - mu >= t]
///   lower: P[mean - mu <= -t]
enum class Tail { upper, lower };

/// Maps (mu, t) on [a, b] to ((mu - a) / (b - a), t / (b - a)).
NormalizedPair normalize(double mu, double t, const Bounds& bounds);

/// One-sided exponential bound min(1, exp(-2 t^2 n)) with t already on unit width.
/// Non-positive tolerances carry no adverse evidence and yield 1.
BoundValue exp_bound(double t_dot, SampleCount n);

/// Two-sided version min(1, 2 exp(-2 t^2 n)).
BoundValue two_sided_exp_bound(double t_dot, SampleCount n);

/// Product-form bound obtained by minimizing the moment generating function bound
/// over h:
///
///     ((mu/(mu+t))^(mu+t) * ((1-mu)/(1-mu-t))^(1-mu-t))^n
///
/// evaluated in log space. For Tail::lower the mean is reflected to 1 - mu, which is
/// the same bound applied to the variable 1 - X.
///
/// Boundary behavior (upper tail):
///   t == 0            -> 1
///   mu + t > 1        -> 0 (the event needs a value above b)
///   mu + t == 1       -> mu^n (only the all-at-b outcome qualifies)
///   mu == 0, t > 0    -> 0
BoundValue tight_bound(const NormalizedPair& pair, SampleCount n, Tail tail = Tail::upper);

/// Per-observation log of the tight bound, so that tight_bound = exp(n * rate).
/// Returns -infinity where the bound is exactly zero.
double tight_log_rate(const NormalizedPair& pair, Tail tail = Tail::upper);

/// Minimizer of a4_rhs over h > 0:
///     ln[(1 - mu)(mu + t) / ((1 - mu - t) mu)]
/// Requires 0 < mu < 1 and 0 <= t < 1 - mu.
double optimal_h(const NormalizedPair& pair);

/// (exp(-h (t + mu)) * (1 - mu + mu e^h))^n, the bound before optimizing over h.
double a4_rhs(const NormalizedPair& pair, SampleCount n, double h);

/// Chord of e^(hx) through (a, e^(ha)) and (b, e^(hb)), evaluated at x.
double lemma1_line_bound(double x, double h, const Bounds& bounds);

/// Largest variance a variable on [a, b] with mean mu can have: (mu - a)(b - mu).
double variance_cap(double mu, const Bounds& bounds);

namespace detail {

// Helpers used by the proof-machinery tests.
double geometric_mean(std::span<const double> values);
double arithmetic_mean(std::span<const double> values);

}  // namespace detail

}  // namespace regimewatch
