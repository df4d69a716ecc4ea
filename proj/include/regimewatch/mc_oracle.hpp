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

// Monte Carlo checks that the implemented bounds hold for concrete bounded sources,
// including sources whose mean drifts from draw to draw and serially correlated
// two-state chains.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "regimewatch/bounds.hpp"

namespace regimewatch::mc {

class InvalidDistribution : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Values 0 or 1; bounds must contain [0, 1].
struct Bernoulli {
    double p;
};
/// Beta(alpha, beta) rescaled onto the spec bounds.
struct Beta {
    double alpha;
    double beta;
};
struct Uniform {
    double lo;
    double hi;
};
/// `high` with probability p, `low` otherwise.
struct TwoPoint {
    double low;
    double high;
    double p;
};

enum class InnerFamily { Bernoulli, Beta };

/// Independent draws whose means cycle through `means` (in bound units). Bernoulli
/// draws take the values a or b; Beta draws use alpha + beta = concentration.
struct TimeVarying {
    std::vector<double> means;
    InnerFamily inner = InnerFamily::Bernoulli;
    double concentration = 10.0;
};

/// Stationary two-state chain on {a, b}. `p_stay` is P(b -> b); P(a -> a) is chosen
/// so the stationary probability of b equals `stationary_mean`. The lag-one
/// autocorrelation is P(a -> a) + P(b -> b) - 1.
struct MarkovBinary {
    double p_stay;
    double stationary_mean;
};

using Family = std::variant<Bernoulli, Beta, Uniform, TwoPoint, TimeVarying, MarkovBinary>;

struct DistributionSpec {
    Family family;
    Bounds bounds = Bounds::unit();
    std::uint64_t seed = 0;

    /// Throws InvalidDistribution when parameters are out of range or can produce
    /// values outside the bounds.
    void validate() const;

    [[nodiscard]] std::string family_name() const;
    /// Parameters as `key=value` pairs separated by ';'.
    [[nodiscard]] std::string params() const;
    /// Mean of the per-draw means over the first n draws.
    [[nodiscard]] double true_mean(std::int64_t n) const;
    /// Lag-one autocorrelation of the draws (0 for independent families).
    [[nodiscard]] double lag_one_correlation() const;
};

enum class Direction { Above, Below };

struct ExceedanceResult {
    UnitInterval empirical_frequency{0.0};
    BoundValue bound_exp{1.0};
    BoundValue bound_tight{1.0};
    std::int64_t replications = 0;
    std::int64_t exceedances = 0;
    double standard_error = 0.0;

    /// empirical <= tight bound + 3 standard errors
    [[nodiscard]] bool pass() const noexcept;
    [[nodiscard]] double margin() const noexcept;
};

/// reps sample means over n draws each. Replication r draws from stream
/// r / kBlockSize of the spec seed, so results do not depend on the thread count.
std::vector<double> simulate_means(const DistributionSpec& dist, SampleCount n, std::int64_t reps,
                                   unsigned threads = 0);

/// Counts mean - mu >= t (Above) or mean - mu <= -t (Below) over precomputed means.
ExceedanceResult exceedance_from_means(std::span<const double> means, const Bounds& bounds, double mu, double t,
                                       SampleCount n, Direction direction);

/// Requires t > 0 and reps >= 10^4.
ExceedanceResult simulate_exceedance(const DistributionSpec& dist, double mu, double t, SampleCount n,
                                     std::int64_t reps, Direction direction, unsigned threads = 0);

/// `reps` consecutive draws of one path of the source.
std::vector<double> draw_sequence(const DistributionSpec& dist, std::int64_t count);

struct CheckResult {
    bool pass = false;
    double estimate = 0.0;
    double bound = 0.0;
    double standard_error = 0.0;
    /// bound + 3 * standard_error - estimate; non-negative on pass.
    double margin = 0.0;
};

/// Monte Carlo E[e^(hX)] against the convexity chord evaluated at the true mean.
CheckResult check_lemma1(const DistributionSpec& dist, double h, std::int64_t reps);

/// Variance about the true mean against (mu - a)(b - mu).
CheckResult check_variance_cap(const DistributionSpec& dist, std::int64_t reps);

inline constexpr std::int64_t kMinReplications = 10'000;
inline constexpr std::int64_t kBlockSize = 4096;

// The standard verification grid.

struct SuiteEntry {
    DistributionSpec dist;
    /// Rows from evidence-only entries are reported but not asserted.
    bool asserted = true;
};

/// Sources with a positive lag-one correlation are evidence-only: Hoeffding's bound
/// assumes independence and such chains can exceed it at large n t^2.
std::vector<SuiteEntry> standard_suite(std::uint64_t seed);
/// Normalized tolerances of the standard grid.
std::vector<double> standard_t_grid();
std::vector<std::int64_t> standard_n_grid();

struct SuiteRow {
    std::string family;
    std::string params;
    double mu = 0.0;
    double t = 0.0;
    std::int64_t n = 0;
    Direction direction = Direction::Above;
    bool asserted = true;
    double correlation = 0.0;
    ExceedanceResult result;
};

struct SuiteOptions {
    std::int64_t reps = 100'000;
    unsigned threads = 0;
};

/// t_grid is in normalized units; each row's t is rescaled by the source's width.
std::vector<SuiteRow> run_suite(std::span<const SuiteEntry> entries, std::span<const double> t_grid,
                                std::span<const std::int64_t> n_grid, const SuiteOptions& options);

/// Columns: family,params,mu,t,n,reps,direction,empirical,se,bound_exp,bound_tight,pass
void write_csv(std::ostream& out, std::span<const SuiteRow> rows);
void write_summary(std::ostream& out, std::span<const SuiteRow> rows);

std::string_view to_string(Direction direction);
Direction parse_direction(std::string_view text);

}  // namespace regimewatch::mc
