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

#include "regimewatch/mc_oracle.hpp"

#include <algorithm>
#include <charconv>
#include <exception>
#include <limits>
#include <cmath>
#include <ostream>
#include <sstream>
#include <thread>

#include "regimewatch/kernels.hpp"
#include "regimewatch/rng.hpp"

namespace regimewatch::mc {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

bool in_unit(double p) {
    return p >= 0.0 && p <= 1.0;
}

// P(a -> a) for the chain with P(b -> b) = s1 and stationary P(b) = pi.
double markov_stay_low(const MarkovBinary& m) {
    const double pi = m.stationary_mean;
    return (1.0 - 2.0 * pi + pi * m.p_stay) / (1.0 - pi);
}

// Draws successive values of one path. reset() starts a new independent path.
class PathSampler {
public:
    PathSampler(const DistributionSpec& dist, rng::Stream& stream) : dist_(dist), stream_(stream) {
        if (const auto* m = std::get_if<MarkovBinary>(&dist_.family)) {
            stay_low_ = markov_stay_low(*m);
        }
    }

    void reset() {
        index_ = 0;
        started_ = false;
    }

    double next() {
        const double a = dist_.bounds.lower();
        const double w = dist_.bounds.width();
        const double x = std::visit(
            Overloaded{
                [&](const Bernoulli& f) { return stream_.bernoulli(f.p) ? 1.0 : 0.0; },
                [&](const Beta& f) { return a + w * stream_.beta(f.alpha, f.beta); },
                [&](const Uniform& f) { return f.lo + (f.hi - f.lo) * stream_.uniform(); },
                [&](const TwoPoint& f) { return stream_.bernoulli(f.p) ? f.high : f.low; },
                [&](const TimeVarying& f) {
                    const double m = f.means[index_ % f.means.size()];
                    const double unit_mean = (m - a) / w;
                    if (f.inner == InnerFamily::Bernoulli) {
                        return stream_.bernoulli(unit_mean) ? dist_.bounds.upper() : a;
                    }
                    return a + w * stream_.beta(unit_mean * f.concentration, (1.0 - unit_mean) * f.concentration);
                },
                [&](const MarkovBinary& f) {
                    if (!started_) {
                        high_ = stream_.bernoulli(f.stationary_mean);
                    } else {
                        const double stay = high_ ? f.p_stay : stay_low_;
                        if (!stream_.bernoulli(stay)) {
                            high_ = !high_;
                        }
                    }
                    return high_ ? dist_.bounds.upper() : a;
                },
            },
            dist_.family);
        started_ = true;
        ++index_;
        if (!dist_.bounds.contains(x)) {
            throw InvalidDistribution(dist_.family_name() + " produced " + format_double(x) +
                                      " outside its declared bounds");
        }
        return x;
    }

private:
    const DistributionSpec& dist_;
    rng::Stream& stream_;
    std::size_t index_ = 0;
    bool started_ = false;
    bool high_ = false;
    double stay_low_ = 0.0;
};

unsigned resolve_threads(unsigned requested, std::size_t blocks) {
    unsigned t = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(blocks, 1)));
}

}  // namespace

void DistributionSpec::validate() const {
    const Bounds& b = bounds;
    auto fail = [&](const std::string& what) { throw InvalidDistribution(family_name() + ": " + what); };
    std::visit(Overloaded{
                   [&](const Bernoulli& f) {
                       if (!in_unit(f.p)) fail("p must lie in [0, 1]");
                       if (!b.contains(0.0) || !b.contains(1.0)) fail("bounds must contain 0 and 1");
                   },
                   [&](const Beta& f) {
                       if (!(f.alpha > 0.0 && f.beta > 0.0) || !std::isfinite(f.alpha) || !std::isfinite(f.beta))
                           fail("alpha and beta must be positive");
                   },
                   [&](const Uniform& f) {
                       if (!(f.lo < f.hi)) fail("uniform needs lo < hi");
                       if (!b.contains(f.lo) || !b.contains(f.hi)) fail("uniform support exceeds bounds");
                   },
                   [&](const TwoPoint& f) {
                       if (!in_unit(f.p)) fail("p must lie in [0, 1]");
                       if (!(f.low <= f.high)) fail("two_point needs low <= high");
                       if (!b.contains(f.low) || !b.contains(f.high)) fail("two_point support exceeds bounds");
                   },
                   [&](const TimeVarying& f) {
                       if (f.means.empty()) fail("time_varying needs at least one mean");
                       if (!(f.concentration > 0.0)) fail("concentration must be positive");
                       for (double m : f.means) {
                           if (!b.contains(m)) fail("per-draw mean outside bounds");
                           if (f.inner == InnerFamily::Beta && (m == b.lower() || m == b.upper()))
                               fail("beta draws need means strictly inside the bounds");
                       }
                   },
                   [&](const MarkovBinary& f) {
                       if (!(f.stationary_mean > 0.0 && f.stationary_mean < 1.0))
                           fail("stationary_mean must lie in (0, 1)");
                       if (!in_unit(f.p_stay)) fail("p_stay must lie in [0, 1]");
                       if (!in_unit(markov_stay_low(f)))
                           fail("no chain with this p_stay has the requested stationary mean");
                   },
               },
               family);
}

std::string DistributionSpec::family_name() const {
    return std::visit(Overloaded{
                          [](const Bernoulli&) { return std::string("bernoulli"); },
                          [](const Beta&) { return std::string("beta"); },
                          [](const Uniform&) { return std::string("uniform"); },
                          [](const TwoPoint&) { return std::string("two_point"); },
                          [](const TimeVarying&) { return std::string("time_varying"); },
                          [](const MarkovBinary&) { return std::string("markov_binary"); },
                      },
                      family);
}

std::string DistributionSpec::params() const {
    std::string body = std::visit(
        Overloaded{
            [](const Bernoulli& f) { return "p=" + format_double(f.p); },
            [](const Beta& f) { return "alpha=" + format_double(f.alpha) + ";beta=" + format_double(f.beta); },
            [](const Uniform& f) { return "lo=" + format_double(f.lo) + ";hi=" + format_double(f.hi); },
            [](const TwoPoint& f) {
                return "low=" + format_double(f.low) + ";high=" + format_double(f.high) + ";p=" + format_double(f.p);
            },
            [](const TimeVarying& f) {
                std::string s = "means=";
                for (std::size_t i = 0; i < f.means.size(); ++i) {
                    s += (i ? "|" : "") + format_double(f.means[i]);
                }
                s += f.inner == InnerFamily::Bernoulli ? ";inner=bernoulli" : ";inner=beta";
                if (f.inner == InnerFamily::Beta) {
                    s += ";concentration=" + format_double(f.concentration);
                }
                return s;
            },
            [](const MarkovBinary& f) {
                return "p_stay=" + format_double(f.p_stay) + ";stationary_mean=" + format_double(f.stationary_mean);
            },
        },
        family);
    return body + ";a=" + format_double(bounds.lower()) + ";b=" + format_double(bounds.upper());
}

double DistributionSpec::true_mean(std::int64_t n) const {
    const double a = bounds.lower();
    const double w = bounds.width();
    return std::visit(Overloaded{
                          [](const Bernoulli& f) { return f.p; },
                          [&](const Beta& f) { return a + w * f.alpha / (f.alpha + f.beta); },
                          [](const Uniform& f) { return 0.5 * (f.lo + f.hi); },
                          [](const TwoPoint& f) { return f.low + (f.high - f.low) * f.p; },
                          [&](const TimeVarying& f) {
                              const auto k = static_cast<std::int64_t>(f.means.size());
                              const std::int64_t draws = std::max<std::int64_t>(n, 1);
                              double sum = 0.0;
                              for (std::int64_t i = 0; i < std::min(draws, k); ++i) {
                                  const std::int64_t repeats = draws / k + (i < draws % k ? 1 : 0);
                                  sum += static_cast<double>(repeats) * f.means[static_cast<std::size_t>(i)];
                              }
                              return sum / static_cast<double>(draws);
                          },
                          [&](const MarkovBinary& f) { return a + w * f.stationary_mean; },
                      },
                      family);
}

double DistributionSpec::lag_one_correlation() const {
    if (const auto* m = std::get_if<MarkovBinary>(&family)) {
        return markov_stay_low(*m) + m->p_stay - 1.0;
    }
    return 0.0;
}

bool ExceedanceResult::pass() const noexcept {
    return margin() >= 0.0;
}

double ExceedanceResult::margin() const noexcept {
    return bound_tight.value() + 3.0 * standard_error - empirical_frequency.value();
}

std::vector<double> simulate_means(const DistributionSpec& dist, SampleCount n, std::int64_t reps, unsigned threads) {
    dist.validate();
    if (reps < 1) {
        throw std::invalid_argument("reps must be positive");
    }
    const auto count = static_cast<std::size_t>(reps);
    const std::size_t blocks = (count + kBlockSize - 1) / kBlockSize;
    const std::uint64_t master = rng::splitmix64(dist.seed ^ static_cast<std::uint64_t>(n.value()));
    const auto draws = n.value();
    std::vector<double> means(count);

    auto run_block = [&](std::size_t block) {
        rng::Stream stream(master, block);
        PathSampler sampler(dist, stream);
        const std::size_t begin = block * kBlockSize;
        const std::size_t end = std::min(count, begin + kBlockSize);
        for (std::size_t r = begin; r < end; ++r) {
            sampler.reset();
            double sum = 0.0;
            for (std::int64_t i = 0; i < draws; ++i) {
                sum += sampler.next();
            }
            means[r] = sum / static_cast<double>(draws);
        }
    };

    const unsigned workers = resolve_threads(threads, blocks);
    if (workers <= 1) {
        for (std::size_t b = 0; b < blocks; ++b) {
            run_block(b);
        }
        return means;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t b = w; b < blocks; b += workers) {
                        run_block(b);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return means;
}

ExceedanceResult exceedance_from_means(std::span<const double> means, const Bounds& bounds, double mu, double t,
                                       SampleCount n, Direction direction) {
    if (means.empty()) {
        throw std::invalid_argument("no simulated means");
    }
    const NormalizedPair pair = normalize(mu, t, bounds);
    // Ties count as exceedances; the slack absorbs rounding in the running sums.
    const double slack = 1e-12 * bounds.width();
    const std::size_t hits = direction == Direction::Above ? kernels::count_at_least(means, mu + t - slack)
                                                           : kernels::count_at_most(means, mu - t + slack);
    const double reps = static_cast<double>(means.size());
    const double freq = static_cast<double>(hits) / reps;

    ExceedanceResult result;
    result.empirical_frequency = UnitInterval(freq);
    result.bound_exp = exp_bound(pair.t_dot, n);
    result.bound_tight = tight_bound(pair, n, direction == Direction::Above ? Tail::upper : Tail::lower);
    result.replications = static_cast<std::int64_t>(means.size());
    result.exceedances = static_cast<std::int64_t>(hits);
    result.standard_error = std::sqrt(freq * (1.0 - freq) / reps);
    return result;
}

ExceedanceResult simulate_exceedance(const DistributionSpec& dist, double mu, double t, SampleCount n,
                                     std::int64_t reps, Direction direction, unsigned threads) {
    if (!(t > 0.0)) {
        throw DomainError("simulate_exceedance needs t > 0");
    }
    if (reps < kMinReplications) {
        throw std::invalid_argument("simulate_exceedance needs reps >= 10000");
    }
    const auto means = simulate_means(dist, n, reps, threads);
    return exceedance_from_means(means, dist.bounds, mu, t, n, direction);
}

std::vector<double> draw_sequence(const DistributionSpec& dist, std::int64_t count) {
    dist.validate();
    if (count < 1) {
        throw std::invalid_argument("draw count must be positive");
    }
    rng::Stream stream(rng::splitmix64(dist.seed ^ 0xd1b54a32d192ed03ULL), 0);
    PathSampler sampler(dist, stream);
    std::vector<double> out(static_cast<std::size_t>(count));
    for (double& x : out) {
        x = sampler.next();
    }
    return out;
}

CheckResult check_lemma1(const DistributionSpec& dist, double h, std::int64_t reps) {
    if (!(h > 0.0)) {
        throw DomainError("check_lemma1 needs h > 0");
    }
    if (reps < kMinReplications) {
        throw std::invalid_argument("check_lemma1 needs reps >= 10000");
    }
    const auto draws = draw_sequence(dist, reps);
    const auto sums = kernels::exp_sums(draws, h);
    const double count = static_cast<double>(reps);

    CheckResult r;
    r.estimate = sums.sum / count;
    const double var = std::max(0.0, sums.sum_sq / count - r.estimate * r.estimate);
    r.standard_error = std::sqrt(var / count);
    r.bound = lemma1_line_bound(dist.true_mean(reps), h, dist.bounds);
    r.margin = r.bound + 3.0 * r.standard_error - r.estimate;
    r.pass = r.margin >= -1e-12 * r.bound;
    return r;
}

CheckResult check_variance_cap(const DistributionSpec& dist, std::int64_t reps) {
    if (reps < kMinReplications) {
        throw std::invalid_argument("check_variance_cap needs reps >= 10000");
    }
    const auto draws = draw_sequence(dist, reps);
    const double center = dist.true_mean(reps);
    const auto sums = kernels::deviation_sums(draws, center);
    const double count = static_cast<double>(reps);

    CheckResult r;
    r.estimate = sums.sum2 / count;
    const double var = std::max(0.0, sums.sum4 / count - r.estimate * r.estimate);
    r.standard_error = std::sqrt(var / count);
    r.bound = variance_cap(center, dist.bounds);
    r.margin = r.bound + 3.0 * r.standard_error - r.estimate;
    r.pass = r.margin >= -1e-12 * std::max(r.bound, 1e-300);
    return r;
}

std::vector<SuiteEntry> standard_suite(std::uint64_t seed) {
    std::vector<SuiteEntry> entries;
    auto add = [&](Family family, Bounds bounds) {
        DistributionSpec spec{std::move(family), bounds, rng::splitmix64(seed + entries.size())};
        const bool asserted = spec.lag_one_correlation() <= 0.0;
        entries.push_back({std::move(spec), asserted});
    };
    add(Bernoulli{0.6}, Bounds::unit());
    add(Bernoulli{0.1}, Bounds::unit());
    add(Beta{2.0, 5.0}, Bounds::unit());
    add(Beta{0.5, 0.5}, Bounds(-1.0, 3.0));
    add(Uniform{0.0, 1.0}, Bounds::unit());
    add(TwoPoint{0.0, 1.0, 0.5}, Bounds::unit());
    add(TwoPoint{-0.05, 0.05, 0.3}, Bounds(-0.05, 0.05));
    add(TimeVarying{{0.4, 0.6}, InnerFamily::Bernoulli, 10.0}, Bounds::unit());
    add(TimeVarying{{0.2, 0.5, 0.8}, InnerFamily::Beta, 4.0}, Bounds::unit());
    add(MarkovBinary{0.3, 0.5}, Bounds::unit());
    add(MarkovBinary{0.5, 0.5}, Bounds::unit());
    add(MarkovBinary{0.8, 0.5}, Bounds::unit());
    return entries;
}

std::vector<double> standard_t_grid() {
    return {0.05, 0.1, 0.2, 0.3};
}

std::vector<std::int64_t> standard_n_grid() {
    return {5, 12, 40, 100};
}

std::vector<SuiteRow> run_suite(std::span<const SuiteEntry> entries, std::span<const double> t_grid,
                                std::span<const std::int64_t> n_grid, const SuiteOptions& options) {
    std::vector<SuiteRow> rows;
    for (const SuiteEntry& entry : entries) {
        const DistributionSpec& dist = entry.dist;
        for (std::int64_t n : n_grid) {
            const SampleCount count(n);
            const double mu = dist.true_mean(n);
            const auto means = simulate_means(dist, count, options.reps, options.threads);
            for (double t_dot : t_grid) {
                const double t = t_dot * dist.bounds.width();
                for (Direction dir : {Direction::Above, Direction::Below}) {
                    SuiteRow row;
                    row.family = dist.family_name();
                    row.params = dist.params();
                    row.mu = mu;
                    row.t = t;
                    row.n = n;
                    row.direction = dir;
                    row.asserted = entry.asserted;
                    row.correlation = dist.lag_one_correlation();
                    row.result = exceedance_from_means(means, dist.bounds, mu, t, count, dir);
                    rows.push_back(std::move(row));
                }
            }
        }
    }
    return rows;
}

void write_csv(std::ostream& out, std::span<const SuiteRow> rows) {
    out << "family,params,mu,t,n,reps,direction,empirical,se,bound_exp,bound_tight,pass\n";
    for (const SuiteRow& r : rows) {
        out << r.family << ',' << r.params << ',' << format_double(r.mu) << ',' << format_double(r.t) << ',' << r.n
            << ',' << r.result.replications << ',' << to_string(r.direction) << ','
            << format_double(r.result.empirical_frequency.value()) << ',' << format_double(r.result.standard_error)
            << ',' << format_double(r.result.bound_exp.value()) << ',' << format_double(r.result.bound_tight.value())
            << ',' << (r.result.pass() ? "true" : "false") << '\n';
    }
}

void write_summary(std::ostream& out, std::span<const SuiteRow> rows) {
    std::size_t asserted = 0, asserted_fail = 0, evidence = 0, evidence_fail = 0, exp_above_tight = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    double worst_evidence = std::numeric_limits<double>::infinity();
    for (const SuiteRow& r : rows) {
        if (r.result.bound_tight > r.result.bound_exp) {
            ++exp_above_tight;
        }
        if (r.asserted) {
            ++asserted;
            asserted_fail += r.result.pass() ? 0 : 1;
            worst_margin = std::min(worst_margin, r.result.margin());
        } else {
            ++evidence;
            evidence_fail += r.result.pass() ? 0 : 1;
            worst_evidence = std::min(worst_evidence, r.result.margin());
        }
    }
    out << "generator: " << rng::kGeneratorName << '\n';
    out << "kernels: " << kernels::active_isa() << '\n';
    out << "asserted rows: " << asserted << ", within tight bound + 3 SE: " << (asserted - asserted_fail)
        << ", violations: " << asserted_fail;
    if (asserted) out << ", worst margin: " << format_double(worst_margin);
    out << '\n';
    out << "rows with tight bound above exponential bound: " << exp_above_tight << '\n';
    if (evidence) {
        out << "serially correlated rows (empirical evidence, not proof): " << evidence
            << ", within tight bound + 3 SE: " << (evidence - evidence_fail) << ", exceeding: " << evidence_fail
            << ", worst margin: " << format_double(worst_evidence) << '\n';
    }
}

std::string_view to_string(Direction direction) {
    return direction == Direction::Above ? "above" : "below";
}

Direction parse_direction(std::string_view text) {
    if (text == "above") return Direction::Above;
    if (text == "below") return Direction::Below;
    throw std::invalid_argument("direction must be 'above' or 'below', got '" + std::string(text) + "'");
}

}  // namespace regimewatch::mc
