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
#include <cstdlib>
#include <limits>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <doctest.h>

#include "regimewatch/kernels.hpp"

namespace k = regimewatch::kernels;

namespace {

std::vector<double> random_values(std::size_t n, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = d(gen);
    return v;
}

// Sums of positive terms reassociated: error ~ n * eps relative.
bool close(double a, double b, double tol) {
    return std::fabs(a - b) <= tol * std::max(std::fabs(a), std::fabs(b)) + 1e-300;
}

}  // namespace

TEST_CASE("generic kernels agree with naive loops") {
    const auto v = random_values(1001, -1.0, 3.0, 1);
    std::size_t ge = 0;
    std::size_t le = 0;
    double s = 0.0;
    double sq = 0.0;
    double d2 = 0.0;
    double d4 = 0.0;
    for (double x : v) {
        ge += x >= 0.5;
        le += x <= 0.5;
        s += std::exp(0.7 * x);
        sq += std::exp(1.4 * x);
        d2 += (x - 1.0) * (x - 1.0);
        d4 += std::pow(x - 1.0, 4);
    }
    CHECK(k::generic::count_at_least(v, 0.5) == ge);
    CHECK(k::generic::count_at_most(v, 0.5) == le);
    const auto es = k::generic::exp_sums(v, 0.7);
    CHECK(close(es.sum, s, 1e-13));
    CHECK(close(es.sum_sq, sq, 1e-13));
    const auto ds = k::generic::deviation_sums(v, 1.0);
    CHECK(close(ds.sum2, d2, 1e-13));
    CHECK(close(ds.sum4, d4, 1e-13));

    std::vector<double> ns = {1, 2, 3, 10, 100};
    std::vector<double> out(ns.size());
    k::generic::exp_linear(-0.08, ns, out);
    for (std::size_t i = 0; i < ns.size(); ++i) {
        CHECK(out[i] == std::min(1.0, std::exp(-0.08 * ns[i])));
    }
    k::generic::exp_linear(0.5, ns, out);
    CHECK(out[0] == 1.0);
}

TEST_CASE("dispatch reports a consistent variant") {
    const std::string_view isa = k::active_isa();
    CHECK((isa == "avx2" || isa == "generic"));
    if (isa == "avx2") {
        CHECK(k::avx2_supported());
    }
    const char* forced = std::getenv("REGIMEWATCH_SIMD");
    if (forced != nullptr && std::string_view(forced) == "generic") {
        CHECK(isa == "generic");
    } else if (k::avx2_supported()) {
        CHECK(isa == "avx2");
    }
    std::vector<double> ns(3);
    std::vector<double> out(2);
    CHECK_THROWS_AS(k::exp_linear(-1.0, ns, out), std::invalid_argument);
}

#if defined(REGIMEWATCH_HAVE_AVX2)
TEST_CASE("avx2 kernels match the scalar reference") {
    if (!k::avx2_supported()) {
        MESSAGE("AVX2 not available on this CPU or build; equivalence test skipped");
        return;
    }
    // Lengths straddle the 4-wide vector and the unrolled tail.
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 33u, 1000u, 4096u, 4099u}) {
        CAPTURE(n);
        const auto v = random_values(n, -0.05, 0.05, n + 11);
        const auto w = random_values(n, 0.0, 1.0, n + 12);

        for (double th : {-0.05, -0.01, 0.0, 0.02, 0.05}) {
            CHECK(k::avx2::count_at_least(v, th) == k::generic::count_at_least(v, th));
            CHECK(k::avx2::count_at_most(v, th) == k::generic::count_at_most(v, th));
        }
        // Values on the threshold itself must count.
        std::vector<double> ties(n, 0.25);
        CHECK(k::avx2::count_at_least(ties, 0.25) == n);
        CHECK(k::avx2::count_at_most(ties, 0.25) == n);

        for (double h : {0.1, 1.0, 5.0, 20.0}) {
            const auto a = k::avx2::exp_sums(w, h);
            const auto g = k::generic::exp_sums(w, h);
            CHECK(close(a.sum, g.sum, 1e-13));
            CHECK(close(a.sum_sq, g.sum_sq, 1e-13));
        }
        const auto da = k::avx2::deviation_sums(w, 0.4);
        const auto dg = k::generic::deviation_sums(w, 0.4);
        CHECK(close(da.sum2, dg.sum2, 1e-13));
        CHECK(close(da.sum4, dg.sum4, 1e-13));

        std::vector<double> ns(n);
        for (std::size_t i = 0; i < n; ++i) ns[i] = static_cast<double>(i + 1);
        for (double rate : {-1e-4, -0.08, -0.7, -50.0, 0.0, 0.3, -std::numeric_limits<double>::infinity()}) {
            CAPTURE(rate);
            std::vector<double> oa(n);
            std::vector<double> og(n);
            k::avx2::exp_linear(rate, ns, oa);
            k::generic::exp_linear(rate, ns, og);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(oa[i] >= 0.0);
                CHECK(oa[i] <= 1.0);
                if (og[i] >= std::numeric_limits<double>::min()) {
                    CHECK(close(oa[i], og[i], 4e-15));
                } else {
                    // Deep in the subnormal range only the magnitude is meaningful.
                    CHECK(oa[i] <= 1e-300);
                }
            }
        }
    }
}

TEST_CASE("avx2 exponential is accurate across its range") {
    if (!k::avx2_supported()) {
        return;
    }
    std::vector<double> ns(2001);
    for (std::size_t i = 0; i < ns.size(); ++i) ns[i] = -700.0 + 0.35 * static_cast<double>(i);
    std::vector<double> out(ns.size());
    // rate -1: out = min(1, exp(-x)), covering exp over [-700, 700].
    k::avx2::exp_linear(-1.0, ns, out);
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const double want = std::min(1.0, std::exp(-ns[i]));
        CAPTURE(ns[i]);
        CHECK(close(out[i], want, 4e-15));
    }
}
#else
TEST_CASE("avx2 kernels are not built") {
    CHECK_FALSE(k::avx2_compiled());
    CHECK(k::active_isa() == "generic");
}
#endif
