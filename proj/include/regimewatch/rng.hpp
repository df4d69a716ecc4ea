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

#include <cstdint>
#include <random>
#include <string_view>

namespace regimewatch::rng {

/// Recorded in every simulation report.
inline constexpr std::string_view kGeneratorName =
    "mt19937_64; stream k seeded with splitmix64(master ^ (k * 0x9e3779b97f4a7c15))";

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// One independent random stream. The engine output sequence is fixed by the C++
/// standard, and every conversion below is written out here rather than borrowed
/// from <random> distributions, whose algorithms vary between standard libraries.
class Stream {
public:
    Stream(std::uint64_t master_seed, std::uint64_t stream_index);

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    bool bernoulli(double p) noexcept { return uniform() < p; }
    /// Standard normal, Marsaglia polar method.
    double normal() noexcept;
    /// Gamma(shape, 1), Marsaglia-Tsang.
    double gamma(double shape) noexcept;
    /// Beta(alpha, beta) via two gamma draws.
    double beta(double alpha, double beta) noexcept;

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace regimewatch::rng
