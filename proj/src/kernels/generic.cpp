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

#include <algorithm>
#include <cmath>

#include "regimewatch/kernels.hpp"

namespace regimewatch::kernels::generic {

std::size_t count_at_least(std::span<const double> values, double threshold) {
    std::size_t count = 0;
    for (double v : values) {
        count += v >= threshold ? 1 : 0;
    }
    return count;
}

std::size_t count_at_most(std::span<const double> values, double threshold) {
    std::size_t count = 0;
    for (double v : values) {
        count += v <= threshold ? 1 : 0;
    }
    return count;
}

void exp_linear(double rate, std::span<const double> ns, std::span<double> out) {
    for (std::size_t i = 0; i < ns.size(); ++i) {
        out[i] = std::min(1.0, std::exp(rate * ns[i]));
    }
}

ExpSums exp_sums(std::span<const double> values, double h) {
    ExpSums sums;
    for (double v : values) {
        const double e = std::exp(h * v);
        sums.sum += e;
        sums.sum_sq += e * e;
    }
    return sums;
}

DeviationSums deviation_sums(std::span<const double> values, double center) {
    DeviationSums sums;
    for (double v : values) {
        const double d2 = (v - center) * (v - center);
        sums.sum2 += d2;
        sums.sum4 += d2 * d2;
    }
    return sums;
}

}  // namespace regimewatch::kernels::generic
