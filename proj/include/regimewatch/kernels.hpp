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

// Data-parallel inner loops used by the Monte Carlo oracle and the bound curves.
//
// Every kernel has a scalar reference in `generic` and, on x86-64, an AVX2+FMA
// variant in `avx2`. The unqualified entry points dispatch once at startup to the
// best variant the CPU supports. Setting REGIMEWATCH_SIMD=generic in the
// environment forces the scalar path.
//
// Counting kernels are exact in every variant. Reductions reassociate the sums, and
// the vector exponential is a Cephes-style rational approximation, so floating
// results agree with the reference to a few ulps rather than bit-for-bit.

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace regimewatch::kernels {

/// Sums of e^(hx) and e^(2hx).
struct ExpSums {
    double sum = 0.0;
    double sum_sq = 0.0;
};

/// Sums of (x - c)^2 and (x - c)^4.
struct DeviationSums {
    double sum2 = 0.0;
    double sum4 = 0.0;
};

#define REGIMEWATCH_KERNEL_DECLS                                                   \
    std::size_t count_at_least(std::span<const double> values, double threshold); \
    std::size_t count_at_most(std::span<const double> values, double threshold);  \
    void exp_linear(double rate, std::span<const double> ns, std::span<double> out); \
    ExpSums exp_sums(std::span<const double> values, double h);                   \
    DeviationSums deviation_sums(std::span<const double> values, double center);

namespace generic {
REGIMEWATCH_KERNEL_DECLS
}  // namespace generic

namespace avx2 {
// Only callable when avx2_supported() is true.
REGIMEWATCH_KERNEL_DECLS
}  // namespace avx2

#undef REGIMEWATCH_KERNEL_DECLS

/// True when the AVX2 translation unit was built into this binary.
bool avx2_compiled() noexcept;
/// True when AVX2 is compiled in and the running CPU supports AVX2 and FMA.
bool avx2_supported() noexcept;
/// Name of the variant the dispatching entry points use: "avx2" or "generic".
std::string_view active_isa() noexcept;

/// Number of values >= threshold.
std::size_t count_at_least(std::span<const double> values, double threshold);
/// Number of values <= threshold.
std::size_t count_at_most(std::span<const double> values, double threshold);
/// out[i] = min(1, exp(rate * ns[i])). The spans must have equal length.
void exp_linear(double rate, std::span<const double> ns, std::span<double> out);
ExpSums exp_sums(std::span<const double> values, double h);
DeviationSums deviation_sums(std::span<const double> values, double center);

}  // namespace regimewatch::kernels
