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

#include <cstdlib>
#include <stdexcept>
#include <string_view>

#include "regimewatch/kernels.hpp"

namespace regimewatch::kernels {

bool avx2_compiled() noexcept {
#if defined(REGIMEWATCH_HAVE_AVX2)
    return true;
#else
    return false;
#endif
}

bool avx2_supported() noexcept {
#if defined(REGIMEWATCH_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

struct Table {
    std::string_view isa;
    std::size_t (*count_at_least)(std::span<const double>, double);
    std::size_t (*count_at_most)(std::span<const double>, double);
    void (*exp_linear)(double, std::span<const double>, std::span<double>);
    ExpSums (*exp_sums)(std::span<const double>, double);
    DeviationSums (*deviation_sums)(std::span<const double>, double);
};

[[maybe_unused]] bool forced_generic() {
    const char* env = std::getenv("REGIMEWATCH_SIMD");
    return env != nullptr && std::string_view(env) == "generic";
}

Table select() {
#if defined(REGIMEWATCH_HAVE_AVX2)
    if (avx2_supported() && !forced_generic()) {
        return {"avx2",         avx2::count_at_least, avx2::count_at_most,
                avx2::exp_linear, avx2::exp_sums,    avx2::deviation_sums};
    }
#endif
    return {"generic",           generic::count_at_least, generic::count_at_most,
            generic::exp_linear, generic::exp_sums,       generic::deviation_sums};
}

const Table& table() {
    static const Table t = select();
    return t;
}

}  // namespace

std::string_view active_isa() noexcept {
    return table().isa;
}

std::size_t count_at_least(std::span<const double> values, double threshold) {
    return table().count_at_least(values, threshold);
}

std::size_t count_at_most(std::span<const double> values, double threshold) {
    return table().count_at_most(values, threshold);
}

void exp_linear(double rate, std::span<const double> ns, std::span<double> out) {
    if (ns.size() != out.size()) {
        throw std::invalid_argument("exp_linear: input and output spans differ in length");
    }
    table().exp_linear(rate, ns, out);
}

ExpSums exp_sums(std::span<const double> values, double h) {
    return table().exp_sums(values, h);
}

DeviationSums deviation_sums(std::span<const double> values, double center) {
    return table().deviation_sums(values, center);
}

}  // namespace regimewatch::kernels
