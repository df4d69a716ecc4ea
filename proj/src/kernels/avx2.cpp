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

// Compiled with -mavx2 -mfma. Nothing here may run before the dispatcher has
// checked the CPU.

#include <immintrin.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

#include "regimewatch/kernels.hpp"

namespace regimewatch::kernels::avx2 {

namespace {

constexpr std::size_t kLanes = 4;

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// 2^k for integer-valued k in [-1022, 1023].
inline __m256d pow2(__m256d k) {
    const __m128i k32 = _mm256_cvtpd_epi32(k);
    __m256i k64 = _mm256_cvtepi32_epi64(k32);
    k64 = _mm256_add_epi64(k64, _mm256_set1_epi64x(1023));
    return _mm256_castsi256_pd(_mm256_slli_epi64(k64, 52));
}

// Cephes exp: x = k ln2 + r, |r| <= ln2 / 2, e^r = 1 + 2r P(r^2) / (Q(r^2) - r P(r^2)).
inline __m256d exp_pd(__m256d x) {
    const __m256d max_x = _mm256_set1_pd(709.78);
    const __m256d min_x = _mm256_set1_pd(-745.2);
    x = _mm256_max_pd(_mm256_min_pd(x, max_x), min_x);

    const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634073599)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(k, _mm256_set1_pd(6.93145751953125e-1), x);
    r = _mm256_fnmadd_pd(k, _mm256_set1_pd(1.42860682030941723212e-6), r);

    const __m256d rr = _mm256_mul_pd(r, r);
    __m256d p = _mm256_set1_pd(1.26177193074810590878e-4);
    p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(3.02994407707441961300e-2));
    p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(9.99999999999999999910e-1));
    p = _mm256_mul_pd(p, r);

    __m256d q = _mm256_set1_pd(3.00198505138664455042e-6);
    q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.52448340349684104192e-3));
    q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.27265548208155028766e-1));
    q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.00000000000000000009e0));

    const __m256d ratio = _mm256_div_pd(p, _mm256_sub_pd(q, p));
    const __m256d er = _mm256_fmadd_pd(_mm256_set1_pd(2.0), ratio, _mm256_set1_pd(1.0));

    // Split the scale so that subnormal results stay representable.
    const __m256d k1 = _mm256_floor_pd(_mm256_mul_pd(k, _mm256_set1_pd(0.5)));
    const __m256d k2 = _mm256_sub_pd(k, k1);
    return _mm256_mul_pd(_mm256_mul_pd(er, pow2(k1)), pow2(k2));
}

}  // namespace

std::size_t count_at_least(std::span<const double> values, double threshold) {
    const __m256d thr = _mm256_set1_pd(threshold);
    const double* data = values.data();
    const std::size_t n = values.size();
    std::size_t count = 0;
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(data + i), thr, _CMP_GE_OQ);
        count += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(_mm256_movemask_pd(mask))));
    }
    for (; i < n; ++i) {
        count += data[i] >= threshold ? 1 : 0;
    }
    return count;
}

std::size_t count_at_most(std::span<const double> values, double threshold) {
    const __m256d thr = _mm256_set1_pd(threshold);
    const double* data = values.data();
    const std::size_t n = values.size();
    std::size_t count = 0;
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(data + i), thr, _CMP_LE_OQ);
        count += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(_mm256_movemask_pd(mask))));
    }
    for (; i < n; ++i) {
        count += data[i] <= threshold ? 1 : 0;
    }
    return count;
}

void exp_linear(double rate, std::span<const double> ns, std::span<double> out) {
    const std::size_t n = ns.size();
    const __m256d vrate = _mm256_set1_pd(rate);
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d e = exp_pd(_mm256_mul_pd(vrate, _mm256_loadu_pd(ns.data() + i)));
        _mm256_storeu_pd(out.data() + i, _mm256_min_pd(e, one));
    }
    for (; i < n; ++i) {
        out[i] = std::min(1.0, std::exp(rate * ns[i]));
    }
}

ExpSums exp_sums(std::span<const double> values, double h) {
    const std::size_t n = values.size();
    const __m256d vh = _mm256_set1_pd(h);
    __m256d acc = _mm256_setzero_pd();
    __m256d acc_sq = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d e = exp_pd(_mm256_mul_pd(vh, _mm256_loadu_pd(values.data() + i)));
        acc = _mm256_add_pd(acc, e);
        acc_sq = _mm256_fmadd_pd(e, e, acc_sq);
    }
    ExpSums sums{hsum(acc), hsum(acc_sq)};
    for (; i < n; ++i) {
        const double e = std::exp(h * values[i]);
        sums.sum += e;
        sums.sum_sq += e * e;
    }
    return sums;
}

DeviationSums deviation_sums(std::span<const double> values, double center) {
    const std::size_t n = values.size();
    const __m256d c = _mm256_set1_pd(center);
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc4 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(values.data() + i), c);
        const __m256d d2 = _mm256_mul_pd(d, d);
        acc2 = _mm256_add_pd(acc2, d2);
        acc4 = _mm256_fmadd_pd(d2, d2, acc4);
    }
    DeviationSums sums{hsum(acc2), hsum(acc4)};
    for (; i < n; ++i) {
        const double d2 = (values[i] - center) * (values[i] - center);
        sums.sum2 += d2;
        sums.sum4 += d2 * d2;
    }
    return sums;
}

}  // namespace regimewatch::kernels::avx2
