// SPDX-License-Identifier: Apache-2.0
#include "jsdm/kernels/kernels.hpp"

#include <immintrin.h>

namespace jsdm::kernels::detail {

// Four users per 256-bit lane. Arithmetic mirrors the scalar reference
// operation for operation (no FMA), so results are bit-identical.

void user_energy_avx2(PlanarView x, double* norm2, double* peak2, std::int32_t* peak_index)
{
    const std::size_t n = x.users;
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        __m256d total = _mm256_setzero_pd();
        __m256d best = _mm256_set1_pd(-1.0);
        __m256d arg = _mm256_setzero_pd();
        for (std::size_t j = 0; j < x.dims; ++j) {
            const __m256d a = _mm256_loadu_pd(x.re + j * n + k);
            const __m256d b = _mm256_loadu_pd(x.im + j * n + k);
            const __m256d p = _mm256_add_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b));
            total = _mm256_add_pd(total, p);
            const __m256d gt = _mm256_cmp_pd(p, best, _CMP_GT_OQ);
            best = _mm256_blendv_pd(best, p, gt);
            arg = _mm256_blendv_pd(arg, _mm256_set1_pd(static_cast<double>(j)), gt);
        }
        _mm256_storeu_pd(norm2 + k, total);
        if (x.dims == 0) {
            best = _mm256_setzero_pd();
        }
        _mm256_storeu_pd(peak2 + k, best);
        const __m128i idx = _mm256_cvttpd_epi32(arg);
        _mm_storeu_si128(reinterpret_cast<__m128i*>(peak_index + k), idx);
    }
    for (; k < n; ++k) {
        double total = 0.0;
        double best = -1.0;
        std::int32_t arg = 0;
        for (std::size_t j = 0; j < x.dims; ++j) {
            const double a = x.re[j * n + k];
            const double b = x.im[j * n + k];
            const double p = a * a + b * b;
            total = total + p;
            if (p > best) {
                best = p;
                arg = static_cast<std::int32_t>(j);
            }
        }
        norm2[k] = total;
        peak2[k] = x.dims == 0 ? 0.0 : best;
        peak_index[k] = arg;
    }
}

void projection_power_avx2(PlanarView x, const double* q_re, const double* q_im, double* out)
{
    const std::size_t n = x.users;
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        __m256d acc_re = _mm256_setzero_pd();
        __m256d acc_im = _mm256_setzero_pd();
        for (std::size_t j = 0; j < x.dims; ++j) {
            const __m256d a = _mm256_loadu_pd(x.re + j * n + k);
            const __m256d b = _mm256_loadu_pd(x.im + j * n + k);
            const __m256d qr = _mm256_set1_pd(q_re[j]);
            const __m256d qi = _mm256_set1_pd(q_im[j]);
            acc_re = _mm256_add_pd(acc_re, _mm256_add_pd(_mm256_mul_pd(qr, a), _mm256_mul_pd(qi, b)));
            acc_im = _mm256_add_pd(acc_im, _mm256_sub_pd(_mm256_mul_pd(qr, b), _mm256_mul_pd(qi, a)));
        }
        const __m256d p = _mm256_add_pd(_mm256_mul_pd(acc_re, acc_re), _mm256_mul_pd(acc_im, acc_im));
        _mm256_storeu_pd(out + k, p);
    }
    for (; k < n; ++k) {
        double acc_re = 0.0;
        double acc_im = 0.0;
        for (std::size_t j = 0; j < x.dims; ++j) {
            const double a = x.re[j * n + k];
            const double b = x.im[j * n + k];
            acc_re = acc_re + (q_re[j] * a + q_im[j] * b);
            acc_im = acc_im + (q_re[j] * b - q_im[j] * a);
        }
        out[k] = acc_re * acc_re + acc_im * acc_im;
    }
}

} // namespace jsdm::kernels::detail
