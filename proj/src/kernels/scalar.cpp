// SPDX-License-Identifier: Apache-2.0
#include "jsdm/kernels/kernels.hpp"

namespace jsdm::kernels::detail {

void user_energy_scalar(PlanarView x, double* norm2, double* peak2, std::int32_t* peak_index)
{
    for (std::size_t k = 0; k < x.users; ++k) {
        double total = 0.0;
        double best = -1.0;
        std::int32_t arg = 0;
        for (std::size_t j = 0; j < x.dims; ++j) {
            const double a = x.re[j * x.users + k];
            const double b = x.im[j * x.users + k];
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

void projection_power_scalar(PlanarView x, const double* q_re, const double* q_im, double* out)
{
    for (std::size_t k = 0; k < x.users; ++k) {
        double acc_re = 0.0;
        double acc_im = 0.0;
        for (std::size_t j = 0; j < x.dims; ++j) {
            const double a = x.re[j * x.users + k];
            const double b = x.im[j * x.users + k];
            // conj(q_j) * x_kj
            acc_re = acc_re + (q_re[j] * a + q_im[j] * b);
            acc_im = acc_im + (q_re[j] * b - q_im[j] * a);
        }
        out[k] = acc_re * acc_re + acc_im * acc_im;
    }
}

} // namespace jsdm::kernels::detail
