// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace jsdm::kernels {

/// Column-planar complex matrix: `users` rows, `dims` columns. Entry (k, j)
/// lives at re[j * users + k], im[j * users + k], so consecutive users of one
/// coordinate are contiguous and the batch kernels vectorize across users.
struct PlanarView {
    const double* re = nullptr;
    const double* im = nullptr;
    std::size_t users = 0;
    std::size_t dims = 0;
};

/// Per-user energy profile of a planar batch.
///   norm2[k]      = sum_j |x_kj|^2
///   peak2[k]      = max_j |x_kj|^2
///   peak_index[k] = first j attaining the maximum
using UserEnergyFn = void (*)(PlanarView x, double* norm2, double* peak2, std::int32_t* peak_index);

/// out[k] = |q^H x_k|^2 for a probe vector q of length x.dims.
using ProjectionPowerFn = void (*)(PlanarView x, const double* q_re, const double* q_im, double* out);

enum class Isa { Scalar, Avx2 };

struct KernelTable {
    Isa isa;
    std::string_view name;
    UserEnergyFn user_energy;
    ProjectionPowerFn projection_power;
};

/// Reference implementations; always available.
const KernelTable& scalar_table() noexcept;

/// Returns the table for `isa`, or nullptr when the CPU (or build) lacks it.
const KernelTable* table_for(Isa isa) noexcept;

/// ISAs usable on this machine, scalar first.
std::vector<Isa> available_isas();

/// Kernel table used by the library. Chosen once on first use: the widest
/// supported ISA, unless JSDM_KERNELS=scalar|avx2 overrides it.
const KernelTable& active() noexcept;

/// Force a specific table (tests, benchmarking). Returns false if unsupported.
bool select(Isa isa) noexcept;

std::string_view isa_name(Isa isa) noexcept;

namespace detail {
void user_energy_scalar(PlanarView x, double* norm2, double* peak2, std::int32_t* peak_index);
void projection_power_scalar(PlanarView x, const double* q_re, const double* q_im, double* out);
void user_energy_avx2(PlanarView x, double* norm2, double* peak2, std::int32_t* peak_index);
void projection_power_avx2(PlanarView x, const double* q_re, const double* q_im, double* out);
} // namespace detail

} // namespace jsdm::kernels
