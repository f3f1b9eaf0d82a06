// SPDX-License-Identifier: Apache-2.0
#include "jsdm/kernels/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace jsdm::kernels {
namespace {

constexpr KernelTable kScalar{Isa::Scalar, "scalar", &detail::user_energy_scalar,
                              &detail::projection_power_scalar};
constexpr KernelTable kAvx2{Isa::Avx2, "avx2", &detail::user_energy_avx2,
                            &detail::projection_power_avx2};

bool cpu_has_avx2() noexcept
{
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const KernelTable* initial_table() noexcept
{
    if (const char* env = std::getenv("JSDM_KERNELS")) {
        const std::string want(env);
        if (want == "scalar") {
            return &kScalar;
        }
        if (want == "avx2" && cpu_has_avx2()) {
            return &kAvx2;
        }
    }
    return cpu_has_avx2() ? &kAvx2 : &kScalar;
}

std::atomic<const KernelTable*>& current() noexcept
{
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

} // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

const KernelTable* table_for(Isa isa) noexcept
{
    switch (isa) {
    case Isa::Scalar:
        return &kScalar;
    case Isa::Avx2:
        return cpu_has_avx2() ? &kAvx2 : nullptr;
    }
    return nullptr;
}

std::vector<Isa> available_isas()
{
    std::vector<Isa> out{Isa::Scalar};
    if (cpu_has_avx2()) {
        out.push_back(Isa::Avx2);
    }
    return out;
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

bool select(Isa isa) noexcept
{
    const KernelTable* t = table_for(isa);
    if (t == nullptr) {
        return false;
    }
    current().store(t, std::memory_order_release);
    return true;
}

std::string_view isa_name(Isa isa) noexcept
{
    return isa == Isa::Avx2 ? "avx2" : "scalar";
}

} // namespace jsdm::kernels
