// SPDX-License-Identifier: Apache-2.0
#include "jsdm/rng.hpp"

#include <cmath>
#include <numbers>

namespace jsdm {

std::uint64_t derive_key(std::uint64_t root, std::initializer_list<std::uint64_t> path) noexcept
{
    std::uint64_t key = mix64(root);
    for (std::uint64_t p : path) {
        key = mix64(key ^ mix64(p + 0x632be59bd9b4e019ULL));
    }
    return key;
}

double CounterRng::normal() noexcept
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

cplx CounterRng::complex_normal() noexcept
{
    const double re = normal();
    const double im = normal();
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

} // namespace jsdm
