// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <initializer_list>

#include "jsdm/types.hpp"

namespace jsdm {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives a stream key from a root seed and a path of indices
/// (e.g. {trial, group, user}). Distinct paths give unrelated keys.
std::uint64_t derive_key(std::uint64_t root, std::initializer_list<std::uint64_t> path) noexcept;

/// Counter-based generator: output n is a hash of (key, n). Streams are cheap
/// to create, so every (trial, group, user) gets its own.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

    std::uint64_t next_u64() noexcept
    {
        return mix64(key_ ^ mix64(counter_++));
    }

    /// Uniform in the open interval (0, 1).
    double uniform() noexcept
    {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard real normal via Box-Muller (one pair cached).
    double normal() noexcept;

    /// Circularly-symmetric complex normal with E|z|^2 = 1.
    cplx complex_normal() noexcept;

    std::uint64_t key() const noexcept { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace jsdm
