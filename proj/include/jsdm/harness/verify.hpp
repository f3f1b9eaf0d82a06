// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace jsdm::harness {

struct CheckLine {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Desk-scale run of the theory checks: cone totality, cone-pair coherence
/// bound, effective-gain bound, alpha-bar admissibility, extreme-value tail.
std::vector<CheckLine> verify_theory(std::uint64_t seed, int threads);

} // namespace jsdm::harness
