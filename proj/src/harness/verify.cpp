// SPDX-License-Identifier: Apache-2.0
#include "jsdm/harness/verify.hpp"

#include <cmath>
#include <sstream>

#include "jsdm/beamforming.hpp"
#include "jsdm/rng.hpp"
#include "jsdm/scheduling.hpp"
#include "jsdm/theory.hpp"

namespace jsdm::harness {

namespace {

template <class... T> std::string cat(const T&... parts)
{
    std::ostringstream os;
    (os << ... << parts);
    return os.str();
}

CVec random_vector(CounterRng& rng, int r)
{
    CVec x(r);
    for (int j = 0; j < r; ++j) {
        x(j) = rng.complex_normal();
    }
    return x;
}

} // namespace

std::vector<CheckLine> verify_theory(std::uint64_t seed, int /*threads*/)
{
    std::vector<CheckLine> lines;

    {
        bool ok = true;
        std::ostringstream detail;
        for (int r : {2, 3, 4, 8}) {
            CounterRng rng(derive_key(seed, {1, static_cast<std::uint64_t>(r)}));
            long empty_at_min = 0;
            long empty_above = 0;
            for (int n = 0; n < 10'000; ++n) {
                const CVec g = random_vector(rng, r);
                empty_at_min += candidate_set(g, alpha_min(r)).empty() ? 1 : 0;
                empty_above += candidate_set(g, alpha_min(r) + 0.05).empty() ? 1 : 0;
            }
            ok = ok && empty_at_min == 0 && empty_above > 0;
            detail << "r*=" << r << ": " << empty_at_min << " empty at alpha_min, " << empty_above << " above; ";
        }
        lines.push_back({"cone totality at alpha_min", ok, detail.str()});
    }

    {
        const ConePairCheck c = cone_pair_bound_check(0.9, 4, 400, derive_key(seed, {2}));
        lines.push_back({"cone-pair coherence bound", c.pass && !c.inconclusive,
                         cat("max ", c.max_observed, " vs bound ", c.bound, " over ", c.pairs, " pairs")});
    }

    {
        const double alpha = 0.8;
        const double factor = gershgorin_gain_bound(alpha, 2);
        CounterRng rng(derive_key(seed, {3}));
        double worst = INFINITY;
        for (int n = 0; n < 2000; ++n) {
            CMat G(2, 2);
            for (int i = 0; i < 2; ++i) {
                const double scale = std::sqrt(-std::log(rng.uniform()));
                G.row(i) = (scale * sample_in_cone(rng, 2, i, alpha)).adjoint();
            }
            const ZfPrecoder zf = zf_precoder(G);
            for (int i = 0; i < 2; ++i) {
                worst = std::min(worst, zf.gains(i) - G.row(i).squaredNorm() * factor);
            }
        }
        lines.push_back({"effective-gain lower bound", worst >= -1e-9, cat("min(gamma - bound) = ", worst)});
    }

    {
        bool ok = true;
        for (int r = 2; r <= 64; ++r) {
            ok = ok && alpha_bar_lower(r) >= 1.0 / std::sqrt(2.0) - 1e-15;
        }
        lines.push_back({"alpha-bar admissibility", ok, "r* = 2..64"});
    }

    {
        const TailCheck t = evt_exponential_batches(100, 2000, derive_key(seed, {5}));
        const double sigma = std::sqrt(t.closed_form * (1.0 - t.closed_form) / static_cast<double>(t.trials));
        lines.push_back({"extreme-value tail (exponential)", std::abs(t.exceedance - t.closed_form) <= 3.0 * sigma,
                         cat("K=100 exceedance ", t.exceedance, " vs ", t.closed_form)});
    }
    return lines;
}

} // namespace jsdm::harness
