// SPDX-License-Identifier: Apache-2.0
#include "jsdm/beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace jsdm {

std::vector<BdGroupReport> check_approx_bd(std::span<const GroupProfile> groups, double tol)
{
    std::vector<BdGroupReport> out;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const CMat served = groups[g].eigvecs().leftCols(groups[g].served_beams());
        double worst = 0.0;
        for (std::size_t o = 0; o < groups.size(); ++o) {
            if (o == g) {
                continue;
            }
            worst = std::max(worst, (served.adjoint() * groups[o].prebeamformer()).cwiseAbs().maxCoeff());
        }
        out.push_back({groups[g].id(), worst, worst <= tol});
    }
    return out;
}

CMat ZfPrecoder::scaled() const
{
    if (powers.size() != directions.cols()) {
        throw InvariantError("ZF precoder used before power allocation");
    }
    return directions * powers.cwiseSqrt().asDiagonal();
}

ZfPrecoder zf_precoder(const CMat& selected)
{
    const Eigen::Index s = selected.rows();
    const Eigen::Index r = selected.cols();
    ZfPrecoder out;
    if (s == 0) {
        out.directions.resize(r, 0);
        return out;
    }
    Eigen::JacobiSVD<CMat> svd(selected, Eigen::ComputeFullU);
    const RVec& sv = svd.singularValues();
    const double smax = sv(0);
    // With more rows than beams the rows are always dependent.
    const double smin = s > r ? 0.0 : sv(s - 1);
    out.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(out.condition < kMaxZfCondition)) {
        // Last left singular vector (a left null vector when s > r): rows
        // with a large coefficient are the ones taking part in the dependency.
        const CVec u = svd.matrixU().col(s - 1);
        std::vector<int> rows;
        for (Eigen::Index i = 0; i < s; ++i) {
            if (std::abs(u(i)) > 1e-3) {
                rows.push_back(static_cast<int>(i));
            }
        }
        std::stable_sort(rows.begin(), rows.end(), [&u](int a, int b) { return std::abs(u(a)) > std::abs(u(b)); });
        throw RankDeficientError("selected effective channels are rank deficient (condition " +
                                     std::to_string(out.condition) + ")",
                                 std::move(rows));
    }
    if (out.condition < kCholeskyCondition) {
        const CMat gram = selected * selected.adjoint();
        Eigen::LLT<CMat> llt(gram);
        out.directions = selected.adjoint() * llt.solve(CMat::Identity(s, s));
    } else {
        Eigen::CompleteOrthogonalDecomposition<CMat> cod(selected);
        out.directions = cod.pseudoInverse();
    }
    out.gains = out.directions.colwise().squaredNorm().cwiseInverse().transpose();
    return out;
}

double gershgorin_gain_bound(double alpha, int served_beams)
{
    if (alpha < 1.0 / std::sqrt(2.0) - 1e-15 || alpha > 1.0) {
        throw ConfigError("gershgorin_gain_bound: alpha must lie in [1/sqrt(2), 1]");
    }
    if (served_beams < 1) {
        throw ConfigError("gershgorin_gain_bound: served beams must be positive");
    }
    const double radius = 2.0 * alpha * std::sqrt(std::max(0.0, 1.0 - alpha * alpha));
    return std::max(0.0, 1.0 - (served_beams - 1) * radius);
}

std::vector<double> water_fill(std::span<const double> gain_to_noise, double budget)
{
    const std::size_t n = gain_to_noise.size();
    std::vector<double> q(n, 0.0);
    if (n == 0) {
        return q;
    }
    double best = 0.0;
    for (double a : gain_to_noise) {
        best = std::max(best, a);
    }
    if (!(best > 0.0)) {
        throw ConfigError("water_fill: all gains are zero");
    }
    auto filled = [&](double level) {
        double total = 0.0;
        for (double a : gain_to_noise) {
            if (a > 0.0) {
                total += std::max(0.0, level - 1.0 / a);
            }
        }
        return total;
    };
    // Bisection on the water level, then an exact solve on the active set.
    double lo = 1.0 / best;
    double hi = lo + budget;
    while (filled(hi) < budget) {
        hi = lo + 2.0 * (hi - lo);
    }
    while (hi - lo > 1e-10 * budget) {
        const double mid = 0.5 * (lo + hi);
        (filled(mid) < budget ? lo : hi) = mid;
    }
    double level = 0.5 * (lo + hi);
    for (int pass = 0; pass < 4; ++pass) {
        double inv_sum = 0.0;
        int active = 0;
        for (double a : gain_to_noise) {
            if (a > 0.0 && level - 1.0 / a > 0.0) {
                inv_sum += 1.0 / a;
                ++active;
            }
        }
        const double exact = (budget + inv_sum) / active;
        if (exact == level) {
            break;
        }
        level = exact;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double a = gain_to_noise[i];
        q[i] = a > 0.0 ? std::max(0.0, level - 1.0 / a) : 0.0;
    }
    return q;
}

void allocate_power(ZfPrecoder& precoder, std::span<const double> noise_plus_interference, double budget,
                    PowerMode mode)
{
    const Eigen::Index s = precoder.streams();
    if (static_cast<Eigen::Index>(noise_plus_interference.size()) != s) {
        throw ConfigError("allocate_power: one noise level per stream required");
    }
    if (!(budget > 0.0)) {
        throw ConfigError("allocate_power: budget must be positive");
    }
    precoder.powers = RVec::Zero(s);
    if (s == 0) {
        return;
    }
    if (!(precoder.gains.maxCoeff() > 0.0)) {
        throw ConfigError("allocate_power: all effective gains are zero");
    }
    if (mode == PowerMode::Equal) {
        const double share = budget / static_cast<double>(s);
        precoder.powers = precoder.gains * share;
        return;
    }
    std::vector<double> a(static_cast<std::size_t>(s));
    for (Eigen::Index i = 0; i < s; ++i) {
        a[static_cast<std::size_t>(i)] = precoder.gains(i) / noise_plus_interference[static_cast<std::size_t>(i)];
    }
    const std::vector<double> q = water_fill(a, budget);
    for (Eigen::Index i = 0; i < s; ++i) {
        precoder.powers(i) = precoder.gains(i) * q[static_cast<std::size_t>(i)];
    }
}

} // namespace jsdm
