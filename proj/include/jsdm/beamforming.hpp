// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "jsdm/channel_model.hpp"
#include "jsdm/types.hpp"

namespace jsdm {

struct BdGroupReport {
    int group = 0;
    double residual = 0.0; ///< max over g' != g of max |(U_g*)^H V_g'|
    bool pass = false;
};

/// Approximate block-diagonalization check between the groups' served
/// subspaces U_g* and the other groups' pre-beamformers.
std::vector<BdGroupReport> check_approx_bd(std::span<const GroupProfile> groups, double tol);

/// Zero-forcing second stage for one group.
struct ZfPrecoder {
    CMat directions; ///< r* x s, G^H (G G^H)^{-1}; columns not yet power scaled
    RVec gains;      ///< gamma_i = 1 / [(G G^H)^{-1}]_ii
    RVec powers;     ///< P_i; empty until allocate_power
    double condition = 1.0;

    Eigen::Index streams() const noexcept { return directions.cols(); }
    /// directions * diag(sqrt(P)); requires powers.
    CMat scaled() const;
};

inline constexpr double kMaxZfCondition = 1e8;
inline constexpr double kCholeskyCondition = 1e6;

/// ZF precoder for the s x r* matrix whose rows are the selected users'
/// effective channels g_i^H. Throws RankDeficientError when the condition
/// number reaches kMaxZfCondition or s > r*.
ZfPrecoder zf_precoder(const CMat& selected);

/// max(0, 1 - (r* - 1) 2 alpha sqrt(1 - alpha^2)): certified fraction of
/// ||g_i||^2 kept as ZF gain for users drawn from distinct reference cones.
/// Throws ConfigError for alpha < 1/sqrt(2) (the cone bound is vacuous there).
double gershgorin_gain_bound(double alpha, int served_beams);

enum class PowerMode { Equal, WaterFill };

/// Sets precoder.powers. The constraint is sum_i P_i / gamma_i <= budget.
///   Equal:     P_i / gamma_i = budget / s.
///   WaterFill: maximizes sum log(1 + P_i / N_i) with the constraint tight.
void allocate_power(ZfPrecoder& precoder, std::span<const double> noise_plus_interference, double budget,
                    PowerMode mode);

/// Water level solution of max sum log(1 + a_i q_i), sum q_i = budget,
/// q >= 0. Returns q.
std::vector<double> water_fill(std::span<const double> gain_to_noise, double budget);

} // namespace jsdm
