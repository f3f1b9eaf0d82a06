// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "jsdm/beamforming.hpp"
#include "jsdm/channel_model.hpp"
#include "jsdm/scheduling.hpp"

namespace jsdm {

/// Intra-group leakage allowed under ZF, relative to the signal power.
inline constexpr double kZfLeakTolerance = 1e-9;

/// Builds the ZF transmission of every group in `outcome`: Equal power
/// (P_i / gamma_i = rho), or one water-filling round whose noise levels are
/// measured from the Equal transmission. A selection that is numerically
/// rank deficient loses its strongest offending user until ZF succeeds; the
/// dropped users are removed from `outcome`. Budget per group is |S_g| rho.
std::vector<CMat> zf_transmissions(const ChannelBatch& batch, ScheduleOutcome& outcome, double rho, PowerMode mode);

/// Plain beam transmission: the selected slot's unit vector scaled by sqrt(rho).
std::vector<CMat> beam_transmissions(const ChannelBatch& batch, const ScheduleOutcome& outcome, double rho);

struct RateReport {
    std::vector<std::vector<double>> user_nats; ///< per group, per selected user (slot order)
    double sum_nats = 0.0;
    double sum_bits() const noexcept;
};

/// Rates under the full two-stage signal model. `transmissions[g]` is the
/// r_g* x |S_g| second-stage matrix whose column i serves the i-th selected
/// user. Inter-group interference is measured through the other groups'
/// realized V_g' X_g'. With `zero_forcing` the intra-group leakage is checked
/// against kZfLeakTolerance (InvariantError otherwise) and then dropped.
RateReport evaluate_rates(const ChannelBatch& batch, const ScheduleOutcome& outcome,
                          std::span<const CMat> transmissions, bool zero_forcing);

enum class FeedbackScheme { Redos, Rbf, Sus };

struct FeedbackTally {
    long integers = 0; ///< beam indices
    long reals = 0;    ///< CQI values and CSI (a complex entry counts twice)

    /// One real counts 1; an integer counts `integer_weight`.
    double units(double integer_weight = 1.0) const noexcept
    {
        return static_cast<double>(reals) + integer_weight * static_cast<double>(integers);
    }
    FeedbackTally& operator+=(const FeedbackTally& o) noexcept
    {
        integers += o.integers;
        reals += o.reals;
        return *this;
    }
};

/// Uplink cost of one group's interval.
///   Redos: one integer per report (index-only ones included), one real per
///          valued report, then 2 r* reals of CSI per selected user.
///   Rbf:   one integer and one real per report.
///   Sus:   2 r* reals from every user of the group.
FeedbackTally tally_feedback(const GroupSchedule& schedule, FeedbackScheme scheme, int served_beams,
                             int group_users);

} // namespace jsdm
