// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "jsdm/channel_model.hpp"
#include "jsdm/types.hpp"

namespace jsdm {

/// Relative slack of the cone test, absorbing rounding in |g_i|^2 / ||g||^2.
inline constexpr double kConeSlack = 1e-12;
/// Scores closer than this (relative) are ties, won by the lower user index.
inline constexpr double kTieTolerance = 1e-12;

/// 1/sqrt(r*): the smallest cone parameter for which every nonzero effective
/// channel falls in at least one cone.
double alpha_min(int served_beams);

/// { i : |g_i| / ||g|| >= alpha } (0-based). Empty for the zero vector.
std::vector<int> candidate_set(const CVec& g, double alpha);

/// ||g||^2 / (1/rho + r* * intergroup_power).
double quasi_sinr(double norm2, double intergroup_power, double rho, int served_beams);

/// One uplink report. `has_value` is false for index-only reports.
struct CqiReport {
    int user = 0;
    int beam = 0;
    double value = 0.0;
    bool has_value = true;
};

/// Selection result for one group.
struct GroupSchedule {
    std::vector<int> users;           ///< selected users, in slot order
    std::vector<int> beams;           ///< reference beam of each selected user (-1 when not beam-bound)
    std::vector<int> candidate_sizes; ///< |W_{g,i}| per reference beam (empty for non-cone schemes)
    std::vector<CqiReport> reports;   ///< every report filed this interval

    std::size_t size() const noexcept { return users.size(); }
    int value_reports() const noexcept;
    int index_only_reports() const noexcept;
};

struct ScheduleOutcome {
    std::vector<GroupSchedule> groups;
};

/// s x r* matrix whose row i is the i-th selected user's g^H.
CMat selected_channels(const GroupChannels& group, std::span<const int> users);

/// Knobs of the ReDOS-PBR user side and base-station argmax, shared by the
/// plain scheme and the fairness wrappers.
struct RedosOptions {
    /// Per-user cone parameter; empty means the scalar alpha for everyone.
    std::span<const double> user_alpha;
    /// Users allowed to report (nonzero = eligible); empty means all.
    std::span<const char> eligible;
    /// When nonempty the BS ranks log(1 + quasi-SINR) / weight[k] instead of
    /// the quasi-SINR itself.
    std::span<const double> score_weight;
    /// Users failing the cone test still report their best beam index.
    bool index_only_reports = false;
};

GroupSchedule redos_select_group(const GroupChannels& group, double alpha, double rho,
                                 const RedosOptions& options = {});
ScheduleOutcome redos_select(const ChannelBatch& batch, double alpha, double rho);

/// RBF SINR of a user on its best beam when every beam carries power rho.
double rbf_sinr(double peak2, double norm2, double intergroup_power, double rho);

GroupSchedule rbf_select_group(const GroupChannels& group, double rho);
ScheduleOutcome rbf_select(const ChannelBatch& batch, double rho);

enum class SusCriterion { Norm, QuasiSinr };

/// Greedy semi-orthogonal selection on the effective channels. After each
/// pick only users with coherence <= gamma to every selected user remain.
/// `score_weight` has the same meaning as in RedosOptions.
GroupSchedule sus_select_group(const GroupChannels& group, double gamma, double rho, SusCriterion criterion,
                               std::span<const double> score_weight = {});
ScheduleOutcome sus_select(const ChannelBatch& batch, double gamma, double rho, SusCriterion criterion);

struct DpcSelection {
    std::vector<int> columns; ///< selected columns of the channel matrix, in order
    RVec r_diag;              ///< |R_ii| of the QR factor in selection order
    double rate_nats = 0.0;   ///< sum_i log(1 + rho r_ii^2)
};

/// Greedy QR/DPC selection over the columns of H (M x N). Each step appends
/// the column with the largest residual after projecting out the selected
/// span; stops at max_streams or when no column improves the rate.
DpcSelection greedy_dpc(const CMat& H, double rho, int max_streams);

/// DPC rate of an explicit ordered column subset.
double dpc_rate(const CMat& H, std::span<const int> columns, double rho);

struct DpcOutcome {
    std::vector<std::pair<int, int>> users; ///< (group, user) in selection order
    double rate_nats = 0.0;
};

/// Greedy DPC over every user of every group on the full channels, with
/// up to sum_g r_g* streams at power rho each.
DpcOutcome greedy_dpc_select(const ChannelBatch& batch, double rho);

} // namespace jsdm
