// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "jsdm/channel_model.hpp"
#include "jsdm/metrics.hpp"
#include "jsdm/scheduling.hpp"

namespace jsdm {

/// Produces the channel draw of scheduling interval t.
using BatchSource = std::function<ChannelBatch(long interval)>;

struct RrParams {
    double alpha_init = 0.9;
    double alpha_min = 0.5;
    double delta_alpha = 0.05;
};

struct RrRoundResult {
    long intervals = 0;
    long interval_budget = 0;
    std::vector<std::vector<int>> service_count;  ///< per group, per user
    std::vector<std::vector<long>> served_at;     ///< interval in which each user was served
    std::vector<std::vector<double>> served_nats; ///< rate obtained when served
    std::vector<std::vector<double>> alpha_trace; ///< per group, alpha used in each interval
    FeedbackTally feedback;
};

/// One round-robin round: intervals repeat until every user of every group has
/// been served once. Unserved users whose cone test fails still report their
/// beam index. alpha_g moves down by delta_alpha after an interval that filled
/// fewer than r* slots and up otherwise; a step below alpha_min lands on
/// alpha_min and a step reaching 1 is not taken. Throws InvariantError when
/// a group exceeds |K_g| (2 + ceil(1 / delta_alpha)) intervals.
RrRoundResult rr_round(std::span<const GroupProfile> groups, const BatchSource& source, double rho,
                       const RrParams& params);

enum class PfScheduler { Redos, Sus };

struct PfParams {
    PfScheduler scheduler = PfScheduler::Redos;
    double alpha_min = 0.5;
    double alpha_init = 0.5;
    bool adaptive = true;
    double delta_up = 0.1;
    double delta_down = 0.002;
    double delta = 0.01;   ///< averaging factor of the rate tracker
    double mu_init = 0.1;
    double gamma = 0.4;    ///< hyperslab for the Sus scheduler
};

/// mu never drops below this, so the PF ratio stays finite.
inline constexpr double kMuFloor = 1e-12;

struct FairnessState {
    std::vector<std::vector<double>> mu;     ///< tracked average served rate [nats]
    std::vector<std::vector<double>> alpha;  ///< per-user cone parameter
    std::vector<std::vector<long>> served;   ///< number of intervals served

    static FairnessState init(std::span<const GroupProfile> groups, const PfParams& params);
};

struct PfIntervalResult {
    ScheduleOutcome outcome;
    RateReport rates;
    FeedbackTally feedback;
};

/// One proportional-fair interval. Users rank by log(1 + quasi-SINR) / mu;
/// served users' mu tracks the realized Equal-power ZF rate, everyone else's
/// decays by (1 - delta). Adaptive alpha rises by delta_up on service and
/// falls by delta_down otherwise, clamped to [alpha_min, 1).
PfIntervalResult pf_interval(FairnessState& state, const ChannelBatch& batch, double rho, const PfParams& params);

/// Clamped alpha steps shared by both wrappers.
double alpha_step_up(double alpha, double step);
double alpha_step_down(double alpha, double step, double alpha_min);

} // namespace jsdm
