// SPDX-License-Identifier: Apache-2.0
#include "jsdm/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace jsdm {

double alpha_step_up(double alpha, double step)
{
    const double next = alpha + step;
    return next < 1.0 ? next : alpha;
}

double alpha_step_down(double alpha, double step, double alpha_min)
{
    return std::max(alpha - step, alpha_min);
}

RrRoundResult rr_round(std::span<const GroupProfile> groups, const BatchSource& source, double rho,
                       const RrParams& params)
{
    if (!(params.delta_alpha > 0.0) || params.alpha_init < params.alpha_min || params.alpha_init >= 1.0) {
        throw ConfigError("rr_round: need delta_alpha > 0 and alpha_init in [alpha_min, 1)");
    }
    const std::size_t G = groups.size();
    RrRoundResult out;
    std::vector<std::vector<char>> pool(G);
    std::vector<long> remaining(G);
    std::vector<long> group_budget(G);
    std::vector<long> group_intervals(G, 0);
    std::vector<double> alpha(G, params.alpha_init);
    const long per_user = 2 + static_cast<long>(std::ceil(1.0 / params.delta_alpha));
    for (std::size_t g = 0; g < G; ++g) {
        const auto K = static_cast<std::size_t>(groups[g].users());
        pool[g].assign(K, 1);
        remaining[g] = static_cast<long>(K);
        group_budget[g] = static_cast<long>(K) * per_user;
        out.interval_budget = std::max(out.interval_budget, group_budget[g]);
        out.service_count.emplace_back(K, 0);
        out.served_at.emplace_back(K, -1);
        out.served_nats.emplace_back(K, 0.0);
        out.alpha_trace.emplace_back();
    }

    auto busy = [&] { return std::any_of(remaining.begin(), remaining.end(), [](long r) { return r > 0; }); };
    for (long t = 0; busy(); ++t) {
        const ChannelBatch batch = source(t);
        ScheduleOutcome outcome;
        for (std::size_t g = 0; g < G; ++g) {
            if (remaining[g] == 0) {
                outcome.groups.emplace_back();
                continue;
            }
            RedosOptions opt;
            opt.eligible = pool[g];
            opt.index_only_reports = true;
            outcome.groups.push_back(redos_select_group(batch.groups[g], alpha[g], rho, opt));
        }
        const std::vector<CMat> tx = zf_transmissions(batch, outcome, rho, PowerMode::Equal);
        const RateReport rates = evaluate_rates(batch, outcome, tx, true);
        for (std::size_t g = 0; g < G; ++g) {
            if (remaining[g] == 0) {
                continue;
            }
            const auto& sched = outcome.groups[g];
            out.alpha_trace[g].push_back(alpha[g]);
            out.feedback += tally_feedback(sched, FeedbackScheme::Redos, groups[g].served_beams(), groups[g].users());
            for (std::size_t i = 0; i < sched.size(); ++i) {
                const auto k = static_cast<std::size_t>(sched.users[i]);
                pool[g][k] = 0;
                --remaining[g];
                ++out.service_count[g][k];
                out.served_at[g][k] = t;
                out.served_nats[g][k] = rates.user_nats[g][i];
            }
            alpha[g] = static_cast<int>(sched.size()) < groups[g].served_beams()
                           ? alpha_step_down(alpha[g], params.delta_alpha, params.alpha_min)
                           : alpha_step_up(alpha[g], params.delta_alpha);
            if (++group_intervals[g] > group_budget[g] && remaining[g] > 0) {
                throw InvariantError("rr_round: group " + std::to_string(g) + " exceeded its interval budget");
            }
        }
        out.intervals = t + 1;
    }
    return out;
}

FairnessState FairnessState::init(std::span<const GroupProfile> groups, const PfParams& params)
{
    if (!(params.mu_init > 0.0) || !(params.delta > 0.0 && params.delta <= 1.0)) {
        throw ConfigError("pf: need mu_init > 0 and delta in (0, 1]");
    }
    if (params.alpha_init < params.alpha_min || params.alpha_init >= 1.0) {
        throw ConfigError("pf: alpha_init must lie in [alpha_min, 1)");
    }
    FairnessState s;
    for (const auto& g : groups) {
        const auto K = static_cast<std::size_t>(g.users());
        s.mu.emplace_back(K, params.mu_init);
        s.alpha.emplace_back(K, params.alpha_init);
        s.served.emplace_back(K, 0);
    }
    return s;
}

PfIntervalResult pf_interval(FairnessState& state, const ChannelBatch& batch, double rho, const PfParams& params)
{
    if (state.mu.size() != batch.groups.size()) {
        throw ConfigError("pf_interval: state and batch disagree on the group count");
    }
    PfIntervalResult out;
    for (std::size_t g = 0; g < batch.groups.size(); ++g) {
        const auto& group = batch.groups[g];
        if (params.scheduler == PfScheduler::Redos) {
            RedosOptions opt;
            opt.user_alpha = state.alpha[g];
            opt.score_weight = state.mu[g];
            out.outcome.groups.push_back(redos_select_group(group, 0.0, rho, opt));
        } else {
            out.outcome.groups.push_back(
                sus_select_group(group, params.gamma, rho, SusCriterion::QuasiSinr, state.mu[g]));
        }
    }
    const std::vector<CMat> tx = zf_transmissions(batch, out.outcome, rho, PowerMode::Equal);
    out.rates = evaluate_rates(batch, out.outcome, tx, true);

    for (std::size_t g = 0; g < batch.groups.size(); ++g) {
        const auto& sched = out.outcome.groups[g];
        const int beams = batch.groups[g].served_beams;
        const int users = batch.groups[g].users();
        out.feedback += tally_feedback(sched,
                                       params.scheduler == PfScheduler::Redos ? FeedbackScheme::Redos
                                                                              : FeedbackScheme::Sus,
                                       beams, users);
        std::vector<double> rate(static_cast<std::size_t>(users), 0.0);
        std::vector<char> served(static_cast<std::size_t>(users), 0);
        for (std::size_t i = 0; i < sched.size(); ++i) {
            const auto k = static_cast<std::size_t>(sched.users[i]);
            rate[k] = out.rates.user_nats[g][i];
            served[k] = 1;
        }
        for (std::size_t k = 0; k < static_cast<std::size_t>(users); ++k) {
            double& mu = state.mu[g][k];
            mu = std::max((1.0 - params.delta) * mu + params.delta * rate[k], kMuFloor);
            if (served[k]) {
                ++state.served[g][k];
            }
            if (params.adaptive) {
                double& a = state.alpha[g][k];
                a = served[k] ? alpha_step_up(a, params.delta_up)
                              : alpha_step_down(a, params.delta_down, params.alpha_min);
            }
        }
    }
    return out;
}

} // namespace jsdm
