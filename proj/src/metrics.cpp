// SPDX-License-Identifier: Apache-2.0
#include "jsdm/metrics.hpp"

#include <cmath>
#include <string>

namespace jsdm {

namespace {

/// ZF for one group, dropping offenders until the selection is well conditioned.
ZfPrecoder robust_zf(const GroupChannels& group, GroupSchedule& schedule)
{
    for (;;) {
        try {
            return zf_precoder(selected_channels(group, schedule.users));
        } catch (const RankDeficientError& e) {
            const auto drop = static_cast<std::size_t>(e.offending_rows().empty() ? schedule.users.size() - 1
                                                                                  : e.offending_rows().front());
            schedule.users.erase(schedule.users.begin() + static_cast<std::ptrdiff_t>(drop));
            schedule.beams.erase(schedule.beams.begin() + static_cast<std::ptrdiff_t>(drop));
        }
    }
}

double interference(const ChannelBatch& batch, std::span<const CMat> tx, std::size_t g, int user)
{
    double total = 0.0;
    for (std::size_t o = 0; o < batch.groups.size(); ++o) {
        if (o == g || tx[o].cols() == 0) {
            continue;
        }
        const auto& proj = batch.groups[g].projections;
        const int rows = batch.groups[o].served_beams;
        total += (proj.col(user).segment(batch.beam_offsets[o], rows).adjoint() * tx[o]).squaredNorm();
    }
    return total;
}

} // namespace

std::vector<CMat> zf_transmissions(const ChannelBatch& batch, ScheduleOutcome& outcome, double rho, PowerMode mode)
{
    if (outcome.groups.size() != batch.groups.size()) {
        throw ConfigError("zf_transmissions: outcome and batch disagree on the group count");
    }
    std::vector<ZfPrecoder> zf;
    std::vector<CMat> tx;
    for (std::size_t g = 0; g < batch.groups.size(); ++g) {
        zf.push_back(robust_zf(batch.groups[g], outcome.groups[g]));
        const auto s = zf.back().streams();
        if (s > 0) {
            std::vector<double> ones(static_cast<std::size_t>(s), 1.0);
            allocate_power(zf.back(), ones, static_cast<double>(s) * rho, PowerMode::Equal);
            tx.push_back(zf.back().scaled());
        } else {
            tx.emplace_back(batch.groups[g].served_beams, 0);
        }
    }
    if (mode == PowerMode::Equal) {
        return tx;
    }
    std::vector<CMat> refined = tx;
    for (std::size_t g = 0; g < batch.groups.size(); ++g) {
        const auto s = zf[g].streams();
        if (s == 0) {
            continue;
        }
        std::vector<double> noise;
        for (int user : outcome.groups[g].users) {
            noise.push_back(1.0 + interference(batch, tx, g, user));
        }
        allocate_power(zf[g], noise, static_cast<double>(s) * rho, PowerMode::WaterFill);
        refined[g] = zf[g].scaled();
    }
    return refined;
}

std::vector<CMat> beam_transmissions(const ChannelBatch& batch, const ScheduleOutcome& outcome, double rho)
{
    std::vector<CMat> tx;
    for (std::size_t g = 0; g < batch.groups.size(); ++g) {
        const auto& sched = outcome.groups[g];
        CMat x = CMat::Zero(batch.groups[g].served_beams, static_cast<Eigen::Index>(sched.size()));
        for (std::size_t i = 0; i < sched.size(); ++i) {
            if (sched.beams[i] < 0) {
                throw ConfigError("beam_transmissions: selection is not bound to reference beams");
            }
            x(sched.beams[i], static_cast<Eigen::Index>(i)) = std::sqrt(rho);
        }
        tx.push_back(std::move(x));
    }
    return tx;
}

double RateReport::sum_bits() const noexcept
{
    return sum_nats / std::log(2.0);
}

RateReport evaluate_rates(const ChannelBatch& batch, const ScheduleOutcome& outcome,
                          std::span<const CMat> transmissions, bool zero_forcing)
{
    if (transmissions.size() != batch.groups.size() || outcome.groups.size() != batch.groups.size()) {
        throw ConfigError("evaluate_rates: one transmission and schedule per group required");
    }
    RateReport out;
    for (std::size_t g = 0; g < batch.groups.size(); ++g) {
        const auto& sched = outcome.groups[g];
        const CMat& x = transmissions[g];
        if (x.cols() != static_cast<Eigen::Index>(sched.size())) {
            throw ConfigError("evaluate_rates: missing precoder for group " + std::to_string(g));
        }
        std::vector<double> rates;
        for (std::size_t i = 0; i < sched.size(); ++i) {
            const int user = sched.users[i];
            const Eigen::RowVectorXcd seen = batch.groups[g].effective(user).adjoint() * x;
            const double signal = std::norm(seen(static_cast<Eigen::Index>(i)));
            const double intra = seen.squaredNorm() - signal;
            double noise = 1.0 + interference(batch, transmissions, g, user);
            if (zero_forcing && x.col(static_cast<Eigen::Index>(i)).squaredNorm() == 0.0) {
                // Water-filling switched this stream off; nothing is received.
                rates.push_back(0.0);
                continue;
            }
            if (zero_forcing) {
                if (intra > kZfLeakTolerance * signal) {
                    throw InvariantError("ZF leakage " + std::to_string(intra) + " exceeds tolerance");
                }
            } else {
                noise += intra;
            }
            rates.push_back(std::log1p(signal / noise));
            out.sum_nats += rates.back();
        }
        out.user_nats.push_back(std::move(rates));
    }
    return out;
}

FeedbackTally tally_feedback(const GroupSchedule& schedule, FeedbackScheme scheme, int served_beams,
                             int group_users)
{
    FeedbackTally t;
    switch (scheme) {
    case FeedbackScheme::Redos:
        t.integers = static_cast<long>(schedule.reports.size());
        t.reals = schedule.value_reports() + 2L * served_beams * static_cast<long>(schedule.size());
        break;
    case FeedbackScheme::Rbf:
        t.integers = static_cast<long>(schedule.reports.size());
        t.reals = static_cast<long>(schedule.reports.size());
        break;
    case FeedbackScheme::Sus:
        t.reals = 2L * served_beams * group_users;
        break;
    }
    return t;
}

} // namespace jsdm
