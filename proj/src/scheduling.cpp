// SPDX-License-Identifier: Apache-2.0
#include "jsdm/scheduling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "jsdm/kernels/kernels.hpp"

namespace jsdm {

namespace {

struct Energy {
    std::vector<double> norm2;
    std::vector<double> peak2;
    std::vector<std::int32_t> peak;
};

Energy user_energy(const GroupChannels& group)
{
    const auto n = static_cast<std::size_t>(group.users());
    Energy e{std::vector<double>(n), std::vector<double>(n), std::vector<std::int32_t>(n)};
    if (n > 0) {
        kernels::active().user_energy(group.effective_view(), e.norm2.data(), e.peak2.data(), e.peak.data());
    }
    return e;
}

bool beats(double score, double best)
{
    return score > best + kTieTolerance * std::abs(best);
}

/// Fills `out.users/beams` with the per-beam winners in beam order.
void pick_per_beam(std::span<const int> winner, GroupSchedule& out)
{
    for (std::size_t i = 0; i < winner.size(); ++i) {
        if (winner[i] >= 0) {
            out.users.push_back(winner[i]);
            out.beams.push_back(static_cast<int>(i));
        }
    }
}

} // namespace

double alpha_min(int served_beams)
{
    if (served_beams < 1) {
        throw ConfigError("alpha_min: served beams must be positive");
    }
    return 1.0 / std::sqrt(static_cast<double>(served_beams));
}

std::vector<int> candidate_set(const CVec& g, double alpha)
{
    std::vector<int> out;
    const double norm2 = g.squaredNorm();
    if (!(norm2 > 0.0)) {
        return out;
    }
    const double threshold = alpha * alpha * norm2 * (1.0 - kConeSlack);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        if (std::norm(g(i)) >= threshold) {
            out.push_back(static_cast<int>(i));
        }
    }
    return out;
}

double quasi_sinr(double norm2, double intergroup_power, double rho, int served_beams)
{
    return norm2 / (1.0 / rho + served_beams * intergroup_power);
}

int GroupSchedule::value_reports() const noexcept
{
    return static_cast<int>(std::count_if(reports.begin(), reports.end(), [](const CqiReport& r) { return r.has_value; }));
}

int GroupSchedule::index_only_reports() const noexcept
{
    return static_cast<int>(reports.size()) - value_reports();
}

CMat selected_channels(const GroupChannels& group, std::span<const int> users)
{
    CMat out(static_cast<Eigen::Index>(users.size()), group.served_beams);
    for (std::size_t i = 0; i < users.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = group.effective(users[i]).adjoint();
    }
    return out;
}

GroupSchedule redos_select_group(const GroupChannels& group, double alpha, double rho, const RedosOptions& options)
{
    const int users = group.users();
    const int beams = group.served_beams;
    const Energy e = user_energy(group);
    GroupSchedule out;
    out.candidate_sizes.assign(static_cast<std::size_t>(beams), 0);
    std::vector<int> winner(static_cast<std::size_t>(beams), -1);
    std::vector<double> best(static_cast<std::size_t>(beams), -std::numeric_limits<double>::infinity());

    for (int k = 0; k < users; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        if (!options.eligible.empty() && !options.eligible[uk]) {
            continue;
        }
        if (!(e.norm2[uk] > 0.0)) {
            continue;
        }
        const double a = options.user_alpha.empty() ? alpha : options.user_alpha[uk];
        const int beam = e.peak[uk];
        if (e.peak2[uk] < a * a * e.norm2[uk] * (1.0 - kConeSlack)) {
            if (options.index_only_reports) {
                out.reports.push_back({k, beam, 0.0, false});
            }
            continue;
        }
        const double q = quasi_sinr(e.norm2[uk], group.intergroup_power(k), rho, beams);
        out.reports.push_back({k, beam, q, true});
        ++out.candidate_sizes[static_cast<std::size_t>(beam)];
        const double score = options.score_weight.empty() ? q : std::log1p(q) / options.score_weight[uk];
        auto& slot = best[static_cast<std::size_t>(beam)];
        if (winner[static_cast<std::size_t>(beam)] < 0 || beats(score, slot)) {
            slot = score;
            winner[static_cast<std::size_t>(beam)] = k;
        }
    }
    pick_per_beam(winner, out);
    return out;
}

ScheduleOutcome redos_select(const ChannelBatch& batch, double alpha, double rho)
{
    ScheduleOutcome out;
    for (const auto& g : batch.groups) {
        out.groups.push_back(redos_select_group(g, alpha, rho));
    }
    return out;
}

double rbf_sinr(double peak2, double norm2, double intergroup_power, double rho)
{
    return rho * peak2 / (1.0 + rho * (norm2 - peak2) + rho * intergroup_power);
}

GroupSchedule rbf_select_group(const GroupChannels& group, double rho)
{
    const int beams = group.served_beams;
    const Energy e = user_energy(group);
    GroupSchedule out;
    std::vector<int> winner(static_cast<std::size_t>(beams), -1);
    std::vector<double> best(static_cast<std::size_t>(beams), 0.0);
    for (int k = 0; k < group.users(); ++k) {
        const auto uk = static_cast<std::size_t>(k);
        if (!(e.norm2[uk] > 0.0)) {
            continue;
        }
        const int beam = e.peak[uk];
        const double sinr = rbf_sinr(e.peak2[uk], e.norm2[uk], group.intergroup_power(k), rho);
        out.reports.push_back({k, beam, sinr, true});
        const auto ub = static_cast<std::size_t>(beam);
        if (winner[ub] < 0 || beats(sinr, best[ub])) {
            best[ub] = sinr;
            winner[ub] = k;
        }
    }
    pick_per_beam(winner, out);
    return out;
}

ScheduleOutcome rbf_select(const ChannelBatch& batch, double rho)
{
    ScheduleOutcome out;
    for (const auto& g : batch.groups) {
        out.groups.push_back(rbf_select_group(g, rho));
    }
    return out;
}

GroupSchedule sus_select_group(const GroupChannels& group, double gamma, double rho, SusCriterion criterion,
                               std::span<const double> score_weight)
{
    const int users = group.users();
    const int beams = group.served_beams;
    const Energy e = user_energy(group);
    std::vector<double> score(static_cast<std::size_t>(users));
    std::vector<int> pool;
    for (int k = 0; k < users; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        double s = criterion == SusCriterion::Norm ? e.norm2[uk]
                                                   : quasi_sinr(e.norm2[uk], group.intergroup_power(k), rho, beams);
        if (!score_weight.empty()) {
            s = std::log1p(s) / score_weight[uk];
        }
        score[uk] = s;
        if (e.norm2[uk] > 0.0) {
            pool.push_back(k);
        }
    }

    GroupSchedule out;
    const auto view = group.effective_view();
    std::vector<double> coherence(static_cast<std::size_t>(users));
    const double gamma2 = gamma * gamma;
    while (!pool.empty() && static_cast<int>(out.users.size()) < beams) {
        int pick = pool.front();
        for (int k : pool) {
            if (beats(score[static_cast<std::size_t>(k)], score[static_cast<std::size_t>(pick)])) {
                pick = k;
            }
        }
        out.users.push_back(pick);
        out.beams.push_back(-1);

        // Probe with g_pick: coherence[k] = |g_pick^H g_k|^2.
        const auto up = static_cast<std::size_t>(pick);
        std::vector<double> q_re(static_cast<std::size_t>(beams));
        std::vector<double> q_im(static_cast<std::size_t>(beams));
        for (int j = 0; j < beams; ++j) {
            const std::size_t at = static_cast<std::size_t>(j) * static_cast<std::size_t>(users) + up;
            q_re[static_cast<std::size_t>(j)] = group.effective_re[at];
            q_im[static_cast<std::size_t>(j)] = group.effective_im[at];
        }
        kernels::active().projection_power(view, q_re.data(), q_im.data(), coherence.data());
        std::erase_if(pool, [&](int k) {
            const auto uk = static_cast<std::size_t>(k);
            return k == pick || coherence[uk] > gamma2 * e.norm2[up] * e.norm2[uk];
        });
    }
    return out;
}

ScheduleOutcome sus_select(const ChannelBatch& batch, double gamma, double rho, SusCriterion criterion)
{
    ScheduleOutcome out;
    for (const auto& g : batch.groups) {
        out.groups.push_back(sus_select_group(g, gamma, rho, criterion));
    }
    return out;
}

DpcSelection greedy_dpc(const CMat& H, double rho, int max_streams)
{
    const Eigen::Index n = H.cols();
    DpcSelection out;
    CMat residual = H;
    RVec norm2 = residual.colwise().squaredNorm().transpose();
    const double floor = 1e-12 * (n > 0 ? norm2.maxCoeff() : 0.0);
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    std::vector<double> diag;
    const int limit = static_cast<int>(std::min<Eigen::Index>(max_streams, H.rows()));
    while (static_cast<int>(out.columns.size()) < limit) {
        Eigen::Index pick = -1;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!used[static_cast<std::size_t>(j)] && (pick < 0 || beats(norm2(j), norm2(pick)))) {
                pick = j;
            }
        }
        // log(1 + rho r^2) > 0 iff the residual is nonzero.
        if (pick < 0 || !(norm2(pick) > floor)) {
            break;
        }
        const double r = std::sqrt(norm2(pick));
        const CVec q = residual.col(pick) / r;
        used[static_cast<std::size_t>(pick)] = 1;
        out.columns.push_back(static_cast<int>(pick));
        diag.push_back(r);
        out.rate_nats += std::log1p(rho * r * r);
        residual -= q * (q.adjoint() * residual);
        norm2 = residual.colwise().squaredNorm().transpose();
    }
    out.r_diag = Eigen::Map<const RVec>(diag.data(), static_cast<Eigen::Index>(diag.size()));
    return out;
}

double dpc_rate(const CMat& H, std::span<const int> columns, double rho)
{
    if (columns.empty()) {
        return 0.0;
    }
    CMat sub(H.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t i = 0; i < columns.size(); ++i) {
        sub.col(static_cast<Eigen::Index>(i)) = H.col(columns[i]);
    }
    Eigen::HouseholderQR<CMat> qr(sub);
    const CMat R = qr.matrixQR().triangularView<Eigen::Upper>();
    double rate = 0.0;
    for (Eigen::Index i = 0; i < std::min(R.rows(), R.cols()); ++i) {
        rate += std::log1p(rho * std::norm(R(i, i)));
    }
    return rate;
}

DpcOutcome greedy_dpc_select(const ChannelBatch& batch, double rho)
{
    Eigen::Index total = 0;
    for (const auto& g : batch.groups) {
        total += g.users();
    }
    DpcOutcome out;
    if (batch.groups.empty() || total == 0) {
        return out;
    }
    CMat H(batch.groups.front().h.rows(), total);
    std::vector<std::pair<int, int>> owner;
    owner.reserve(static_cast<std::size_t>(total));
    Eigen::Index at = 0;
    for (std::size_t gi = 0; gi < batch.groups.size(); ++gi) {
        const auto& g = batch.groups[gi];
        H.middleCols(at, g.users()) = g.h;
        at += g.users();
        for (int k = 0; k < g.users(); ++k) {
            owner.emplace_back(static_cast<int>(gi), k);
        }
    }
    const DpcSelection sel = greedy_dpc(H, rho, batch.total_beams);
    for (int c : sel.columns) {
        out.users.push_back(owner[static_cast<std::size_t>(c)]);
    }
    out.rate_nats = sel.rate_nats;
    return out;
}

} // namespace jsdm
