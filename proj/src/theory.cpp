// SPDX-License-Identifier: Apache-2.0
#include "jsdm/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jsdm/kernels/kernels.hpp"
#include "jsdm/rng.hpp"

namespace jsdm {

double alpha_bar_lower(int served_beams)
{
    if (served_beams < 2) {
        throw ConfigError("alpha_bar_lower: needs r* >= 2");
    }
    const double r = served_beams;
    return std::sqrt((1.0 + std::sqrt((r - 2.0) / (r - 1.0))) / 2.0);
}

double cone_pair_bound(double alpha)
{
    if (alpha < 1.0 / std::sqrt(2.0) - 1e-15 || alpha > 1.0) {
        throw ConfigError("cone_pair_bound: alpha must lie in [1/sqrt(2), 1]");
    }
    return 2.0 * alpha * std::sqrt(std::max(0.0, 1.0 - alpha * alpha));
}

CVec sample_in_cone(CounterRng& rng, int served_beams, int cone, double alpha, long budget)
{
    if (cone < 0 || cone >= served_beams) {
        throw ConfigError("sample_in_cone: cone index out of range");
    }
    CVec x(served_beams);
    for (long n = 0; n < budget; ++n) {
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            x(j) = rng.complex_normal();
        }
        const double n2 = x.squaredNorm();
        if (std::norm(x(cone)) >= alpha * alpha * n2) {
            return x / std::sqrt(n2);
        }
    }
    throw ConfigError("sample_in_cone: rejection budget exhausted");
}

ConePairCheck cone_pair_bound_check(double alpha, int served_beams, int per_cone, std::uint64_t seed,
                                    long raw_budget)
{
    ConePairCheck out;
    out.bound = cone_pair_bound(alpha);
    if (served_beams < 2 || per_cone < 1) {
        throw ConfigError("cone_pair_bound_check: needs r* >= 2 and a positive pool size");
    }
    const auto r = static_cast<std::size_t>(served_beams);
    const auto cap = static_cast<std::size_t>(per_cone);
    // Planar pools: cone c holds pool_re[c][j * cap + n] for member n.
    std::vector<std::vector<double>> pool_re(r, std::vector<double>(r * cap));
    std::vector<std::vector<double>> pool_im(r, std::vector<double>(r * cap));
    std::vector<std::size_t> fill(r, 0);
    std::size_t full = 0;
    CounterRng rng(derive_key(seed, {0xc0e5ULL}));
    std::vector<cplx> x(r);
    const double a2 = alpha * alpha;
    while (full < r && out.raw_draws < raw_budget) {
        ++out.raw_draws;
        double n2 = 0.0;
        for (auto& v : x) {
            v = rng.complex_normal();
            n2 += std::norm(v);
        }
        std::size_t cone = r;
        for (std::size_t i = 0; i < r; ++i) {
            if (std::norm(x[i]) >= a2 * n2) {
                cone = i;
                break;
            }
        }
        if (cone == r || fill[cone] == cap) {
            continue;
        }
        const double inv = 1.0 / std::sqrt(n2);
        for (std::size_t j = 0; j < r; ++j) {
            pool_re[cone][j * cap + fill[cone]] = x[j].real() * inv;
            pool_im[cone][j * cap + fill[cone]] = x[j].imag() * inv;
        }
        if (++fill[cone] == cap) {
            ++full;
        }
    }
    out.inconclusive = full < r;

    const auto& k = kernels::active();
    std::vector<double> q_re(r);
    std::vector<double> q_im(r);
    std::vector<double> power(cap);
    double worst = 0.0;
    for (std::size_t a = 0; a < r; ++a) {
        for (std::size_t b = a + 1; b < r; ++b) {
            if (fill[b] == 0) {
                continue;
            }
            // Pool b stored with stride cap; view only its filled prefix.
            std::vector<double> re(r * fill[b]);
            std::vector<double> im(r * fill[b]);
            for (std::size_t j = 0; j < r; ++j) {
                std::copy_n(pool_re[b].begin() + static_cast<std::ptrdiff_t>(j * cap), fill[b],
                            re.begin() + static_cast<std::ptrdiff_t>(j * fill[b]));
                std::copy_n(pool_im[b].begin() + static_cast<std::ptrdiff_t>(j * cap), fill[b],
                            im.begin() + static_cast<std::ptrdiff_t>(j * fill[b]));
            }
            const kernels::PlanarView view{re.data(), im.data(), fill[b], r};
            for (std::size_t n = 0; n < fill[a]; ++n) {
                for (std::size_t j = 0; j < r; ++j) {
                    q_re[j] = pool_re[a][j * cap + n];
                    q_im[j] = pool_im[a][j * cap + n];
                }
                k.projection_power(view, q_re.data(), q_im.data(), power.data());
                for (std::size_t m = 0; m < fill[b]; ++m) {
                    worst = std::max(worst, power[m]);
                }
            }
            out.pairs += static_cast<long>(fill[a] * fill[b]);
        }
    }
    out.max_observed = std::sqrt(worst);
    out.pass = out.max_observed <= out.bound + 1e-12;
    return out;
}

TruncatedTail::TruncatedTail(std::vector<double> lambdas, double zeta, double z_tau)
    : base_(std::move(lambdas)), zeta_(zeta), z_tau_(z_tau)
{
    if (!(zeta > 0.0 && zeta < 1.0 + 1e-15)) {
        throw ConfigError("TruncatedTail: zeta must lie in (0, 1]");
    }
    if (!(z_tau > 0.0) || !std::isfinite(z_tau)) {
        throw ConfigError("TruncatedTail: z_tau must be positive and finite");
    }
    f_tau_ = cdf(z_tau);
    if (!(f_tau_ > 0.0 && f_tau_ < 1.0)) {
        throw ConfigError("TruncatedTail: upper segment is not a valid CDF at z_tau");
    }
    // The upper segment must increase from z_tau on.
    const auto lam = base_.lambdas();
    const auto xi = base_.xi();
    double slope = 0.0;
    for (std::size_t i = 0; i < lam.size(); ++i) {
        slope += std::exp(-z_tau / lam[i]) / (xi[i] * lam[i]);
    }
    if (!(slope > 0.0)) {
        throw ConfigError("TruncatedTail: upper segment decreases at z_tau");
    }
}

double TruncatedTail::cdf(double z) const
{
    if (z <= 0.0) {
        return 0.0;
    }
    if (z < z_tau_) {
        return f_tau_ * z / z_tau_;
    }
    const auto lam = base_.lambdas();
    const auto xi = base_.xi();
    double tail = 0.0;
    for (std::size_t i = 0; i < lam.size(); ++i) {
        tail += std::exp(-z / lam[i]) / xi[i];
    }
    return 1.0 - zeta_ * tail;
}

double TruncatedTail::survival(double z) const
{
    if (z < z_tau_) {
        return 1.0 - cdf(z);
    }
    const auto lam = base_.lambdas();
    const auto xi = base_.xi();
    double tail = 0.0;
    for (std::size_t i = 0; i < lam.size(); ++i) {
        tail += std::exp(-z / lam[i]) / xi[i];
    }
    return zeta_ * tail;
}

double TruncatedTail::quantile(double p) const
{
    if (!(p > 0.0 && p < 1.0)) {
        throw ConfigError("TruncatedTail::quantile: p must lie in (0, 1)");
    }
    return p <= f_tau_ ? z_tau_ * p / f_tau_ : upper_quantile(1.0 - p);
}

double TruncatedTail::upper_quantile(double s) const
{
    if (!(s > 0.0 && s < 1.0)) {
        throw ConfigError("TruncatedTail::upper_quantile: s must lie in (0, 1)");
    }
    if (s >= 1.0 - f_tau_) {
        return z_tau_ * (1.0 - s) / f_tau_;
    }
    // Newton on log S(z), started from the dominant exponential; S is log
    // convex-ish and decreasing above z_tau, and a bracket guards each step.
    const auto lam = base_.lambdas();
    const auto xi = base_.xi();
    const double target = std::log(s);
    double lo = z_tau_;
    double hi = std::numeric_limits<double>::infinity();
    double z = std::max(z_tau_, lam[0] * std::log(zeta_ / (xi[0] * s)));
    for (int it = 0; it < 100; ++it) {
        double S = 0.0;
        double dS = 0.0;
        for (std::size_t i = 0; i < lam.size(); ++i) {
            const double e = std::exp(-z / lam[i]) / xi[i];
            S += e;
            dS -= e / lam[i];
        }
        S *= zeta_;
        dS *= zeta_;
        const double f = std::log(S) - target;
        (f > 0.0 ? lo : hi) = z;
        if (std::abs(f) < 1e-14) {
            break;
        }
        double next = z - f * S / dS;
        if (!(next > lo && next < hi)) {
            next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * z + lam[0];
        }
        if (std::abs(next - z) <= 1e-15 * z) {
            z = next;
            break;
        }
        z = next;
    }
    return z;
}

double TruncatedTail::threshold(double K) const
{
    const double l1 = base_.lambdas()[0];
    return l1 * std::log(K) - l1 * std::log(std::log(K)) + l1 * std::log(zeta_ / base_.xi()[0]);
}

TailCheck evt_tail_check(const TruncatedTail& law, long K, long trials, std::uint64_t seed)
{
    TailCheck out;
    out.K = static_cast<double>(K);
    out.trials = trials;
    out.threshold = law.threshold(out.K);
    out.closed_form = -std::expm1(out.K * std::log(law.cdf(out.threshold)));
    if (out.threshold <= law.z_tau()) {
        out.inconclusive = true;
        return out;
    }
    // Z_max = F^-1(U^(1/K)); its survival level -expm1(log U / K) is
    // formed directly so that levels near 1e-5 keep full precision.
    CounterRng rng(derive_key(seed, {static_cast<std::uint64_t>(K)}));
    long hits = 0;
    for (long t = 0; t < trials; ++t) {
        const double level = -std::expm1(std::log(rng.uniform()) / out.K);
        if (law.upper_quantile(level) > out.threshold) {
            ++hits;
        }
    }
    out.exceedance = static_cast<double>(hits) / static_cast<double>(trials);
    out.c = out.K * (1.0 - out.exceedance);
    return out;
}

TailCheck evt_exponential_batches(long K, long trials, std::uint64_t seed)
{
    TailCheck out;
    out.K = static_cast<double>(K);
    out.trials = trials;
    out.threshold = std::log(out.K) - std::log(std::log(out.K));
    out.closed_form = -std::expm1(out.K * std::log1p(-std::exp(-out.threshold)));
    long hits = 0;
    for (long t = 0; t < trials; ++t) {
        CounterRng rng(derive_key(seed, {static_cast<std::uint64_t>(K), static_cast<std::uint64_t>(t)}));
        double best = 0.0;
        for (long k = 0; k < K; ++k) {
            best = std::max(best, -std::log(rng.uniform()));
        }
        hits += best > out.threshold ? 1 : 0;
    }
    out.exceedance = static_cast<double>(hits) / static_cast<double>(trials);
    out.c = out.K * (1.0 - out.exceedance);
    return out;
}

SlopeFit fit_loglog_slope(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 3) {
        throw ConfigError("fit_loglog_slope: needs at least three (x, y) points");
    }
    const auto n = static_cast<double>(x.size());
    double sx = 0.0;
    double sy = 0.0;
    std::vector<double> t(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > std::exp(1.0))) {
            throw ConfigError("fit_loglog_slope: x must exceed e");
        }
        t[i] = std::log(std::log(x[i]));
        sx += t[i];
        sy += y[i];
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (t[i] - mx) * (t[i] - mx);
        sxy += (t[i] - mx) * (y[i] - my);
    }
    SlopeFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

double predicted_scaling(std::span<const GroupProfile> groups, double rho, double k_per_group)
{
    double total = 0.0;
    for (const auto& g : groups) {
        total += g.served_beams() * std::log1p(rho * g.eigvals()(0) * std::log(k_per_group));
    }
    return total;
}

int dof_beta(std::span<const GroupProfile> groups)
{
    if (groups.empty()) {
        return 0;
    }
    int ranks = 0;
    for (const auto& g : groups) {
        ranks += g.rank();
    }
    return std::min(groups.front().antennas(), ranks);
}

} // namespace jsdm
