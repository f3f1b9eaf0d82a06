// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are pinned
// below; expected values come from closed forms or independent oracles in
// this file, never from the code under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "jsdm/beamforming.hpp"
#include "jsdm/channel_model.hpp"
#include "jsdm/fairness.hpp"
#include "jsdm/harness/runner.hpp"
#include "jsdm/harness/scenario.hpp"
#include "jsdm/scheduling.hpp"
#include "jsdm/theory.hpp"

using namespace jsdm;
using namespace jsdm::harness;

namespace {

// Pinned tolerances.
constexpr double kZfTol = 1e-9;
constexpr double kConeBoundSlack = 1e-12;
constexpr double kConeSharpness = 0.95;
constexpr double kGainBoundSlack = 1e-9;
constexpr double kTieSe = 2.0;         // gaps within 2 standard errors are ties
constexpr double kCloseness = 0.9;     // ReDOS-opt / SUS-opt at fig5, K = 1000
constexpr double kSlopeLow = 0.85;
constexpr double kSlopeHigh = 1.15;
constexpr double kTailSigma = 3.0;
constexpr double kCRatioLow = 0.5;
constexpr double kCRatioHigh = 2.0;
constexpr double kFeedbackGap = 0.10;  // adaptive must save more than 10%
constexpr double kWaterFillRel = 1e-6;
constexpr double kGridStep = 1e-4;     // final grid spacing, relative to the budget

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

ScenarioSpec preset(const char* name)
{
    return load_scenario(std::filesystem::path(JSDM_SCENARIO_DIR) / (std::string(name) + ".ini"));
}

CMat random_cmat(CounterRng& rng, int rows, int cols)
{
    CMat m(rows, cols);
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < rows; ++i) {
            m(i, j) = rng.complex_normal();
        }
    }
    return m;
}

const Cell& find(std::span<const Cell> cells, const std::string& scheme, long K)
{
    for (const auto& c : cells) {
        if (c.setting.scheme == scheme && c.K == K) {
            return c;
        }
    }
    throw Error("acceptance: no cell for " + scheme + " at K=" + std::to_string(K));
}

/// Headline rows: the "-opt" row for parameterized schemes, else the plain row.
const Cell& headline(std::span<const Cell> cells, const std::string& scheme, long K)
{
    for (const auto& c : cells) {
        if (c.setting.scheme == scheme + "-opt" && c.K == K) {
            return c;
        }
    }
    return find(cells, scheme, K);
}

/// a >= b unless b beats a by more than kTieSe standard errors.
bool not_worse(const Cell& a, const Cell& b, std::string& note)
{
    const PairedDiff d = paired_difference(a, b);
    const bool tie = std::abs(d.mean) <= kTieSe * d.stderr;
    note += fmt(" %s-%s=%.3f(%s)", a.setting.scheme.c_str(), b.setting.scheme.c_str(), d.mean,
                tie ? "tie" : (d.mean > 0 ? "ok" : "REVERSED"));
    return tie || d.mean > 0.0;
}

bool resolved_above(const Cell& a, const Cell& b)
{
    const PairedDiff d = paired_difference(a, b);
    return d.mean > kTieSe * d.stderr;
}

std::vector<Cell> run_with_opt(const ScenarioSpec& spec, std::span<const GroupProfile> groups, long K,
                               std::span<const Setting> settings, const std::string& label)
{
    std::vector<Cell> cells = run_point(spec, groups, K, settings, label, {.threads = 0});
    const auto opt = optimized(cells);
    cells.insert(cells.end(), opt.begin(), opt.end());
    return cells;
}

// 1. ZF correctness.
Verdict zf_correctness()
{
    CounterRng rng(101);
    double worst = 0.0;
    const int rs[] = {2, 4, 8};
    for (int n = 0; n < 1000; ++n) {
        const int r = rs[n % 3];
        const int s = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(r));
        const CMat G = random_cmat(rng, s, r);
        const ZfPrecoder zf = zf_precoder(G);
        worst = std::max(worst, (G * zf.directions - CMat::Identity(s, s)).cwiseAbs().maxCoeff());
    }
    return {worst < kZfTol, fmt("max|GW-I| = %.2e over 1000 selections (tol %.0e)", worst, kZfTol)};
}

// 2. Every channel lies in a cone at alpha_min; above it, some do not.
Verdict cone_totality()
{
    bool pass = true;
    std::string note;
    for (int r : {2, 3, 4, 8}) {
        CounterRng rng(derive_key(202, {static_cast<std::uint64_t>(r)}));
        long empty_at_min = 0;
        long empty_above = 0;
        for (long n = 0; n < 100'000; ++n) {
            CVec g(r);
            for (int i = 0; i < r; ++i) {
                g(i) = rng.complex_normal();
            }
            empty_at_min += candidate_set(g, alpha_min(r)).empty() ? 1 : 0;
            empty_above += candidate_set(g, alpha_min(r) + 0.05).empty() ? 1 : 0;
        }
        pass = pass && empty_at_min == 0 && empty_above > 0;
        note += fmt(" r*=%d: %ld/%ld empty", r, empty_at_min, empty_above);
    }
    return {pass, "empty sets at alpha_min / alpha_min+0.05 in 1e5 draws:" + note};
}

// 3. Cross-cone coherence bound and its sharpness.
Verdict cone_pairs()
{
    bool pass = true;
    std::string note;
    for (double alpha : {0.75, 0.9, 0.96}) {
        for (int r : {2, 4}) {
            const ConePairCheck c = cone_pair_bound_check(alpha, r, 1000, 303);
            const bool ok = !c.inconclusive && c.pairs >= 100'000 && c.max_observed <= c.bound + kConeBoundSlack &&
                            c.max_observed >= kConeSharpness * c.bound;
            pass = pass && ok;
            note += fmt(" a=%.2f,r*=%d:%.4f/%.4f", alpha, r, c.max_observed, c.bound);
        }
    }
    return {pass, "max coherence / bound:" + note};
}

// 4. Effective-gain bound for ReDOS selections at r* = 2.
Verdict gain_bound()
{
    const int r = 2;
    const std::vector<GroupProfile> groups{
        GroupProfile::from_eigen(0, CMat::Identity(2, 2), (RVec(2) << 1.0, 0.7).finished(), r, 40)};
    bool pass = true;
    std::string note;
    for (double alpha : {0.75, 0.8, 0.9}) {
        if (alpha < alpha_bar_lower(r)) {
            return {false, fmt("alpha %.2f outside the admissible range", alpha)};
        }
        const double frac = gershgorin_gain_bound(alpha, r);
        long selections = 0;
        double worst = 1e300;
        for (std::uint64_t t = 0; selections < 10'000; ++t) {
            const ChannelBatch b = sample_channels(groups, derive_key(404, {t}));
            const GroupSchedule s = redos_select_group(b.groups[0], alpha, 1.0);
            if (s.size() != 2) {
                continue;
            }
            const ZfPrecoder zf = zf_precoder(selected_channels(b.groups[0], s.users));
            for (int i = 0; i < 2; ++i) {
                const double n2 = b.groups[0].effective(s.users[static_cast<std::size_t>(i)]).squaredNorm();
                worst = std::min(worst, zf.gains(i) - (n2 * frac - kGainBoundSlack));
            }
            ++selections;
        }
        pass = pass && worst >= 0.0;
        note += fmt(" a=%.2f: min margin %.3e", alpha, worst);
    }
    return {pass, "gamma_i - ||g_i||^2 bound over 1e4 selections:" + note};
}

// 5. Scheme ordering on the fig4 preset.
Verdict fig4_ordering()
{
    const ScenarioSpec spec = preset("fig4");
    const std::vector<Cell> cells = run_scenario(spec, {.threads = 0});
    bool pass = true;
    std::string note;
    for (long K : spec.k_grid) {
        const Cell& dpc = headline(cells, "dpc-greedy", K);
        const Cell& susq = headline(cells, "sus-qsinr", K);
        const Cell& redos = headline(cells, "redos", K);
        const Cell& rbf = headline(cells, "rbf", K);
        note += fmt(" K=%ld:", K);
        pass = not_worse(dpc, susq, note) && pass;
        pass = not_worse(susq, redos, note) && pass;
        pass = not_worse(redos, rbf, note) && pass;
    }
    const long kmax = spec.k_grid.back();
    const Cell& susq = headline(cells, "sus-qsinr", kmax);
    const Cell& susn = headline(cells, "sus-norm", kmax);
    const bool norm_behind = resolved_above(susq, susn);
    note += fmt(" | K=%ld sus-qsinr %.3f vs sus-norm %.3f", kmax, susq.mean_rate(), susn.mean_rate());
    return {pass && norm_behind, fmt("%ld trials;", spec.trials) + note};
}

// 6. Closeness and feedback on the fig5 preset.
Verdict fig5_closeness()
{
    const ScenarioSpec spec = preset("fig5");
    const long K = 1000;
    const auto groups = build_profiles(spec, K);
    const auto settings = settings_for(spec);
    const std::vector<Cell> cells = run_with_opt(spec, groups, K, settings, spec.name);
    const Cell& redos = headline(cells, "redos", K);
    const Cell& sus = headline(cells, "sus-qsinr", K);
    const Cell& rbf = headline(cells, "rbf", K);
    const double ratio = redos.mean_rate() / sus.mean_rate();
    const bool close = ratio >= kCloseness;
    const bool lean = redos.mean_feedback() < rbf.mean_feedback();
    return {close && lean,
            fmt("ReDOS-opt %.3f (alpha %.2f) / SUS-opt %.3f = %.3f (need >= %.2f); feedback ReDOS %.1f vs RBF %.1f",
                redos.mean_rate(), redos.setting.alpha, sus.mean_rate(), ratio, kCloseness, redos.mean_feedback(),
                rbf.mean_feedback())};
}

// 7. Correlation endpoints on the fig6 preset.
Verdict fig6_endpoints()
{
    const ScenarioSpec spec = preset("fig6");
    const long K = 1000;
    const auto settings = settings_for(spec);
    std::string note;

    const auto rank_one = build_profiles(spec, K, 1.0);
    const auto c1 = run_with_opt(spec, rank_one, K, settings, "fig6@nu=1");
    const Cell* one[] = {&headline(c1, "sus-norm", K), &headline(c1, "redos", K), &headline(c1, "rbf", K)};
    // Agreement is judged against the standard error of each mean sum rate:
    // the schemes coincide on a rank-one channel, so paired differences are
    // rounding noise and their own standard error is meaningless.
    bool agree = true;
    double widest = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            const double gap = std::abs(one[i]->mean_rate() - one[j]->mean_rate());
            const double se = std::max(one[i]->stderr_rate(), one[j]->stderr_rate());
            agree = agree && gap <= kTieSe * se;
            widest = std::max(widest, gap);
        }
    }
    note += fmt("nu=1: %.3f %.3f %.3f (max gap %.1e, se %.3f);", one[0]->mean_rate(), one[1]->mean_rate(),
                one[2]->mean_rate(), widest, one[0]->stderr_rate());

    const auto white = build_profiles(spec, K, 0.0);
    const auto c0 = run_with_opt(spec, white, K, settings, "fig6@nu=0");
    const Cell& sus = headline(c0, "sus-norm", K);
    const Cell& redos = headline(c0, "redos", K);
    const Cell& rbf = headline(c0, "rbf", K);
    const bool ordered = resolved_above(sus, redos) && resolved_above(redos, rbf);
    note += fmt(" nu=0: SUS %.3f ReDOS %.3f RBF %.3f", sus.mean_rate(), redos.mean_rate(), rbf.mean_rate());
    return {agree && ordered, note};
}

// 8. Sum-rate slope against log log K'.
Verdict scaling_slope()
{
    const ScenarioSpec spec = preset("fig4");
    std::vector<Setting> settings{{"dpc-greedy"}};
    for (double a : spec.alpha_grid) {
        settings.push_back({"redos", a});
    }
    std::vector<double> kp, dpc, redos, predicted;
    for (long K : {100L, 300L, 1000L, 3000L, 10000L}) {
        const auto groups = build_profiles(spec, K);
        const auto cells = run_with_opt(spec, groups, K, settings, spec.name);
        kp.push_back(static_cast<double>(K) / static_cast<double>(groups.size()));
        dpc.push_back(find(cells, "dpc-greedy", K).mean_rate());
        redos.push_back(headline(cells, "redos", K).mean_rate());
        predicted.push_back(predicted_scaling(groups, per_beam_power(spec, groups), kp.back()) / std::log(2.0));
    }
    const double sd = fit_loglog_slope(kp, dpc).slope;
    const double sr = fit_loglog_slope(kp, redos).slope;
    const double sp = fit_loglog_slope(kp, predicted).slope;
    const double ratio = sr / sd;
    // The asymptotic curve's slope is reported for context only.
    return {ratio >= kSlopeLow && ratio <= kSlopeHigh,
            fmt("slope ReDOS-opt %.3f / DPC %.3f = %.3f (need [%.2f, %.2f]); asymptotic curve slope %.3f "
                "(ratio to DPC %.3f, not gated)",
                sr, sd, ratio, kSlopeLow, kSlopeHigh, sp, sp / sd)};
}

// 9. Extreme-value tail.
Verdict evt_tail()
{
    bool pass = true;
    std::string note = "exponential:";
    for (long K : {100L, 1000L, 10000L}) {
        const TailCheck t = evt_exponential_batches(K, 10'000, 909);
        const double p = 1.0 - 1.0 / static_cast<double>(K);
        const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(t.trials));
        const double z = (t.exceedance - p) / sigma;
        pass = pass && std::abs(z) <= kTailSigma;
        note += fmt(" K=%ld %.4f (z=%.2f)", K, t.exceedance, z);
    }
    note += "; generalized c:";
    const TruncatedTail law({1.0, 0.7}, 0.5, 1.0);
    double prev = 0.0;
    for (long K : {100L, 1000L, 10000L}) {
        const TailCheck t = evt_tail_check(law, K, 2'000'000, 919);
        pass = pass && !t.inconclusive && t.c > 0.0;
        if (prev > 0.0) {
            const double ratio = t.c / prev;
            pass = pass && ratio >= kCRatioLow && ratio <= kCRatioHigh;
        }
        prev = t.c;
        note += fmt(" K=%ld %.3f", K, t.c);
    }
    return {pass, note};
}

// 10. Round-robin completeness.
Verdict rr_completeness()
{
    CounterRng rng(1010);
    long worst_intervals = 0;
    long worst_budget = 0;
    for (int inst = 0; inst < 100; ++inst) {
        const auto pick = [&](std::uint64_t n) { return static_cast<int>(rng.next_u64() % n); };
        std::vector<GroupProfile> groups;
        if (inst % 2 == 0) {
            const int kg = 1 + pick(40);
            groups.push_back(GroupProfile::from_covariance(0, {4, DftColumns{0, {1.0, 0.7, 0.49}}}, 0, 2, kg));
            groups.push_back(GroupProfile::from_covariance(1, {4, DftColumns{2, {1.0, 0.7}}}, 0, 2, 1 + pick(40)));
        } else {
            const double nu = 0.9 * rng.uniform();
            groups.push_back(GroupProfile::from_covariance(0, {4, ExpCorrelation{nu}}, 0, 4, 1 + pick(40)));
        }
        const std::uint64_t seed = rng.next_u64();
        const BatchSource src = [&](long t) {
            return sample_channels(groups, derive_key(seed, {static_cast<std::uint64_t>(t)}));
        };
        RrRoundResult r;
        try {
            r = rr_round(groups, src, 10.0, {});
        } catch (const InvariantError& e) {
            return {false, fmt("instance %d: %s", inst, e.what())};
        }
        for (const auto& g : r.service_count) {
            for (int c : g) {
                if (c != 1) {
                    return {false, fmt("instance %d: a user was served %d times", inst, c)};
                }
            }
        }
        if (r.intervals > r.interval_budget) {
            return {false, fmt("instance %d: %ld intervals > budget %ld", inst, r.intervals, r.interval_budget)};
        }
        if (r.intervals * worst_budget >= worst_intervals * r.interval_budget) {
            worst_intervals = r.intervals;
            worst_budget = r.interval_budget;
        }
    }
    return {true, fmt("100 instances; largest intervals/budget %ld/%ld", worst_intervals, worst_budget)};
}

// 11. Proportional-fair sanity.
Verdict pf_sanity()
{
    const ScenarioSpec spec = preset("fig7");
    const FairnessResult res = run_fairness(spec, {.threads = 0});
    double min_fraction = 1.0;
    for (const auto& row : res.rows) {
        min_fraction = std::min(min_fraction, row.served_fraction);
    }
    bool pass = min_fraction > 0.0;
    std::map<std::string, std::map<std::string, double>> units;
    for (const auto& t : res.totals) {
        units[t.scenario][t.variant] = t.feedback_units;
    }
    std::string note = fmt("min served fraction %.4f;", min_fraction);
    for (const auto& [study, v] : units) {
        const double adaptive = v.at("redos-pf-adaptive");
        const double fixed = v.at("redos-pf-fixed");
        const double saving = 1.0 - adaptive / fixed;
        pass = pass && saving > kFeedbackGap;
        note += fmt(" %s: adaptive %.0f vs fixed %.0f (-%.0f%%)", study.c_str(), adaptive, fixed, 100.0 * saving);
    }
    return {pass, note};
}

double wf_objective(std::span<const double> a, std::span<const double> q)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += std::log1p(a[i] * q[i]);
    }
    return s;
}

/// Coarse-to-fine grid search over the simplex {q >= 0, sum q = budget}. At
/// each level the coordinate with the largest share absorbs the remaining
/// budget and the others run over an 11-point grid centred on the incumbent,
/// so optima on a face (some q_i = 0) stay reachable. The window halves per
/// level until the spacing drops below kGridStep * budget.
double grid_search(std::span<const double> a, double budget)
{
    const std::size_t n = a.size();
    const int pts = 11;
    std::vector<double> best_q(n, budget / static_cast<double>(n));
    double best = wf_objective(a, best_q);
    double width = 2.0 * budget;
    for (;;) {
        const auto dep = static_cast<std::size_t>(std::max_element(best_q.begin(), best_q.end()) - best_q.begin());
        std::vector<std::size_t> free;
        for (std::size_t i = 0; i < n; ++i) {
            if (i != dep) {
                free.push_back(i);
            }
        }
        std::vector<double> lo(free.size()), hi(free.size());
        double step = 0.0;
        for (std::size_t k = 0; k < free.size(); ++k) {
            lo[k] = std::max(0.0, best_q[free[k]] - width / 2.0);
            hi[k] = std::min(budget, best_q[free[k]] + width / 2.0);
            step = std::max(step, (hi[k] - lo[k]) / (pts - 1));
        }
        std::vector<int> idx(free.size(), 0);
        std::vector<double> q(n);
        std::vector<double> next = best_q;
        for (;;) {
            double used = 0.0;
            for (std::size_t k = 0; k < free.size(); ++k) {
                q[free[k]] = lo[k] + (hi[k] - lo[k]) * idx[k] / (pts - 1);
                used += q[free[k]];
            }
            if (used <= budget) {
                q[dep] = budget - used;
                const double v = wf_objective(a, q);
                if (v > best) {
                    best = v;
                    next = q;
                }
            }
            std::size_t d = 0;
            while (d < free.size() && ++idx[d] == pts) {
                idx[d++] = 0;
            }
            if (d == free.size()) {
                break;
            }
        }
        best_q = next;
        if (step < kGridStep * budget) {
            return best;
        }
        width /= 2.0;
    }
}

// 12. Water-filling against the grid oracle.
Verdict water_filling()
{
    CounterRng rng(1212);
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const std::size_t streams = 2 + static_cast<std::size_t>(n % 3);
        std::vector<double> a(streams);
        for (auto& x : a) {
            x = std::pow(10.0, 2.0 * rng.uniform() - 1.0);
        }
        const double budget = 0.5 + 9.5 * rng.uniform();
        const auto q = water_fill(a, budget);
        const double got = wf_objective(a, q);
        const double oracle = grid_search(a, budget);
        worst = std::max(worst, std::abs(got - oracle) / std::abs(oracle));
    }
    return {worst <= kWaterFillRel, fmt("max relative gap %.2e over 1000 instances (tol %.0e)", worst, kWaterFillRel)};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> run;
};

} // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> all{
        {1, "zf-correctness", zf_correctness},
        {2, "cone-totality", cone_totality},
        {3, "cone-pair-bound", cone_pairs},
        {4, "effective-gain-bound", gain_bound},
        {5, "fig4-ordering", fig4_ordering},
        {6, "fig5-closeness-feedback", fig5_closeness},
        {7, "fig6-endpoints", fig6_endpoints},
        {8, "scaling-slope", scaling_slope},
        {9, "evt-tail", evt_tail},
        {10, "rr-completeness", rr_completeness},
        {11, "pf-sanity", pf_sanity},
        {12, "water-filling", water_filling},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        only.insert(std::atoi(argv[i]));
    }

    int failed = 0;
    for (const auto& c : all) {
        if (!only.empty() && !only.contains(c.id)) {
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] %2d %-24s %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs);
        std::fflush(stdout);
        failed += v.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
