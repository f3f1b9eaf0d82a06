// SPDX-License-Identifier: Apache-2.0
#include "jsdm/harness/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <numeric>
#include <sstream>
#include <thread>
#include <tuple>

#include "jsdm/fairness.hpp"
#include "jsdm/metrics.hpp"
#include "jsdm/rng.hpp"
#include "jsdm/scheduling.hpp"

namespace jsdm::harness {

namespace {

double mean_of(const std::vector<double>& v)
{
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v)
{
    if (v.size() < 2) {
        return 0.0;
    }
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) {
        ss += (x - m) * (x - m);
    }
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

int resolve_threads(int threads)
{
    if (threads > 0) {
        return threads;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(t) for t in [0, n) on `threads` workers. Each t writes only its
/// own result slot, so the outcome is independent of scheduling.
template <class Fn> void parallel_for(long n, int threads, Fn&& fn)
{
    const int workers = static_cast<int>(std::min<long>(resolve_threads(threads), n));
    if (workers <= 1) {
        for (long t = 0; t < n; ++t) {
            fn(t);
        }
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (long t = next++; t < n; t = next++) {
                try {
                    fn(t);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                    next = n;
                }
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

struct TrialValue {
    double rate_bits = 0.0;
    double feedback = 0.0;
};

TrialValue evaluate(const Setting& s, const ChannelBatch& batch, std::span<const GroupProfile> groups, double rho,
                    const ScenarioSpec& spec)
{
    TrialValue v;
    FeedbackTally tally;
    if (s.scheme == "dpc-greedy") {
        v.rate_bits = greedy_dpc_select(batch, rho).rate_nats / std::log(2.0);
        for (const auto& g : batch.groups) {
            tally.reals += 2L * g.h.rows() * g.users();
        }
        v.feedback = tally.units(spec.integer_weight);
        return v;
    }
    ScheduleOutcome outcome;
    FeedbackScheme fs = FeedbackScheme::Redos;
    if (s.scheme == "redos") {
        outcome = redos_select(batch, s.alpha, rho);
    } else if (s.scheme == "rbf") {
        outcome = rbf_select(batch, rho);
        fs = FeedbackScheme::Rbf;
    } else {
        const auto criterion = s.scheme == "sus-norm" ? SusCriterion::Norm : SusCriterion::QuasiSinr;
        outcome = sus_select(batch, s.gamma, rho, criterion);
        fs = FeedbackScheme::Sus;
    }
    RateReport rates;
    if (fs == FeedbackScheme::Rbf) {
        const auto tx = beam_transmissions(batch, outcome, rho);
        rates = evaluate_rates(batch, outcome, tx, false);
    } else {
        const auto tx = zf_transmissions(batch, outcome, rho, spec.power_mode);
        rates = evaluate_rates(batch, outcome, tx, true);
    }
    for (std::size_t g = 0; g < outcome.groups.size(); ++g) {
        tally += tally_feedback(outcome.groups[g], fs, groups[g].served_beams(), groups[g].users());
    }
    v.rate_bits = rates.sum_bits();
    v.feedback = tally.units(spec.integer_weight);
    return v;
}

bool parameterized(const Setting& s)
{
    return !std::isnan(s.alpha) || !std::isnan(s.gamma);
}

/// The swept parameter of a parameterized setting.
double parameter(const Setting& s)
{
    return std::isnan(s.alpha) ? s.gamma : s.alpha;
}

std::string nu_label(const std::string& name, double nu)
{
    std::ostringstream os;
    os << name << "@nu=" << nu;
    return os.str();
}

} // namespace

double Cell::mean_rate() const noexcept
{
    return mean_of(rate_bits);
}

double Cell::stderr_rate() const noexcept
{
    return stderr_of(rate_bits);
}

double Cell::mean_feedback() const noexcept
{
    return mean_of(feedback_units);
}

std::vector<Setting> settings_for(const ScenarioSpec& spec)
{
    std::vector<Setting> out;
    for (const auto& name : spec.schemes) {
        if (name == "redos") {
            if (spec.alpha_grid.empty()) {
                throw ConfigError("scheme redos needs alpha_grid");
            }
            for (double a : spec.alpha_grid) {
                out.push_back({name, a, kNoParam});
            }
        } else if (name == "sus-norm" || name == "sus-qsinr") {
            if (spec.gamma_grid.empty()) {
                throw ConfigError("scheme " + name + " needs gamma_grid");
            }
            for (double g : spec.gamma_grid) {
                out.push_back({name, kNoParam, g});
            }
        } else {
            out.push_back({name, kNoParam, kNoParam});
        }
    }
    return out;
}

std::vector<Cell> run_point(const ScenarioSpec& spec, std::span<const GroupProfile> groups, long K,
                            std::span<const Setting> settings, const std::string& label, const RunOptions& options)
{
    const long trials = options.trials > 0 ? options.trials : spec.trials;
    const std::uint64_t seed = options.seed.value_or(spec.seed);
    const double rho = per_beam_power(spec, groups);
    std::vector<std::vector<TrialValue>> values(static_cast<std::size_t>(trials));
    parallel_for(trials, options.threads, [&](long t) {
        const ChannelBatch batch =
            sample_channels(groups, derive_key(seed, {static_cast<std::uint64_t>(K), static_cast<std::uint64_t>(t)}));
        auto& row = values[static_cast<std::size_t>(t)];
        for (const auto& s : settings) {
            row.push_back(evaluate(s, batch, groups, rho, spec));
        }
    });
    std::vector<Cell> out;
    for (std::size_t i = 0; i < settings.size(); ++i) {
        Cell c{label, settings[i], K, seed, {}, {}};
        for (const auto& row : values) {
            c.rate_bits.push_back(row[i].rate_bits);
            c.feedback_units.push_back(row[i].feedback);
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<Cell> optimized(std::span<const Cell> cells)
{
    std::map<std::tuple<std::string, std::string, long>, const Cell*> best;
    std::vector<std::tuple<std::string, std::string, long>> order;
    for (const auto& c : cells) {
        if (!parameterized(c.setting)) {
            continue;
        }
        const auto key = std::make_tuple(c.scenario, c.setting.scheme, c.K);
        auto it = best.find(key);
        if (it == best.end()) {
            best.emplace(key, &c);
            order.push_back(key);
        } else {
            const double m = c.mean_rate();
            const double incumbent = it->second->mean_rate();
            if (m > incumbent || (m == incumbent && parameter(c.setting) < parameter(it->second->setting))) {
                it->second = &c;
            }
        }
    }
    std::vector<Cell> out;
    for (const auto& key : order) {
        Cell c = *best.at(key);
        c.setting.scheme += "-opt";
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<Cell> run_scenario(const ScenarioSpec& spec, const RunOptions& options)
{
    const auto settings = settings_for(spec);
    std::vector<Cell> cells;
    auto run_k = [&](long K, std::optional<double> nu, const std::string& label) {
        const auto groups = build_profiles(spec, K, nu);
        if (!spec.bd_waive) {
            for (const auto& r : check_approx_bd(groups, spec.bd_tol)) {
                if (!r.pass) {
                    throw BdCheckError("group " + std::to_string(r.group) + " overlaps other groups' pre-beamformers (residual " +
                                       std::to_string(r.residual) + ")");
                }
            }
        }
        auto part = run_point(spec, groups, K, settings, label, options);
        cells.insert(cells.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    };
    for (long K : spec.k_grid) {
        run_k(K, std::nullopt, spec.name);
    }
    if (!spec.nu_sweep.empty()) {
        const std::vector<long> ks = spec.sweep_k > 0 ? std::vector<long>{spec.sweep_k} : spec.k_grid;
        for (double nu : spec.nu_sweep) {
            for (long K : ks) {
                run_k(K, nu, nu_label(spec.name, nu));
            }
        }
    }
    auto opt = optimized(cells);
    cells.insert(cells.end(), opt.begin(), opt.end());
    return cells;
}

AlphaSweep alpha_sweep(const ScenarioSpec& spec, std::span<const double> alpha_grid, const RunOptions& options)
{
    if (alpha_grid.empty()) {
        throw ConfigError("alpha_sweep: empty alpha grid");
    }
    std::vector<double> grid(alpha_grid.begin(), alpha_grid.end());
    std::sort(grid.begin(), grid.end());
    std::vector<Setting> settings;
    for (double a : grid) {
        settings.push_back({"redos", a, kNoParam});
    }
    AlphaSweep out;
    for (long K : spec.k_grid) {
        const auto groups = build_profiles(spec, K);
        auto part = run_point(spec, groups, K, settings, spec.name, options);
        std::size_t best = 0;
        for (std::size_t i = 1; i < part.size(); ++i) {
            if (part[i].mean_rate() > part[best].mean_rate()) {
                best = i;
            }
        }
        out.K.push_back(K);
        out.best_alpha.push_back(grid[best]);
        out.cells.insert(out.cells.end(), part.begin(), part.end());
    }
    return out;
}

PairedDiff paired_difference(const Cell& a, const Cell& b)
{
    if (a.rate_bits.size() != b.rate_bits.size() || a.seed != b.seed || a.K != b.K) {
        throw ConfigError("paired_difference: cells were not evaluated on the same draws");
    }
    std::vector<double> d(a.rate_bits.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = a.rate_bits[i] - b.rate_bits[i];
    }
    return {mean_of(d), stderr_of(d)};
}

FairnessResult run_fairness(const ScenarioSpec& spec, const RunOptions& options)
{
    if (!spec.fairness) {
        throw ConfigError("scenario " + spec.name + " has no [fairness] block");
    }
    if (spec.groups.size() != 1) {
        throw ConfigError("the fairness study expects a single group");
    }
    const FairnessSpec& fs = *spec.fairness;
    const std::uint64_t seed = options.seed.value_or(spec.seed);
    const long intervals = options.trials > 0 ? options.trials : fs.intervals;
    FairnessResult result;

    std::vector<double> gains;
    for (int k = 0; k < fs.users; ++k) {
        const double db = fs.users == 1 ? fs.gain_low_db
                                        : fs.gain_low_db + (fs.gain_high_db - fs.gain_low_db) * k / (fs.users - 1);
        gains.push_back(std::pow(10.0, db / 10.0));
    }

    struct Variant {
        std::string name;
        PfParams params;
    };
    for (std::size_t study = 0; study < fs.nu.size(); ++study) {
        GroupSpec gs = spec.groups.front();
        if (auto* e = std::get_if<ExpCorrelation>(&gs.covariance.model)) {
            e->nu = fs.nu[study];
        }
        const std::vector<GroupProfile> groups{
            GroupProfile::from_covariance(0, gs.covariance, gs.rank, gs.served_beams, fs.users, gains)};
        const double rho = per_beam_power(spec, groups);
        const double amin = alpha_min(gs.served_beams);
        PfParams base;
        base.alpha_min = amin;
        base.alpha_init = amin;
        base.delta = fs.delta;
        base.mu_init = fs.mu_init;
        base.gamma = fs.gamma;
        base.delta_up = fs.delta_up[study];
        base.delta_down = fs.delta_up[study] / fs.down_ratio[study];
        std::vector<Variant> variants{{"redos-pf-adaptive", base}, {"redos-pf-fixed", base}, {"sus-pf", base}};
        variants[1].params.adaptive = false;
        variants[2].params.scheduler = PfScheduler::Sus;
        variants[2].params.adaptive = false;

        const std::string label = nu_label(spec.name, fs.nu[study]);
        std::vector<FairnessResult> partial(variants.size());
        parallel_for(static_cast<long>(variants.size()), options.threads, [&](long vi) {
            const Variant& v = variants[static_cast<std::size_t>(vi)];
            FairnessState state = FairnessState::init(groups, v.params);
            std::vector<double> rate_sum(static_cast<std::size_t>(fs.users), 0.0);
            std::vector<long> reports(static_cast<std::size_t>(fs.users), 0);
            FeedbackTally total;
            for (long t = 0; t < intervals; ++t) {
                const ChannelBatch batch =
                    sample_channels(groups, derive_key(seed, {static_cast<std::uint64_t>(study), static_cast<std::uint64_t>(t)}));
                const PfIntervalResult r = pf_interval(state, batch, rho, v.params);
                total += r.feedback;
                const auto& sched = r.outcome.groups.front();
                for (std::size_t i = 0; i < sched.size(); ++i) {
                    rate_sum[static_cast<std::size_t>(sched.users[i])] += r.rates.user_nats.front()[i];
                }
                for (const auto& rep : sched.reports) {
                    ++reports[static_cast<std::size_t>(rep.user)];
                }
            }
            auto& out = partial[static_cast<std::size_t>(vi)];
            for (int k = 0; k < fs.users; ++k) {
                const auto uk = static_cast<std::size_t>(k);
                out.rows.push_back({label, v.name, k, gains[uk],
                                    rate_sum[uk] / static_cast<double>(intervals) / std::log(2.0),
                                    static_cast<double>(state.served.front()[uk]) / static_cast<double>(intervals),
                                    reports[uk]});
            }
            out.totals.push_back({label, v.name, total.units(spec.integer_weight)});
        });
        for (auto& p : partial) {
            result.rows.insert(result.rows.end(), p.rows.begin(), p.rows.end());
            result.totals.insert(result.totals.end(), p.totals.begin(), p.totals.end());
        }
    }
    return result;
}

} // namespace jsdm::harness
