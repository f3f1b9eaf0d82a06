// SPDX-License-Identifier: Apache-2.0
#include "jsdm/harness/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace jsdm::harness {

namespace {

using boost::property_tree::ptree;

/// Typed access to one INI section that remembers which keys were consumed,
/// so leftovers (usually typos) can be rejected.
class Section {
public:
    Section(const ptree& tree, std::string name, std::string origin)
        : tree_(tree), name_(std::move(name)), origin_(std::move(origin)) {}

    bool has(const std::string& key) const { return tree_.find(key) != tree_.not_found(); }

    std::string text(const std::string& key)
    {
        used_.insert(key);
        const auto it = tree_.find(key);
        if (it == tree_.not_found()) {
            fail(key, "missing");
        }
        return it->second.data();
    }

    template <class T> T get(const std::string& key)
    {
        const std::string raw = text(key);
        try {
            return boost::lexical_cast<T>(raw);
        } catch (const boost::bad_lexical_cast&) {
            fail(key, "cannot parse '" + raw + "'");
        }
    }

    template <class T> T get(const std::string& key, T fallback)
    {
        return has(key) ? get<T>(key) : fallback;
    }

    template <class T> std::vector<T> list(const std::string& key)
    {
        std::vector<std::string> parts;
        const std::string raw = text(key);
        boost::split(parts, raw, boost::is_any_of(","));
        std::vector<T> out;
        for (auto& p : parts) {
            boost::trim(p);
            if (p.empty()) {
                continue;
            }
            try {
                out.push_back(boost::lexical_cast<T>(p));
            } catch (const boost::bad_lexical_cast&) {
                fail(key, "cannot parse list entry '" + p + "'");
            }
        }
        return out;
    }

    template <class T> std::vector<T> list(const std::string& key, std::vector<T> fallback)
    {
        return has(key) ? list<T>(key) : fallback;
    }

    void finish() const
    {
        for (const auto& [key, value] : tree_) {
            if (!used_.contains(key)) {
                fail(key, "unknown key");
            }
        }
    }

    [[noreturn]] void fail(const std::string& key, const std::string& why) const
    {
        throw ConfigError(origin_ + ": [" + name_ + "] " + key + ": " + why);
    }

private:
    const ptree& tree_;
    std::string name_;
    std::string origin_;
    std::set<std::string> used_;
};

bool parse_bool(const std::string& s)
{
    const std::string v = boost::to_lower_copy(s);
    if (v == "true" || v == "yes" || v == "1") {
        return true;
    }
    if (v == "false" || v == "no" || v == "0") {
        return false;
    }
    throw ConfigError("not a boolean: '" + s + "'");
}

GroupSpec parse_group(Section& s, int antennas)
{
    GroupSpec g;
    g.covariance.antennas = antennas;
    const std::string model = s.text("model");
    if (model == "dft") {
        DftColumns d;
        d.first = s.get<int>("first_column") - 1;
        d.eigenvalues = s.list<double>("eigenvalues");
        g.covariance.model = std::move(d);
    } else if (model == "exp") {
        g.covariance.model = ExpCorrelation{s.get<double>("nu")};
    } else if (model == "one-ring") {
        constexpr double deg = 3.14159265358979323846 / 180.0;
        g.covariance.model =
            OneRing{s.get<double>("aoa_deg") * deg, s.get<double>("spread_deg") * deg, s.get<double>("spacing", 0.5)};
    } else {
        s.fail("model", "expected dft, exp or one-ring, got '" + model + "'");
    }
    g.rank = s.get<int>("rank", 0);
    g.served_beams = s.get<int>("served_beams");
    s.finish();
    return g;
}

} // namespace

double ScenarioSpec::power() const noexcept
{
    return std::pow(10.0, power_db / 10.0);
}

ScenarioSpec parse_scenario(const std::string& text, const std::string& origin)
{
    ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }

    ScenarioSpec spec;
    const auto top = tree.find("scenario");
    if (top == tree.not_found()) {
        throw ConfigError(origin + ": missing [scenario] section");
    }
    Section s(top->second, "scenario", origin);
    spec.name = s.text("name");
    spec.antennas = s.get<int>("antennas");
    spec.power_db = s.get<double>("power_db");
    spec.trials = s.get<long>("trials", 100);
    spec.seed = s.get<std::uint64_t>("seed", 1);
    spec.k_grid = s.list<long>("k_grid", {});
    spec.bd_tol = s.get<double>("bd_tol", 1e-9);
    if (s.has("bd_waive")) {
        spec.bd_waive = parse_bool(s.text("bd_waive"));
    }
    const std::string mode = s.get<std::string>("power_mode", "equal");
    if (mode == "equal") {
        spec.power_mode = PowerMode::Equal;
    } else if (mode == "waterfill") {
        spec.power_mode = PowerMode::WaterFill;
    } else {
        s.fail("power_mode", "expected equal or waterfill");
    }
    spec.integer_weight = s.get<double>("integer_weight", 1.0);
    spec.nu_sweep = s.list<double>("nu_sweep", {});
    spec.sweep_k = s.get<long>("sweep_k", 0);
    s.finish();
    if (spec.antennas < 1 || spec.trials < 1) {
        throw ConfigError(origin + ": antennas and trials must be positive");
    }

    std::set<std::string> known{"scenario"};
    for (auto& [key, child] : tree) {
        if (key.rfind("group", 0) == 0) {
            known.insert(key);
            Section g(child, key, origin);
            spec.groups.push_back(parse_group(g, spec.antennas));
        }
    }
    if (spec.groups.empty()) {
        throw ConfigError(origin + ": no [group...] section");
    }

    if (const auto it = tree.find("schemes"); it != tree.not_found()) {
        known.insert("schemes");
        Section sc(it->second, "schemes", origin);
        spec.schemes = sc.list<std::string>("list");
        for (const auto& name : spec.schemes) {
            if (std::find(kSchemes.begin(), kSchemes.end(), name) == kSchemes.end()) {
                sc.fail("list", "unknown scheme '" + name + "'");
            }
        }
        spec.alpha_grid = sc.list<double>("alpha_grid", {});
        spec.gamma_grid = sc.list<double>("gamma_grid", {});
        sc.finish();
    }

    if (const auto it = tree.find("fairness"); it != tree.not_found()) {
        known.insert("fairness");
        Section f(it->second, "fairness", origin);
        FairnessSpec fs;
        fs.users = f.get<int>("users", fs.users);
        fs.intervals = f.get<long>("intervals", fs.intervals);
        fs.gain_low_db = f.get<double>("gain_low_db", fs.gain_low_db);
        fs.gain_high_db = f.get<double>("gain_high_db", fs.gain_high_db);
        fs.nu = f.list<double>("nu");
        fs.delta_up = f.list<double>("delta_up");
        fs.down_ratio = f.list<double>("down_ratio");
        fs.delta = f.get<double>("delta", fs.delta);
        fs.mu_init = f.get<double>("mu_init", fs.mu_init);
        fs.gamma = f.get<double>("gamma", fs.gamma);
        f.finish();
        if (fs.nu.size() != fs.delta_up.size() || fs.nu.size() != fs.down_ratio.size()) {
            throw ConfigError(origin + ": [fairness] nu, delta_up and down_ratio need equal lengths");
        }
        spec.fairness = std::move(fs);
    }

    for (const auto& [key, child] : tree) {
        if (!known.contains(key)) {
            throw ConfigError(origin + ": unknown section [" + key + "]");
        }
    }
    if (spec.k_grid.empty() && !spec.fairness) {
        throw ConfigError(origin + ": k_grid is required");
    }
    for (double a : spec.alpha_grid) {
        if (!(a > 0.0 && a < 1.0)) {
            throw ConfigError(origin + ": alpha_grid entries must lie in (0, 1)");
        }
    }
    for (double g : spec.gamma_grid) {
        if (!(g > 0.0 && g <= 1.0)) {
            throw ConfigError(origin + ": gamma_grid entries must lie in (0, 1]");
        }
    }
    return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("cannot open scenario " + file.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str(), file.string());
}

std::vector<GroupProfile> build_profiles(const ScenarioSpec& spec, long K, std::optional<double> nu)
{
    const auto G = static_cast<long>(spec.groups.size());
    if (K < G || K % G != 0) {
        throw ConfigError("K = " + std::to_string(K) + " does not split equally over " + std::to_string(G) +
                          " groups");
    }
    std::vector<GroupProfile> out;
    for (long g = 0; g < G; ++g) {
        GroupSpec gs = spec.groups[static_cast<std::size_t>(g)];
        if (nu) {
            if (auto* e = std::get_if<ExpCorrelation>(&gs.covariance.model)) {
                e->nu = *nu;
            }
        }
        int served = gs.served_beams;
        if (gs.rank == 0 && !std::holds_alternative<DftColumns>(gs.covariance.model)) {
            // A rank-deficient channel (nu = 1) cannot carry more beams than its rank.
            served = std::min(served, numerical_rank(build_covariance(gs.covariance)));
        }
        out.push_back(GroupProfile::from_covariance(static_cast<int>(g), gs.covariance, gs.rank, served,
                                                    static_cast<int>(K / G)));
    }
    return out;
}

double per_beam_power(const ScenarioSpec& spec, std::span<const GroupProfile> groups)
{
    int beams = 0;
    for (const auto& g : groups) {
        beams += g.served_beams();
    }
    return spec.power() / beams;
}

} // namespace jsdm::harness
