// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "jsdm/beamforming.hpp"
#include "jsdm/channel_model.hpp"

namespace jsdm::harness {

struct GroupSpec {
    CovarianceSpec covariance;
    int rank = 0;         ///< eigenpairs kept; 0 = numerical rank
    int served_beams = 0; ///< r*; clipped to the rank when the channel is rank deficient
};

/// Proportional-fair study over one exponentially correlated group.
struct FairnessSpec {
    int users = 50;
    long intervals = 10'000;
    double gain_low_db = 0.0;  ///< large-scale gain of the weakest user
    double gain_high_db = 20.0;
    std::vector<double> nu;         ///< one study per entry
    std::vector<double> delta_up;   ///< per study
    std::vector<double> down_ratio; ///< delta_down = delta_up / ratio, per study
    double delta = 0.01;
    double mu_init = 0.1;
    double gamma = 0.4; ///< hyperslab of the SUS baseline
};

struct ScenarioSpec {
    std::string name;
    int antennas = 0;
    double power_db = 0.0;
    long trials = 0;
    std::uint64_t seed = 1;
    std::vector<long> k_grid;
    std::vector<GroupSpec> groups;
    std::vector<std::string> schemes;
    std::vector<double> alpha_grid;
    std::vector<double> gamma_grid;
    double bd_tol = 1e-9;
    bool bd_waive = false;
    PowerMode power_mode = PowerMode::Equal;
    double integer_weight = 1.0;
    std::vector<double> nu_sweep; ///< re-run every K with ExpCorrelation groups at each nu
    long sweep_k = 0;             ///< K used for the nu sweep (0 = the K grid)
    std::optional<FairnessSpec> fairness;

    double power() const noexcept;
};

/// Schemes understood by the runner.
inline const std::vector<std::string> kSchemes{"redos", "sus-norm", "sus-qsinr", "rbf", "dpc-greedy"};

/// Parses an INI scenario. Throws ConfigError with the offending key.
ScenarioSpec load_scenario(const std::filesystem::path& file);
ScenarioSpec parse_scenario(const std::string& text, const std::string& origin = "<string>");

/// Group profiles for K users split equally over the groups. A nu override
/// replaces the parameter of every ExpCorrelation group.
std::vector<GroupProfile> build_profiles(const ScenarioSpec& spec, long K, std::optional<double> nu = {});

/// P / sum_g r_g*.
double per_beam_power(const ScenarioSpec& spec, std::span<const GroupProfile> groups);

} // namespace jsdm::harness
