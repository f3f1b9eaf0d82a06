// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jsdm/harness/scenario.hpp"

namespace jsdm::harness {

struct RunOptions {
    long trials = 0;       ///< 0 = the scenario's value
    int threads = 1;       ///< 0 = hardware concurrency
    std::optional<std::uint64_t> seed{};
};

inline constexpr double kNoParam = std::numeric_limits<double>::quiet_NaN();

struct Setting {
    std::string scheme;
    double alpha = kNoParam;
    double gamma = kNoParam;
};

/// One (scenario, scheme, parameter, K) cell with its per-trial samples, so
/// that schemes evaluated on the same draws can be compared pairwise.
struct Cell {
    std::string scenario;
    Setting setting;
    long K = 0;
    std::uint64_t seed = 0;
    std::vector<double> rate_bits;      ///< per trial sum rate
    std::vector<double> feedback_units; ///< per trial uplink cost

    long trials() const noexcept { return static_cast<long>(rate_bits.size()); }
    double mean_rate() const noexcept;
    double stderr_rate() const noexcept;
    double mean_feedback() const noexcept;
};

/// Expands the scenario's scheme list over its alpha / gamma grids.
std::vector<Setting> settings_for(const ScenarioSpec& spec);

/// Runs every setting on the same `trials` draws at one K. Trial t uses the
/// seed derive_key(seed, {K, t}); results do not depend on the thread count.
std::vector<Cell> run_point(const ScenarioSpec& spec, std::span<const GroupProfile> groups, long K,
                            std::span<const Setting> settings, const std::string& label, const RunOptions& options);

/// Best mean rate per (scenario, scheme, K) among the parameterized cells,
/// reported as scheme "<scheme>-opt". Ties go to the smallest parameter.
std::vector<Cell> optimized(std::span<const Cell> cells);

/// Full scenario: BD check (BdCheckError unless waived), every K, the nu
/// sweep when present, and the "-opt" rows appended.
std::vector<Cell> run_scenario(const ScenarioSpec& spec, const RunOptions& options);

struct AlphaSweep {
    std::vector<Cell> cells;     ///< ReDOS-PBR per (K, alpha)
    std::vector<long> K;
    std::vector<double> best_alpha; ///< per K; ties go to the lowest alpha
};

AlphaSweep alpha_sweep(const ScenarioSpec& spec, std::span<const double> alpha_grid, const RunOptions& options);

/// Mean and standard error of a - b over paired trials.
struct PairedDiff {
    double mean = 0.0;
    double stderr = 0.0;
};
PairedDiff paired_difference(const Cell& a, const Cell& b);

/// Proportional-fair study results.
struct FairnessRow {
    std::string scenario;
    std::string variant;
    int user = 0;
    double large_scale_gain = 1.0;
    double served_rate_bits = 0.0; ///< average over all intervals
    double served_fraction = 0.0;
    long feedback_reports = 0;
};

struct FairnessSummary {
    std::string scenario;
    std::string variant;
    double feedback_units = 0.0;
};

struct FairnessResult {
    std::vector<FairnessRow> rows;
    std::vector<FairnessSummary> totals;
};

/// Runs ReDOS-PBR-PF with adaptive alpha, with alpha fixed at alpha_min, and
/// SUS-PF on identical channel draws for each nu of the fairness block.
FairnessResult run_fairness(const ScenarioSpec& spec, const RunOptions& options);

} // namespace jsdm::harness
