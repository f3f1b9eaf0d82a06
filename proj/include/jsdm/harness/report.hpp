// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "jsdm/harness/runner.hpp"

namespace jsdm::harness {

inline constexpr const char* kCsvHeader =
    "scenario,scheme,K,param_alpha,param_gamma,mean_sum_rate_bits,stderr,mean_feedback_units,trials,seed";

void write_csv(std::ostream& os, std::span<const Cell> cells);
void write_csv(const std::filesystem::path& file, std::span<const Cell> cells);

void write_fairness_csv(const std::filesystem::path& file, const FairnessResult& result);

/// A row of a result CSV, as read back for plotting.
struct CsvRow {
    std::string scenario;
    std::string scheme;
    long K = 0;
    double alpha = 0.0;
    double gamma = 0.0;
    double mean = 0.0;
    double stderr = 0.0;
    double feedback = 0.0;
    long trials = 0;
};

std::vector<CsvRow> read_csv(const std::filesystem::path& file);

/// Writes SVG line charts for a result CSV into `out_dir` and returns the
/// files written: sum rate and feedback against K for each scenario, and sum
/// rate against nu for "<name>@nu=" sweeps.
std::vector<std::filesystem::path> plot_csv(const std::filesystem::path& csv, const std::filesystem::path& out_dir);

} // namespace jsdm::harness
