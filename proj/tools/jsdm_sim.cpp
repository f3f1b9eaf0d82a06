// SPDX-License-Identifier: Apache-2.0
// Batch driver: runs scenario files, alpha sweeps, the theory checks and plots.

#include <filesystem>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "jsdm/harness/report.hpp"
#include "jsdm/harness/runner.hpp"
#include "jsdm/harness/scenario.hpp"
#include "jsdm/harness/verify.hpp"
#include "jsdm/kernels/kernels.hpp"

namespace fs = std::filesystem;
using namespace jsdm;
using namespace jsdm::harness;

namespace {

constexpr int kExitError = 1;
constexpr int kExitBd = 2;
constexpr int kExitInvariant = 3;

std::vector<double> parse_grid(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(std::stod(item));
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Two-stage MU-MIMO scheduling simulator"};
    app.require_subcommand(1);

    RunOptions opt;
    std::uint64_t seed = 0;
    std::string out_dir = "results";
    app.add_option("--seed", seed, "Override the scenario seed");
    app.add_option("--trials", opt.trials, "Override the trial (or interval) count");
    app.add_option("--threads", opt.threads, "Worker threads, 0 = all cores")->capture_default_str();
    app.add_option("--out-dir", out_dir, "Output directory")->capture_default_str();

    std::string scenario_file;
    auto* run = app.add_subcommand("run", "Run a scenario file and write <name>.csv");
    run->add_option("scenario", scenario_file, "Scenario file")->required()->check(CLI::ExistingFile);

    std::string sweep_file;
    std::string grid_text;
    auto* sweep = app.add_subcommand("sweep-alpha", "ReDOS-PBR sum rate against alpha for every K");
    sweep->add_option("scenario", sweep_file, "Scenario file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--alpha-grid", grid_text, "Comma-separated alphas (default: the scenario grid)");

    auto* verify = app.add_subcommand("verify", "Run the theory checks");

    std::string csv_file;
    auto* plot = app.add_subcommand("plot", "Render SVG charts from a result CSV");
    plot->add_option("csv", csv_file, "Result CSV")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);
    if (app.count("--seed") > 0) {
        opt.seed = seed;
    }

    try {
        if (*run) {
            const ScenarioSpec spec = load_scenario(scenario_file);
            if (spec.fairness) {
                const FairnessResult r = run_fairness(spec, opt);
                const fs::path file = fs::path(out_dir) / (spec.name + "_fairness.csv");
                write_fairness_csv(file, r);
                for (const auto& t : r.totals) {
                    std::cout << t.scenario << ' ' << t.variant << " feedback_units=" << t.feedback_units << '\n';
                }
                std::cout << "wrote " << file.string() << '\n';
            } else {
                const auto cells = run_scenario(spec, opt);
                const fs::path file = fs::path(out_dir) / (spec.name + ".csv");
                write_csv(file, cells);
                std::cout << "wrote " << file.string() << " (" << cells.size() << " rows)\n";
            }
        } else if (*sweep) {
            const ScenarioSpec spec = load_scenario(sweep_file);
            const std::vector<double> grid = grid_text.empty() ? spec.alpha_grid : parse_grid(grid_text);
            const AlphaSweep s = alpha_sweep(spec, grid, opt);
            auto cells = s.cells;
            auto best = optimized(cells);
            cells.insert(cells.end(), best.begin(), best.end());
            const fs::path file = fs::path(out_dir) / (spec.name + "_alpha.csv");
            write_csv(file, cells);
            for (std::size_t i = 0; i < s.K.size(); ++i) {
                std::cout << "K=" << s.K[i] << " best alpha=" << s.best_alpha[i] << '\n';
            }
            std::cout << "wrote " << file.string() << '\n';
        } else if (*verify) {
            std::cout << "kernels: " << kernels::active().name << '\n';
            bool ok = true;
            for (const auto& line : verify_theory(opt.seed.value_or(1), opt.threads)) {
                std::cout << (line.pass ? "PASS " : "FAIL ") << line.name << ": " << line.detail << '\n';
                ok = ok && line.pass;
            }
            return ok ? 0 : kExitInvariant;
        } else if (*plot) {
            for (const auto& f : plot_csv(csv_file, out_dir)) {
                std::cout << "wrote " << f.string() << '\n';
            }
        }
    } catch (const BdCheckError& e) {
        std::cerr << "block-diagonalization check failed: " << e.what() << '\n';
        return kExitBd;
    } catch (const InvariantError& e) {
        std::cerr << "invariant violated: " << e.what() << '\n';
        return *verify ? kExitInvariant : kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return 0;
}
