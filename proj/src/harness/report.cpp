// SPDX-License-Identifier: Apache-2.0
#include "jsdm/harness/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>

namespace jsdm::harness {

namespace {

std::string param(double v)
{
    if (std::isnan(v)) {
        return "";
    }
    std::ostringstream os;
    os << v;
    return os.str();
}

std::ofstream open_out(const std::filesystem::path& file)
{
    if (file.has_parent_path()) {
        std::filesystem::create_directories(file.parent_path());
    }
    std::ofstream out(file);
    if (!out) {
        throw ConfigError("cannot write " + file.string());
    }
    return out;
}

} // namespace

void write_csv(std::ostream& os, std::span<const Cell> cells)
{
    os << kCsvHeader << '\n';
    os << std::setprecision(10);
    for (const auto& c : cells) {
        os << c.scenario << ',' << c.setting.scheme << ',' << c.K << ',' << param(c.setting.alpha) << ','
           << param(c.setting.gamma) << ',' << c.mean_rate() << ',' << c.stderr_rate() << ',' << c.mean_feedback()
           << ',' << c.trials() << ',' << c.seed << '\n';
    }
}

void write_csv(const std::filesystem::path& file, std::span<const Cell> cells)
{
    auto out = open_out(file);
    write_csv(out, cells);
}

void write_fairness_csv(const std::filesystem::path& file, const FairnessResult& result)
{
    auto out = open_out(file);
    out << "scenario,variant,user,large_scale_gain,served_rate_bits,served_fraction,feedback_reports\n";
    out << std::setprecision(10);
    for (const auto& r : result.rows) {
        out << r.scenario << ',' << r.variant << ',' << r.user << ',' << r.large_scale_gain << ','
            << r.served_rate_bits << ',' << r.served_fraction << ',' << r.feedback_reports << '\n';
    }
}

std::vector<CsvRow> read_csv(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("cannot open " + file.string());
    }
    std::string line;
    if (!std::getline(in, line) || boost::trim_copy(line) != kCsvHeader) {
        throw ConfigError(file.string() + ": unexpected header");
    }
    auto number = [](const std::string& s) { return s.empty() ? std::nan("") : boost::lexical_cast<double>(s); };
    std::vector<CsvRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        boost::trim(line);
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> f;
        boost::split(f, line, boost::is_any_of(","));
        if (f.size() != 10) {
            throw ConfigError(file.string() + ":" + std::to_string(lineno) + ": expected 10 fields");
        }
        try {
            rows.push_back({f[0], f[1], boost::lexical_cast<long>(f[2]), number(f[3]), number(f[4]), number(f[5]),
                            number(f[6]), number(f[7]), boost::lexical_cast<long>(f[8])});
        } catch (const boost::bad_lexical_cast&) {
            throw ConfigError(file.string() + ":" + std::to_string(lineno) + ": malformed number");
        }
    }
    return rows;
}

} // namespace jsdm::harness
