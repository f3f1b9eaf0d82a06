// SPDX-License-Identifier: Apache-2.0
#include "jsdm/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/lexical_cast.hpp>

namespace jsdm::harness {

namespace {

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points; ///< (x, y), x ascending
};

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

/// Minimal standalone SVG line chart.
void write_chart(const std::filesystem::path& file, const std::string& title, const std::string& x_label,
                 const std::string& y_label, bool log_x, std::vector<Series> series)
{
    constexpr double W = 640, H = 420, L = 70, R = 170, T = 40, B = 55;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    auto tx = [&](double x) { return log_x ? std::log10(x) : x; };
    for (const auto& s : series) {
        for (auto [x, y] : s.points) {
            x0 = std::min(x0, tx(x));
            x1 = std::max(x1, tx(x));
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (!(x1 > x0)) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    const double pad = y1 > y0 ? 0.05 * (y1 - y0) : 0.5;
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return L + (tx(x) - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    std::ofstream out(file);
    if (!out) {
        throw ConfigError("cannot write " + file.string());
    }
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n"
        << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double y = y0 + (y1 - y0) * i / 4.0;
        out << "<text x=\"" << L - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << std::setprecision(3)
            << y << "</text>\n";
        const double xv = x0 + (x1 - x0) * i / 4.0;
        const double shown = log_x ? std::pow(10.0, xv) : xv;
        out << "<text x=\"" << L + (xv - x0) / (x1 - x0) * (W - L - R) << "\" y=\"" << H - B + 16
            << "\" text-anchor=\"middle\">" << std::setprecision(3) << shown << "</text>\n";
    }
    out << "<text x=\"" << (W - R + L) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << x_label
        << "</text>\n"
        << "<text x=\"16\" y=\"" << (H - B + T) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << (H - B + T) / 2 << ")\">" << y_label << "</text>\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* colour = kPalette[i % std::size(kPalette)];
        std::ostringstream pts;
        for (auto [x, y] : series[i].points) {
            pts << px(x) << ',' << py(y) << ' ';
        }
        out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"" << pts.str()
            << "\"/>\n";
        for (auto [x, y] : series[i].points) {
            out << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
        }
        const double ly = T + 16 + 18.0 * static_cast<double>(i);
        out << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R + 36 << "\" y2=\""
            << ly - 4 << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << W - R + 42 << "\" y=\"" << ly << "\">" << series[i].name << "</text>\n";
    }
    out << "</svg>\n";
}

bool headline(const CsvRow& r)
{
    const bool opt = r.scheme.size() > 4 && r.scheme.ends_with("-opt");
    return opt || (std::isnan(r.alpha) && std::isnan(r.gamma));
}

std::vector<Series> collect(const std::vector<const CsvRow*>& rows, double (*x)(const CsvRow&), double (*y)(const CsvRow&))
{
    std::map<std::string, Series> by_scheme;
    std::vector<std::string> order;
    for (const auto* r : rows) {
        if (!by_scheme.contains(r->scheme)) {
            order.push_back(r->scheme);
            by_scheme[r->scheme].name = r->scheme;
        }
        by_scheme[r->scheme].points.emplace_back(x(*r), y(*r));
    }
    std::vector<Series> out;
    for (const auto& name : order) {
        auto s = by_scheme[name];
        std::sort(s.points.begin(), s.points.end());
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace

std::vector<std::filesystem::path> plot_csv(const std::filesystem::path& csv, const std::filesystem::path& out_dir)
{
    const auto rows = read_csv(csv);
    std::filesystem::create_directories(out_dir);
    std::map<std::string, std::vector<const CsvRow*>> by_k;  // plain scenarios
    std::map<std::string, std::vector<const CsvRow*>> by_nu; // "<name>@nu=" sweeps, keyed by name and K
    for (const auto& r : rows) {
        if (!headline(r)) {
            continue;
        }
        const auto at = r.scenario.find("@nu=");
        if (at == std::string::npos) {
            by_k[r.scenario].push_back(&r);
        } else {
            by_nu[r.scenario.substr(0, at) + "-K" + std::to_string(r.K)].push_back(&r);
        }
    }
    std::vector<std::filesystem::path> written;
    auto k_of = [](const CsvRow& r) { return static_cast<double>(r.K); };
    auto rate_of = [](const CsvRow& r) { return r.mean; };
    auto fb_of = [](const CsvRow& r) { return r.feedback; };
    for (const auto& [name, list] : by_k) {
        auto file = out_dir / (name + "_sum_rate.svg");
        write_chart(file, name + ": average sum rate", "K", "sum rate [bit/s/Hz]", true, collect(list, +k_of, +rate_of));
        written.push_back(file);
        file = out_dir / (name + "_feedback.svg");
        write_chart(file, name + ": feedback", "K", "feedback units", true, collect(list, +k_of, +fb_of));
        written.push_back(file);
    }
    auto nu_of = [](const CsvRow& r) {
        return boost::lexical_cast<double>(r.scenario.substr(r.scenario.find("@nu=") + 4));
    };
    for (const auto& [name, list] : by_nu) {
        const auto file = out_dir / (name + "_sum_rate_vs_nu.svg");
        write_chart(file, name + ": average sum rate", "nu", "sum rate [bit/s/Hz]", false,
                    collect(list, +nu_of, +rate_of));
        written.push_back(file);
    }
    return written;
}

} // namespace jsdm::harness
