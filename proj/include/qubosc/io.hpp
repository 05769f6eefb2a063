// io.hpp: CSV heatmaps, comparison tables, gnuplot scripts and run metadata
//
// Heatmap CSV: header "varpi_s,t,p_e1,method", LF line endings, floats with
// 17 significant digits, rows ordered by (varpi_s, t, method name).

#pragma once

#include "qubosc/experiments.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qubosc {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_heatmap_csv(const SweepResult& r, std::ostream& os) {
    const std::vector<Method> ms = sorted_by_name(r.methods());
    os << "varpi_s,t,p_e1,method\n";
    for (std::size_t i = 0; i < r.varpi_grid.size(); ++i) {
        const std::string w = format_double(r.varpi_grid[i]);
        for (std::size_t n = 0; n < r.times.size(); ++n) {
            const std::string t = format_double(r.times[n]);
            for (Method m : ms) {
                os << w << ',' << t << ','
                   << format_double(r.p_e1.at(m)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n))) << ','
                   << method_name(m) << '\n';
            }
        }
    }
}

struct HeatmapRow {
    double varpi_s;
    double t;
    double p_e1;
    std::string method;
};

inline std::vector<HeatmapRow> read_heatmap_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "varpi_s,t,p_e1,method")
        throw std::runtime_error("read_heatmap_csv: missing or unexpected header");
    std::vector<HeatmapRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string a, b, c, d;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c, ',') || !std::getline(ls, d))
            throw std::runtime_error("read_heatmap_csv: malformed row: " + line);
        rows.push_back({std::stod(a), std::stod(b), std::stod(c), d});
    }
    return rows;
}

// Plain-text key=value lines; blank lines and lines starting with '#' are
// skipped, whitespace around keys and values is trimmed.
inline std::vector<std::pair<std::string, std::string>> read_key_value_config(std::istream& is,
                                                                             const std::string& origin = "config") {
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string{};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(t.substr(0, eq));
        if (key.empty()) throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": empty key");
        out.emplace_back(std::move(key), trim(t.substr(eq + 1)));
    }
    return out;
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return os;
}

inline void finish_output(std::ofstream& os, const std::filesystem::path& path) {
    os.flush();
    if (!os) throw std::runtime_error("failed writing " + path.string());
}

inline void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace detail

inline std::string gnuplot_heatmap_script(const std::string& csv_name, const std::vector<Method>& methods) {
    std::ostringstream os;
    os << "# gnuplot script for " << csv_name << "\n"
       << "set datafile separator ','\n"
       << "set xlabel 't (ns)'\nset ylabel 'varpi_s (rad/ns)'\nset cblabel 'P_{e,1}'\n"
       << "set view map\n";
    for (Method m : methods) {
        os << "set title '" << method_name(m) << "'\n"
           << "set terminal pngcairo size 900,600\n"
           << "set output '" << csv_name << "." << method_name(m) << ".png'\n"
           << "splot '" << csv_name << "' skip 1 using 2:1:(strcol(4) eq '" << method_name(m)
           << "' ? $3 : 1/0) with points pointtype 5 pointsize 0.3 palette notitle\n";
    }
    return os.str();
}

inline std::string gnuplot_slice_script(const std::string& csv_name, const std::vector<Method>& methods) {
    std::ostringstream os;
    os << "# gnuplot script for " << csv_name << "\n"
       << "set datafile separator ','\n"
       << "set xlabel 't (ns)'\nset ylabel 'P_{e,1}'\n"
       << "set terminal pngcairo size 900,600\n"
       << "set output '" << csv_name << ".png'\n"
       << "plot ";
    for (std::size_t i = 0; i < methods.size(); ++i) {
        if (i) os << ", \\\n     ";
        os << "'" << csv_name << "' skip 1 using 2:(strcol(4) eq '" << method_name(methods[i])
           << "' ? $3 : 1/0) with lines title '" << method_name(methods[i]) << "'";
    }
    os << '\n';
    return os.str();
}

inline nlohmann::json metadata_json(const SweepMetadata& meta) {
    nlohmann::json j;
    j["version"] = meta.version;
    j["started_at"] = meta.started_at;
    j["finished_at"] = meta.finished_at;
    j["methods"] = meta.methods;
    j["failures"] = meta.failures;
    j["params"] = {{"omega0", meta.params.omega0},
                   {"omega_r", meta.params.omega_r},
                   {"g0", meta.params.g0},
                   {"photon_cutoff", meta.params.photon_cutoff}};
    return j;
}

// Writes <stem>.csv, <stem>.gp and <stem>.meta.json under dir.
// Only the CSV is byte-reproducible; the metadata carries wall-clock times.
inline std::filesystem::path emit_sweep(const SweepResult& r, const std::filesystem::path& dir, const std::string& stem,
                                        bool slice = false) {
    detail::ensure_directory(dir);
    const std::filesystem::path csv = dir / (stem + ".csv");
    {
        auto os = detail::open_output(csv);
        write_heatmap_csv(r, os);
        detail::finish_output(os, csv);
    }
    const std::filesystem::path gp = dir / (stem + ".gp");
    {
        auto os = detail::open_output(gp);
        const auto ms = sorted_by_name(r.methods());
        os << (slice ? gnuplot_slice_script(csv.filename().string(), ms)
                     : gnuplot_heatmap_script(csv.filename().string(), ms));
        detail::finish_output(os, gp);
    }
    const std::filesystem::path meta = dir / (stem + ".meta.json");
    {
        auto os = detail::open_output(meta);
        os << metadata_json(r.meta).dump(2) << '\n';
        detail::finish_output(os, meta);
    }
    return csv;
}

inline void write_comparison_csv(const ComparisonReport& rep, std::ostream& os) {
    os << "method_a,method_b,t_short,max_dev_short,max_dev_full\n";
    for (const auto& p : rep.pairs) {
        os << method_name(p.a) << ',' << method_name(p.b) << ',' << format_double(rep.t_short) << ','
           << format_double(p.short_window) << ',' << format_double(p.full_window) << '\n';
    }
}

inline void write_resonance_csv(const ComparisonReport& rep, std::ostream& os) {
    os << "method,varpi_s_at_max\n";
    for (const auto& [m, w] : rep.resonance) os << method_name(m) << ',' << format_double(w) << '\n';
}

// Writes compare.csv and resonance.csv under dir.
inline void emit_report(const ComparisonReport& rep, const std::filesystem::path& dir) {
    detail::ensure_directory(dir);
    const std::filesystem::path cmp = dir / "compare.csv";
    {
        auto os = detail::open_output(cmp);
        write_comparison_csv(rep, os);
        detail::finish_output(os, cmp);
    }
    const std::filesystem::path res = dir / "resonance.csv";
    {
        auto os = detail::open_output(res);
        write_resonance_csv(rep, os);
        detail::finish_output(os, res);
    }
}

}  // namespace qubosc
