// qubosc: switching-frequency sweeps, method comparison and single-frequency slices.
//
//   qubosc sweep   [options]   heatmap over the ws grid      -> sweep.csv
//   qubosc compare [options]   heatmap plus deviation tables -> heatmap.csv, compare.csv, resonance.csv
//   qubosc slice   [options]   one ws value (--ws)           -> slice.csv
//
// --config <file> reads key=value lines with the same keys as the long flags;
// flags given on the command line take precedence.

#include "qubosc/qubosc.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace {

const std::set<std::string> kConfigKeys{
    "omega0",      "omegar",        "g0",        "ws",     "ws-min",  "ws-max",
    "ws-steps",    "tmax",          "steps",     "method", "trotter-steps", "coupling-scheme",
    "pert-channel", "out",          "format",    "seedless", "allow-perturbative-overflow"};

struct Options {
    double omega0{5.0};
    double omegar{6.0};
    double g0{0.1};
    std::optional<double> ws;
    std::optional<double> ws_min;
    std::optional<double> ws_max;
    int ws_steps{101};
    double tmax{20.0};
    int steps{2000};
    std::string method;
    int trotter_steps{256};
    std::string coupling_scheme{"half"};
    std::string pert_channel{"oracle"};
    std::string out{"."};
    std::string format{"csv"};
    bool seedless{false};
    bool allow_overflow{false};
};

// Config entries become "--key=value" tokens placed ahead of the command
// line, so later command-line values win under the take-last policy.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read config file " + path);
    std::vector<std::string> out;
    for (const auto& [key, value] : qubosc::read_key_value_config(is, path)) {
        if (!kConfigKeys.count(key)) throw std::runtime_error(path + ": unknown key '" + key + "'");
        out.push_back("--" + key + "=" + value);
    }
    out.insert(out.end(), args.begin(), args.end());
    return out;
}

std::vector<qubosc::Method> parse_methods(const std::string& list, const std::string& fallback) {
    std::vector<qubosc::Method> ms;
    std::stringstream ss(list.empty() ? fallback : list);
    std::string name;
    while (std::getline(ss, name, ',')) {
        if (name.empty()) continue;
        const auto m = qubosc::parse_method(name);
        if (!m) {
            std::string known;
            for (auto k : qubosc::kAllMethods) known += (known.empty() ? "" : ", ") + std::string(qubosc::method_name(k));
            throw CLI::ValidationError("--method", "unknown method '" + name + "' (known: " + known + ")");
        }
        ms.push_back(*m);
    }
    if (ms.empty()) throw CLI::ValidationError("--method", "no methods given");
    return ms;
}

qubosc::SweepConfig build_config(const Options& o, const std::string& command) {
    qubosc::SystemParams base;
    base.omega0 = {o.omega0};
    base.omega_r = o.omegar;
    base.g0 = o.g0;
    base.validate();

    qubosc::SweepConfig cfg = qubosc::SweepConfig::defaults(base);
    const double om = base.omega_plus();
    if (command == "slice") {
        cfg.varpi_grid = {o.ws.value_or(om)};
    } else {
        const double lo = o.ws_min.value_or(0.5 * om);
        const double hi = o.ws_max.value_or(1.5 * om);
        if (!(hi >= lo)) throw CLI::ValidationError("--ws-max", "must not be below --ws-min");
        if (o.ws_steps < 1) throw CLI::ValidationError("--ws-steps", "must be at least 1");
        cfg.varpi_grid = qubosc::uniform_grid(lo, hi, o.ws_steps);
    }
    cfg.time = qubosc::TimeGrid{0.0, o.tmax, o.steps};
    cfg.methods = parse_methods(o.method, command == "compare" ? "floquet_exact,ode" : "ode");
    cfg.trotter.steps_per_period = o.trotter_steps;
    cfg.trotter.scheme =
        o.coupling_scheme == "sampled" ? qubosc::CouplingScheme::SampledCosine : qubosc::CouplingScheme::HalfPeriodAveraged;
    cfg.pert_channel =
        o.pert_channel == "paper" ? qubosc::PerturbationChannel::ClosedForm : qubosc::PerturbationChannel::Oracle;
    cfg.validate();
    return cfg;
}

void report_failures(const qubosc::SweepResult& r) {
    for (const auto& f : r.meta.failures) std::cerr << "warning: " << f << '\n';
}

int run(const std::string& command, const Options& o) {
    const qubosc::SweepConfig cfg = build_config(o, command);
    const qubosc::SweepResult r = qubosc::run_sweep(cfg);
    report_failures(r);
    qubosc::check_probability_bounds(r, o.allow_overflow);
    if (command == "compare") {
        auto methods = qubosc::sorted_by_name(cfg.methods);
        methods.erase(std::unique(methods.begin(), methods.end()), methods.end());
        if (methods.size() < 2) throw CLI::ValidationError("--method", "compare needs at least two distinct methods");
        std::cout << qubosc::emit_sweep(r, o.out, "heatmap").string() << '\n';
        qubosc::emit_report(qubosc::compare_sweep(r, qubosc::default_short_window(cfg.base)), o.out);
        std::cout << (std::filesystem::path(o.out) / "compare.csv").string() << '\n'
                  << (std::filesystem::path(o.out) / "resonance.csv").string() << '\n';
    } else {
        std::cout << qubosc::emit_sweep(r, o.out, command, command == "slice").string() << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Qubit-resonator excitation under a switched coupling", "qubosc"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    Options o;
    std::string config_path;
    app.add_option("--config", config_path, "key=value file with the same keys as the flags");
    app.add_option("--omega0", o.omega0, "qubit frequency (rad/ns)")->capture_default_str();
    app.add_option("--omegar", o.omegar, "resonator frequency (rad/ns)")->capture_default_str();
    app.add_option("--g0", o.g0, "coupling amplitude (rad/ns)")->capture_default_str()->check(CLI::NonNegativeNumber);
    app.add_option("--ws", o.ws, "switching frequency for slice (default omega0 + omegar)");
    app.add_option("--ws-min", o.ws_min, "lower end of the ws grid (default (omega0 + omegar)/2)");
    app.add_option("--ws-max", o.ws_max, "upper end of the ws grid (default 3(omega0 + omegar)/2)");
    app.add_option("--ws-steps", o.ws_steps, "number of ws grid points")->capture_default_str();
    app.add_option("--tmax", o.tmax, "final time (ns)")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--steps", o.steps, "time grid intervals")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--method", o.method, "comma-separated methods (default ode; compare: floquet_exact,ode)");
    app.add_option("--trotter-steps", o.trotter_steps, "Trotter steps per period")->capture_default_str();
    app.add_option("--coupling-scheme", o.coupling_scheme, "Trotter coupling scheme")
        ->capture_default_str()
        ->check(CLI::IsMember({"half", "sampled"}));
    app.add_option("--pert-channel", o.pert_channel, "perturbative channel")
        ->capture_default_str()
        ->check(CLI::IsMember({"oracle", "paper"}));
    app.add_option("--out", o.out, "output directory")->capture_default_str();
    app.add_option("--format", o.format, "output format")->capture_default_str()->check(CLI::IsMember({"csv"}));
    app.add_flag("--seedless", o.seedless, "accepted for compatibility; no randomness is used");
    app.add_flag("--allow-perturbative-overflow", o.allow_overflow,
                 "emit perturbative probabilities above 1 instead of failing");

    app.add_subcommand("sweep", "P_e1(ws, t) heatmap over the ws grid")->fallthrough();
    app.add_subcommand("compare", "heatmap plus pairwise deviations and resonance estimates")->fallthrough();
    app.add_subcommand("slice", "P_e1(t) at a single ws (--ws)")->fallthrough();

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = expand_config(args);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 2;
    }
    std::reverse(args.begin(), args.end());  // CLI11 consumes the vector from the back

    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return run(command, o);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
}
