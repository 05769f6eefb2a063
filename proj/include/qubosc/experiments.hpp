// experiments.hpp: Switching-frequency sweeps and method comparison

#pragma once

#include "qubosc/floquet.hpp"
#include "qubosc/integrator.hpp"
#include "qubosc/laplace.hpp"
#include "qubosc/model.hpp"
#include "qubosc/perturbation.hpp"
#include "qubosc/trotter.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qubosc {

inline constexpr std::string_view kVersion = "qubosc 1.0.0";

enum class Method { ODE, FloquetExact, FloquetTrotter, TrotterDirect, Perturbation, Laplace };

inline constexpr std::array<Method, 6> kAllMethods{Method::ODE,           Method::FloquetExact,
                                                   Method::FloquetTrotter, Method::TrotterDirect,
                                                   Method::Perturbation,  Method::Laplace};

inline std::string_view method_name(Method m) {
    switch (m) {
        case Method::ODE: return "ode";
        case Method::FloquetExact: return "floquet_exact";
        case Method::FloquetTrotter: return "floquet_trotter";
        case Method::TrotterDirect: return "trotter_direct";
        case Method::Perturbation: return "perturbation";
        case Method::Laplace: return "laplace";
    }
    return "unknown";
}

inline std::optional<Method> parse_method(std::string_view name) {
    for (Method m : kAllMethods)
        if (method_name(m) == name) return m;
    return std::nullopt;
}

// Perturbative channels may exceed unit probability outside their validity.
inline bool is_perturbative(Method m) { return m == Method::Perturbation || m == Method::Laplace; }

// Methods sorted by name, the row order of emitted files.
inline std::vector<Method> sorted_by_name(std::vector<Method> ms) {
    std::sort(ms.begin(), ms.end(), [](Method a, Method b) { return method_name(a) < method_name(b); });
    return ms;
}

inline std::vector<double> uniform_grid(double lo, double hi, int points) {
    if (points < 1) throw std::invalid_argument("uniform_grid: need at least one point");
    if (points == 1) return {lo};
    std::vector<double> g(static_cast<std::size_t>(points));
    const double step = (hi - lo) / (points - 1);
    for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = i == points - 1 ? hi : lo + i * step;
    return g;
}

struct SweepConfig {
    SystemParams base{};
    std::vector<double> varpi_grid;
    TimeGrid time{0.0, 20.0, 2000};
    std::vector<Method> methods{Method::ODE};
    std::optional<BasisIndex> initial_state;  // default |ground>
    std::optional<BasisIndex> target_state;   // default |e,1> (first qubit excited, one photon)
    TrotterConfig trotter{};
    PerturbationChannel pert_channel{PerturbationChannel::Oracle};
    double delta{1.0};
    double ode_max_dt{1e-3};

    // 101 points over [Om/2, 3 Om/2].
    static SweepConfig defaults(const SystemParams& base = {}) {
        SweepConfig c;
        c.base = base;
        const double om = base.omega_plus();
        c.varpi_grid = uniform_grid(0.5 * om, 1.5 * om, 101);
        return c;
    }

    BasisIndex initial() const { return initial_state.value_or(ground_label(base)); }
    BasisIndex target() const { return target_state.value_or(excited_one_photon_label(base)); }

    void validate() const {
        base.validate();
        time.validate();
        trotter.validate();
        if (varpi_grid.empty()) throw std::invalid_argument("SweepConfig: empty switching-frequency grid");
        for (double w : varpi_grid)
            if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("SweepConfig: switching frequencies must be positive");
        if (methods.empty()) throw std::invalid_argument("SweepConfig: no methods selected");
        if (time.t0 < 0.0) throw std::invalid_argument("SweepConfig: time grid must start at t >= 0");
        if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("SweepConfig: delta must lie in [0, 1]");
        flat_index(base, initial());
        flat_index(base, target());
    }
};

struct SweepMetadata {
    SystemParams params;
    std::vector<std::string> methods;
    std::string version{kVersion};
    std::string started_at;   // UTC, ISO 8601
    std::string finished_at;
    std::vector<std::string> failures;  // "method @ ws: reason"
};

struct SweepResult {
    std::vector<double> varpi_grid;
    std::vector<double> times;
    std::map<Method, Eigen::MatrixXd> p_e1;  // rows: varpi, cols: time
    SweepMetadata meta;

    std::vector<Method> methods() const {
        std::vector<Method> out;
        for (const auto& [m, _] : p_e1) out.push_back(m);
        return out;
    }
};

namespace detail {

inline std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::vector<double> probabilities_of(const std::vector<StateVector>& states, Eigen::Index k) {
    std::vector<double> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(std::norm(s(k)));
    return out;
}

inline std::vector<double> floquet_curve(const SystemParams& p, const StateVector& psi0, const std::vector<double>& ts,
                                         Eigen::Index target, const OperatorMatrix& monodromy,
                                         const InPeriodPropagator& stepper) {
    const FloquetDecomposition d = floquet_decompose(monodromy, p.period());
    const OverlapCoefficients c = overlaps(d, psi0);
    std::vector<double> out;
    out.reserve(ts.size());
    for (double t : ts) out.push_back(std::norm(evolve_floquet(d, c, t, stepper)(target)));
    return out;
}

inline void require_ground(const SweepConfig& cfg, const char* who) {
    if (!(cfg.initial() == ground_label(cfg.base)))
        throw std::invalid_argument(std::string(who) + ": perturbative methods require the ground initial state");
}

}  // namespace detail

// Target-state probability on the config's time grid for one switching
// frequency and one method.
inline std::vector<double> excitation_curve(const SweepConfig& cfg, double varpi, Method method) {
    const SystemParams p = cfg.base.with_varpi(varpi);
    p.validate();
    const std::vector<double> ts = cfg.time.times();
    const StateVector psi0 = basis_state(p, cfg.initial());
    const Eigen::Index target = flat_index(p, cfg.target());

    switch (method) {
        case Method::ODE: {
            const Trajectory traj = integrate_schrodinger(p, psi0, cfg.time, IntegratorOptions{cfg.ode_max_dt});
            return detail::probabilities_of(traj.states, target);
        }
        case Method::FloquetExact: {
            const ExactPeriodPropagator exact(p, cfg.ode_max_dt);
            return detail::floquet_curve(p, psi0, ts, target, exact.monodromy(),
                                         [&exact](double s) { return exact(s); });
        }
        case Method::FloquetTrotter: {
            const TrotterPropagator trotter(p, cfg.trotter);
            return detail::floquet_curve(p, psi0, ts, target, trotter.monodromy(),
                                         [&trotter](double s) { return trotter(s); });
        }
        case Method::TrotterDirect: {
            // Repeated application of the one-period product, then the
            // partial-period product; no eigendecomposition.
            const TrotterPropagator trotter(p, cfg.trotter);
            const double period = p.period();
            std::vector<double> out;
            out.reserve(ts.size());
            StateVector strobe = psi0;
            double periods_done = 0.0;
            for (double t : ts) {
                double whole = std::floor(t / period);
                double s = t - whole * period;
                if (s >= period * (1.0 - 1e-12)) {
                    whole += 1.0;
                    s = 0.0;
                }
                if (whole < periods_done) {
                    strobe = psi0;
                    periods_done = 0.0;
                }
                while (periods_done < whole) {
                    strobe = trotter.monodromy() * strobe;
                    periods_done += 1.0;
                }
                out.push_back(std::norm((trotter(s) * strobe)(target)));
            }
            return out;
        }
        case Method::Perturbation: {
            detail::require_ground(cfg, "excitation_curve");
            std::vector<double> out;
            out.reserve(ts.size());
            if (cfg.pert_channel == PerturbationChannel::ClosedForm) {
                for (double t : ts) out.push_back(std::norm(cfg.delta * alpha_e1_first_order(p, t)));
                return out;
            }
            if (cfg.time.t0 != 0.0) throw std::invalid_argument("excitation_curve: perturbation grid must start at 0");
            PerturbationConfig pc;
            pc.delta = cfg.delta;
            const Trajectory traj = assemble_wavefunction(perturb_quadrature(p, pc, cfg.time), cfg.delta);
            return detail::probabilities_of(traj.states, target);
        }
        case Method::Laplace: {
            detail::require_ground(cfg, "excitation_curve");
            std::vector<double> out;
            out.reserve(ts.size());
            if (cfg.pert_channel == PerturbationChannel::ClosedForm) {
                for (double t : ts) out.push_back(std::norm(cfg.delta * closed_form_alpha_e1_laplace(p, t)));
                return out;
            }
            const LaplaceSolution sol = laplace_pipeline(p, 2);
            for (double t : ts) {
                cplx a{};
                double w = 1.0;
                for (int j = 0; j <= 2; ++j) {
                    a += w * sol.amplitude(j, target, t);
                    w *= cfg.delta;
                }
                out.push_back(std::norm(a));
            }
            return out;
        }
    }
    throw std::invalid_argument("excitation_curve: unknown method");
}

// Deterministic for a given config; a failing (method, ws) point is filled
// with NaN and recorded in the metadata.
inline SweepResult run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    SweepResult result;
    result.meta.started_at = detail::utc_now();
    result.meta.params = cfg.base;
    result.varpi_grid = cfg.varpi_grid;
    result.times = cfg.time.times();
    const auto nw = static_cast<Eigen::Index>(cfg.varpi_grid.size());
    const auto nt = static_cast<Eigen::Index>(result.times.size());

    for (Method m : sorted_by_name(cfg.methods)) {
        if (result.p_e1.count(m)) continue;
        result.meta.methods.emplace_back(method_name(m));
        Eigen::MatrixXd grid(nw, nt);
        for (Eigen::Index i = 0; i < nw; ++i) {
            const double w = cfg.varpi_grid[static_cast<std::size_t>(i)];
            try {
                const std::vector<double> curve = excitation_curve(cfg, w, m);
                for (Eigen::Index n = 0; n < nt; ++n) grid(i, n) = curve[static_cast<std::size_t>(n)];
            } catch (const std::exception& ex) {
                grid.row(i).setConstant(std::numeric_limits<double>::quiet_NaN());
                std::ostringstream msg;
                msg << method_name(m) << " @ " << w << ": " << ex.what();
                result.meta.failures.push_back(msg.str());
            }
        }
        result.p_e1.emplace(m, std::move(grid));
    }
    result.meta.finished_at = detail::utc_now();
    return result;
}

// Throws if any probability exceeds 1 + 1e-6. Perturbative methods are exempt
// when overflow is explicitly allowed.
inline void check_probability_bounds(const SweepResult& r, bool allow_perturbative_overflow) {
    constexpr double kLimit = 1.0 + 1e-6;
    for (const auto& [m, grid] : r.p_e1) {
        for (Eigen::Index i = 0; i < grid.rows(); ++i) {
            for (Eigen::Index n = 0; n < grid.cols(); ++n) {
                const double v = grid(i, n);
                if (std::isnan(v) || (v >= -1e-12 && v <= kLimit)) continue;
                if (is_perturbative(m) && allow_perturbative_overflow) continue;
                std::ostringstream msg;
                msg << "probability " << v << " out of [0, 1] for method " << method_name(m) << " at varpi_s = "
                    << r.varpi_grid[static_cast<std::size_t>(i)] << ", t = " << r.times[static_cast<std::size_t>(n)];
                if (is_perturbative(m))
                    msg << " (perturbation theory outside its validity; pass --allow-perturbative-overflow to emit anyway)";
                else
                    msg << " (integrator or propagator misconfigured)";
                throw std::runtime_error(msg.str());
            }
        }
    }
}

// --------------------------------- Compare ----------------------------------

struct ComparisonReport {
    struct PairDeviation {
        Method a;
        Method b;
        double short_window{0.0};
        double full_window{0.0};
    };
    double t_short{0.0};
    std::vector<PairDeviation> pairs;
    std::map<Method, double> resonance;  // argmax_ws max_t P

    const PairDeviation& pair(Method a, Method b) const {
        for (const auto& p : pairs)
            if ((p.a == a && p.b == b) || (p.a == b && p.b == a)) return p;
        throw std::out_of_range("ComparisonReport: method pair not present");
    }
};

inline double default_short_window(const SystemParams& p) {
    return p.g0 > 0.0 ? 0.1 * 2.0 * std::numbers::pi / p.g0 : std::numeric_limits<double>::infinity();
}

// argmax over the grid of max_t P; first maximum wins on ties.
inline double resonance_estimate(const SweepResult& r, Method m) {
    const Eigen::MatrixXd& grid = r.p_e1.at(m);
    double best = -1.0;
    double where = std::numeric_limits<double>::quiet_NaN();
    for (Eigen::Index i = 0; i < grid.rows(); ++i) {
        double peak = -1.0;
        for (Eigen::Index n = 0; n < grid.cols(); ++n)
            if (!std::isnan(grid(i, n))) peak = std::max(peak, grid(i, n));
        if (peak > best) {
            best = peak;
            where = r.varpi_grid[static_cast<std::size_t>(i)];
        }
    }
    return where;
}

// max |a - b| over t <= t_short and over all t; NaN if either input has NaN.
inline std::pair<double, double> window_deviation(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                                  const std::vector<double>& times, double t_short) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.cols() != static_cast<Eigen::Index>(times.size()))
        throw std::invalid_argument("window_deviation: shape mismatch");
    double short_dev = 0.0, full_dev = 0.0;
    for (Eigen::Index w = 0; w < a.rows(); ++w) {
        for (Eigen::Index n = 0; n < a.cols(); ++n) {
            const double d = std::abs(a(w, n) - b(w, n));
            if (std::isnan(d)) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
            full_dev = std::max(full_dev, d);
            if (times[static_cast<std::size_t>(n)] <= t_short) short_dev = std::max(short_dev, d);
        }
    }
    return {short_dev, full_dev};
}

inline ComparisonReport compare_sweep(const SweepResult& r, double t_short) {
    if (r.p_e1.size() < 2) throw std::invalid_argument("compare_methods: need at least two methods");
    ComparisonReport rep;
    rep.t_short = t_short;
    const std::vector<Method> ms = r.methods();
    for (std::size_t i = 0; i < ms.size(); ++i) {
        rep.resonance[ms[i]] = resonance_estimate(r, ms[i]);
        for (std::size_t j = i + 1; j < ms.size(); ++j) {
            const auto [short_dev, full_dev] = window_deviation(r.p_e1.at(ms[i]), r.p_e1.at(ms[j]), r.times, t_short);
            const ComparisonReport::PairDeviation dev{ms[i], ms[j], short_dev, full_dev};
            rep.pairs.push_back(dev);
        }
    }
    return rep;
}

inline ComparisonReport compare_methods(const SweepConfig& cfg, std::optional<double> t_short = std::nullopt) {
    std::vector<Method> unique = sorted_by_name(cfg.methods);
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    if (unique.size() < 2) throw std::invalid_argument("compare_methods: need at least two methods");
    return compare_sweep(run_sweep(cfg), t_short.value_or(default_short_window(cfg.base)));
}

}  // namespace qubosc
