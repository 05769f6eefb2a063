// perturbation.hpp: Order-by-order time-domain perturbation theory
//
// H = H0 + delta g(t) C with psi(0) = |ground>. Order j solves
//   i d a^(j)/dt = H0 a^(j) + g(t) C a^(j-1),   a^(j)(0) = 0  (j >= 1),
// through the interaction-picture integral
//   a^(j)_k(t) = -i exp(-i E_k t) int_0^t exp(i E_k t') g(t') (C a^(j-1))_k(t') dt'.

#pragma once

#include "qubosc/integrator.hpp"
#include "qubosc/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace qubosc {

enum class PerturbationChannel {
    Oracle,      // quadrature, authoritative
    ClosedForm,  // reference closed forms, kept for figure reproduction
};

struct PerturbationConfig {
    double delta{1.0};
    int max_order{2};
    int quadrature_substeps{8};  // initial Simpson sub-intervals per grid interval (even)
    double refine_tol{1e-10};    // stop once successive halvings differ by less
    int max_refinements{10};

    void validate() const {
        if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("PerturbationConfig: delta must lie in [0, 1]");
        if (max_order < 0 || max_order > 2) throw std::invalid_argument("PerturbationConfig: orders above 2 are not supported");
        if (quadrature_substeps < 2 || quadrature_substeps % 2 != 0)
            throw std::invalid_argument("PerturbationConfig: quadrature substeps must be even and >= 2");
        if (max_refinements < 0) throw std::invalid_argument("PerturbationConfig: max_refinements must be >= 0");
    }
};

struct OrderedAmplitudes {
    std::vector<double> times;
    std::vector<Eigen::MatrixXcd> orders;  // orders[j](k, n): basis k at times[n]
    int substeps_used{0};
    double last_refinement_change{0.0};

    cplx amplitude(int order, Eigen::Index k, std::size_t n) const {
        return orders.at(static_cast<std::size_t>(order))(k, static_cast<Eigen::Index>(n));
    }
};

namespace detail {

// All orders on a uniform fine grid of m intervals (m even) over [t0, t1].
// Cumulative composite Simpson at even nodes; odd nodes get the three-point
// single-interval rule h/12 (5 f0 + 8 f1 - f2).
inline std::vector<Eigen::MatrixXcd> perturbation_orders_on(const SystemParams& p, int max_order,
                                                            double t0, double t1, int m) {
    const Eigen::VectorXd e = h0_diagonal(p);
    const Eigen::MatrixXcd c = coupling_operator(p).cast<cplx>();
    const Eigen::Index dim = p.dim();
    const Eigen::Index nodes = m + 1;
    const double h = (t1 - t0) / m;

    std::vector<Eigen::MatrixXcd> orders;
    orders.emplace_back(Eigen::MatrixXcd::Zero(dim, nodes));
    orders[0].row(flat_index(p, ground_label(p))).setOnes();

    std::vector<double> ts(static_cast<std::size_t>(nodes));
    for (Eigen::Index n = 0; n < nodes; ++n) ts[static_cast<std::size_t>(n)] = n == m ? t1 : t0 + n * h;

    for (int j = 1; j <= max_order; ++j) {
        const Eigen::MatrixXcd source = c * orders.back();
        Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(dim, nodes);
        for (Eigen::Index k = 0; k < dim; ++k) {
            if (source.row(k).cwiseAbs().maxCoeff() == 0.0) continue;
            Eigen::VectorXcd f(nodes);
            for (Eigen::Index n = 0; n < nodes; ++n) {
                const double t = ts[static_cast<std::size_t>(n)];
                f(n) = std::exp(I * (e(k) * t)) * coupling(p, t) * source(k, n);
            }
            Eigen::VectorXcd acc(nodes);
            acc(0) = 0.0;
            for (Eigen::Index n = 0; n + 2 < nodes; n += 2) {
                acc(n + 1) = acc(n) + (h / 12.0) * (5.0 * f(n) + 8.0 * f(n + 1) - f(n + 2));
                acc(n + 2) = acc(n) + (h / 3.0) * (f(n) + 4.0 * f(n + 1) + f(n + 2));
            }
            for (Eigen::Index n = 0; n < nodes; ++n) {
                next(k, n) = -I * std::exp(-I * (e(k) * ts[static_cast<std::size_t>(n)])) * acc(n);
            }
        }
        orders.push_back(std::move(next));
    }
    return orders;
}

}  // namespace detail

// Amplitudes of orders 0..max_order on the grid; the grid must start at 0.
// Simpson sub-intervals are doubled until successive results agree to
// refine_tol (or max_refinements is reached).
inline OrderedAmplitudes perturb_quadrature(const SystemParams& p, const PerturbationConfig& config,
                                            const TimeGrid& grid) {
    p.validate();
    config.validate();
    grid.validate();
    if (grid.t0 != 0.0) throw std::invalid_argument("perturb_quadrature: grid must start at t = 0");

    auto sample = [&](int sub) {
        const auto fine = detail::perturbation_orders_on(p, config.max_order, grid.t0, grid.t_max, grid.n_steps * sub);
        std::vector<Eigen::MatrixXcd> out;
        for (const auto& o : fine) {
            Eigen::MatrixXcd coarse(o.rows(), grid.size());
            for (int n = 0; n < grid.size(); ++n) coarse.col(n) = o.col(static_cast<Eigen::Index>(n) * sub);
            out.push_back(std::move(coarse));
        }
        return out;
    };

    int sub = config.quadrature_substeps;
    auto current = sample(sub);
    double change = INFINITY;
    for (int r = 0; r < config.max_refinements && config.max_order > 0; ++r) {
        auto finer = sample(2 * sub);
        change = 0.0;
        for (std::size_t j = 0; j < finer.size(); ++j)
            change = std::max(change, (finer[j] - current[j]).cwiseAbs().maxCoeff());
        current = std::move(finer);
        sub *= 2;
        if (change < config.refine_tol) break;
    }

    OrderedAmplitudes out;
    out.times = grid.times();
    out.orders = std::move(current);
    out.substeps_used = sub;
    out.last_refinement_change = config.max_order > 0 ? change : 0.0;
    return out;
}

namespace detail {

// (exp(z) - 1) / z
inline cplx phi1(cplx z) {
    if (std::abs(z) < 1e-4) return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
    return (std::exp(z) - 1.0) / z;
}

inline void require_single_qubit(const SystemParams& p, const char* who) {
    if (p.n_qubits() != 1 || p.photon_cutoff != 1)
        throw std::invalid_argument(std::string(who) + ": closed form requires one qubit and n_max = 1");
}

}  // namespace detail

// First-order |e,1> amplitude. Off resonance the reference closed form;
// within |ws - Om| < 1e-6 Om the equivalent
//   -(i g0/2) e^{-i Om t} t [phi1(i(Om+ws)t) + phi1(i(Om-ws)t)],
// whose resonant limit carries the secular term -(i g0 t/2) e^{-i Om t}.
inline cplx alpha_e1_first_order(const SystemParams& p, double t) {
    p.validate();
    detail::require_single_qubit(p, "alpha_e1_first_order");
    const double om = p.omega_plus();
    const double ws = p.varpi_s;
    const double g0 = p.g0;
    if (std::abs(ws - om) < 1e-6 * om) {
        return -(I * g0 / 2.0) * std::exp(-I * (om * t)) * t *
               (detail::phi1(I * ((om + ws) * t)) + detail::phi1(I * ((om - ws) * t)));
    }
    const cplx bracket = om + std::exp(I * (om * t)) * (I * ws * std::sin(ws * t) - om * std::cos(ws * t));
    return -g0 * std::exp(-I * (om * t)) * bracket / ((ws + om) * (ws - om));
}

// Reference second-order |g,0> amplitude, evaluated term by term.
inline cplx closed_form_alpha_g0_second_order(const SystemParams& p, double t) {
    p.validate();
    detail::require_single_qubit(p, "closed_form_alpha_g0_second_order");
    const double om = p.omega_plus();
    const double ws = p.varpi_s;
    const cplx num = I * ws * (2.0 * I * om * t + std::cos(2.0 * ws * t) - 1.0) - om * std::sin(2.0 * ws * t);
    return p.g0 * p.g0 * num / (4.0 * ws * (ws + om) * (ws - om));
}

inline cplx alpha_g0_second_order(const SystemParams& p, double t, PerturbationChannel channel,
                                  const PerturbationConfig& config = {}) {
    if (channel == PerturbationChannel::ClosedForm) return closed_form_alpha_g0_second_order(p, t);
    if (t < 0.0) throw std::invalid_argument("alpha_g0_second_order: t must be non-negative");
    if (t == 0.0) return 0.0;
    PerturbationConfig cfg = config;
    cfg.max_order = 2;
    cfg.quadrature_substeps = std::max(cfg.quadrature_substeps, 2 * static_cast<int>(std::ceil(t / 2e-3)));
    const OrderedAmplitudes amps = perturb_quadrature(p, cfg, TimeGrid{0.0, t, 1});
    return amps.amplitude(2, flat_index(p, ground_label(p)), 1);
}

// psi(t) = sum_j delta^j psi^(j)(t).
inline Trajectory assemble_wavefunction(const OrderedAmplitudes& ordered, double delta) {
    if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("assemble_wavefunction: delta must lie in [0, 1]");
    if (ordered.orders.empty()) throw std::invalid_argument("assemble_wavefunction: no orders available");
    Trajectory traj;
    traj.times = ordered.times;
    traj.states.reserve(ordered.times.size());
    for (std::size_t n = 0; n < ordered.times.size(); ++n) {
        StateVector psi = ordered.orders[0].col(static_cast<Eigen::Index>(n));
        double weight = 1.0;
        for (std::size_t j = 1; j < ordered.orders.size(); ++j) {
            weight *= delta;
            psi += weight * ordered.orders[j].col(static_cast<Eigen::Index>(n));
        }
        traj.states.push_back(std::move(psi));
    }
    return traj;
}

}  // namespace qubosc
