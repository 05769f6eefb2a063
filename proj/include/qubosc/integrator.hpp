// integrator.hpp: Fixed-step RK4 solution of i d|psi>/dt = H(t)|psi>
//
// Reference channel for every other method. H(t) is sampled at the RK stage
// times t, t + dt/2 and t + dt; states are never renormalized so the norm drift
// stays observable.

#pragma once

#include "qubosc/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qubosc {

struct TimeGrid {
    double t0{0.0};
    double t_max{20.0};
    int n_steps{2000};

    double dt() const noexcept { return (t_max - t0) / n_steps; }
    double time(int k) const noexcept { return k == n_steps ? t_max : t0 + k * dt(); }
    int size() const noexcept { return n_steps + 1; }

    std::vector<double> times() const {
        std::vector<double> ts(static_cast<std::size_t>(size()));
        for (int k = 0; k <= n_steps; ++k) ts[static_cast<std::size_t>(k)] = time(k);
        return ts;
    }

    void validate() const {
        if (n_steps < 1) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
        if (!(t_max > t0) || !std::isfinite(t_max) || !std::isfinite(t0))
            throw std::invalid_argument("TimeGrid: t_max must exceed t0");
    }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<StateVector> states;
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return times.size(); }

    double max_norm_drift() const {
        double drift = 0.0;
        for (const auto& s : states) drift = std::max(drift, std::abs(s.norm() - 1.0));
        return drift;
    }
};

struct IntegratorOptions {
    // Largest RK4 step; grid intervals are subdivided to respect it.
    // Non-positive means one RK4 step per grid interval.
    double max_dt{1e-3};
};

namespace detail {

// Precomputed pieces of H(t) = diag(h0) + g(t) C.
struct SchrodingerRhs {
    explicit SchrodingerRhs(const SystemParams& p)
        : params(p), h0(h0_diagonal(p).cast<cplx>()), c(coupling_operator(p).cast<cplx>()) {}

    template <typename Derived>
    auto operator()(double t, const Eigen::MatrixBase<Derived>& y) const {
        using Plain = typename Derived::PlainObject;
        Plain out = h0.asDiagonal() * y;
        const double g = coupling(params, t);
        if (g != 0.0) out.noalias() += g * (c * y);
        return Plain(-I * out);
    }

    SystemParams params;
    Eigen::VectorXcd h0;
    Eigen::MatrixXcd c;
};

template <typename Derived>
void rk4_step(const SchrodingerRhs& f, double t, double dt, Eigen::MatrixBase<Derived>& y) {
    using Plain = typename Derived::PlainObject;
    const Plain k1 = f(t, y);
    const Plain k2 = f(t + 0.5 * dt, (y + (0.5 * dt) * k1).eval());
    const Plain k3 = f(t + 0.5 * dt, (y + (0.5 * dt) * k2).eval());
    const Plain k4 = f(t + dt, (y + dt * k3).eval());
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline int substeps_for(double interval, double max_dt) {
    if (!(max_dt > 0.0)) return 1;
    return std::max(1, static_cast<int>(std::ceil(interval / max_dt - 1e-9)));
}

}  // namespace detail

inline Trajectory integrate_schrodinger(const SystemParams& params, const StateVector& psi0,
                                        const TimeGrid& grid, const IntegratorOptions& opts = {}) {
    params.validate();
    grid.validate();
    if (psi0.size() != params.dim())
        throw std::invalid_argument("integrate_schrodinger: initial state has wrong dimension");
    if (std::abs(psi0.norm() - 1.0) > 1e-6)
        throw std::invalid_argument("integrate_schrodinger: initial state is not normalized");

    const detail::SchrodingerRhs rhs(params);
    const int sub = detail::substeps_for(grid.dt(), opts.max_dt);
    const double h = grid.dt() / sub;

    Trajectory traj;
    const double scale = h * (params.omega_plus() + params.g0);
    if (scale > 0.1) {
        std::ostringstream msg;
        msg << "integrate_schrodinger: dt*(Omega+ + g0) = " << scale << " exceeds 0.1";
        traj.warnings.push_back(msg.str());
    }

    traj.times.reserve(static_cast<std::size_t>(grid.size()));
    traj.states.reserve(static_cast<std::size_t>(grid.size()));
    StateVector psi = psi0;
    traj.times.push_back(grid.time(0));
    traj.states.push_back(psi);
    for (int k = 0; k < grid.n_steps; ++k) {
        const double start = grid.time(k);
        for (int j = 0; j < sub; ++j) detail::rk4_step(rhs, start + j * h, h, psi);
        traj.times.push_back(grid.time(k + 1));
        traj.states.push_back(psi);
    }
    return traj;
}

// U(t1, t0) from RK4 applied to the identity, n_steps equal steps.
inline OperatorMatrix propagate_operator(const SystemParams& params, double t0, double t1, int n_steps) {
    params.validate();
    if (n_steps < 1) throw std::invalid_argument("propagate_operator: n_steps must be >= 1");
    const detail::SchrodingerRhs rhs(params);
    OperatorMatrix u = OperatorMatrix::Identity(params.dim(), params.dim());
    const double h = (t1 - t0) / n_steps;
    for (int k = 0; k < n_steps; ++k) detail::rk4_step(rhs, t0 + k * h, h, u);
    return u;
}

// |amplitude|^2 of one basis state along a trajectory.
inline std::vector<double> probability(const Trajectory& traj, const SystemParams& params,
                                       const BasisIndex& index) {
    const Eigen::Index k = flat_index(params, index);
    std::vector<double> out;
    out.reserve(traj.size());
    for (const auto& s : traj.states) {
        if (k >= s.size()) throw std::out_of_range("probability: basis index outside state dimension");
        out.push_back(std::norm(s(k)));
    }
    return out;
}

// In-period propagator U(s, 0), s in [0, T], tabulated by RK4 at a fine step.
// Off-node times take one partial RK4 step from the preceding node.
class ExactPeriodPropagator {
public:
    ExactPeriodPropagator(const SystemParams& params, double max_dt = 1e-3)
        : rhs_(params), period_(params.period()) {
        params.validate();
        n_ = detail::substeps_for(period_, max_dt);
        h_ = period_ / n_;
        table_.reserve(static_cast<std::size_t>(n_) + 1);
        OperatorMatrix u = OperatorMatrix::Identity(params.dim(), params.dim());
        table_.push_back(u);
        for (int k = 0; k < n_; ++k) {
            detail::rk4_step(rhs_, k * h_, h_, u);
            table_.push_back(u);
        }
    }

    double period() const noexcept { return period_; }
    int steps() const noexcept { return n_; }
    const OperatorMatrix& monodromy() const noexcept { return table_.back(); }

    OperatorMatrix operator()(double s) const {
        if (s < -1e-12 * period_ || s > period_ * (1.0 + 1e-12))
            throw std::out_of_range("ExactPeriodPropagator: time outside [0, T]");
        s = std::clamp(s, 0.0, period_);
        int k = std::min(n_, static_cast<int>(std::floor(s / h_)));
        const double node = k * h_;
        const double rest = s - node;
        if (k == n_ || rest <= 1e-15 * period_) return table_[static_cast<std::size_t>(k)];
        OperatorMatrix u = table_[static_cast<std::size_t>(k)];
        detail::rk4_step(rhs_, node, rest, u);
        return u;
    }

private:
    detail::SchrodingerRhs rhs_;
    double period_;
    int n_{1};
    double h_{0.0};
    std::vector<OperatorMatrix> table_;
};

}  // namespace qubosc
