// trotter.hpp: Trotter-Suzuki factorized propagators
//
// One step of length tau applies the free evolution exp(-i H0 tau) first and
// then the coupling exp(-i g_eff C tau), C = sum_i sx_i (a^dag + a). As a
// matrix product the step is U_I(tau) * U_0(tau).

#pragma once

#include "qubosc/model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace qubosc {

enum class CouplingScheme {
    HalfPeriodAveraged,  // g_eff = g0 / 2 on every step
    SampledCosine,       // g_eff = g0 cos(ws t) at the step midpoint
};

enum class StepOrdering {
    Lie,     // U_I * U_0
    Strang,  // U_0(tau/2) * U_I(tau) * U_0(tau/2); not part of the reference scheme
};

inline std::string_view to_string(CouplingScheme s) {
    return s == CouplingScheme::HalfPeriodAveraged ? "half" : "sampled";
}

struct TrotterConfig {
    int steps_per_period{256};
    CouplingScheme scheme{CouplingScheme::HalfPeriodAveraged};
    StepOrdering ordering{StepOrdering::Lie};

    void validate() const {
        if (steps_per_period < 2 || steps_per_period % 2 != 0)
            throw std::invalid_argument("TrotterConfig: steps per period must be even and >= 2");
    }
};

// exp(-i H0 tau), diagonal.
inline OperatorMatrix free_step(const SystemParams& p, double tau) {
    const Eigen::VectorXd e = h0_diagonal(p);
    Eigen::VectorXcd phases(e.size());
    for (Eigen::Index k = 0; k < e.size(); ++k) phases(k) = std::exp(-I * (e(k) * tau));
    return phases.asDiagonal();
}

// exp(-i g_eff tau sum_i sx_i (a^dag + a)).
//
// The qubit factors commute with each other and with X = a^dag + a, so on each
// eigenvector |x_k> of X the exponential is the tensor product of single-qubit
// rotations cos(theta x_k) - i sin(theta x_k) sx. For n_max = 1, x_k = +-1 and
// this is the cos / -i sin pattern on the pairs (|g,n>, |e,n+1>).
inline OperatorMatrix interaction_exponential(const SystemParams& p, double g_eff, double tau) {
    p.validate();
    const Eigen::Index levels = p.photon_levels();
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(levels, levels);
    for (Eigen::Index n = 0; n + 1 < levels; ++n) {
        x(n + 1, n) = x(n, n + 1) = std::sqrt(static_cast<double>(n + 1));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x);
    const double theta = g_eff * tau;

    OperatorMatrix u = OperatorMatrix::Zero(p.dim(), p.dim());
    for (Eigen::Index k = 0; k < levels; ++k) {
        const double angle = theta * es.eigenvalues()(k);
        Eigen::Matrix2cd r;
        r << std::cos(angle), -I * std::sin(angle), -I * std::sin(angle), std::cos(angle);

        OperatorMatrix qubits = OperatorMatrix::Identity(1, 1);
        for (std::size_t q = 0; q < p.n_qubits(); ++q) {
            OperatorMatrix next(qubits.rows() * 2, qubits.cols() * 2);
            for (Eigen::Index i = 0; i < qubits.rows(); ++i)
                for (Eigen::Index j = 0; j < qubits.cols(); ++j)
                    next.block<2, 2>(2 * i, 2 * j) = qubits(i, j) * r;
            qubits = std::move(next);
        }
        const Eigen::VectorXd v = es.eigenvectors().col(k);
        const Eigen::MatrixXd proj = v * v.transpose();
        for (Eigen::Index a = 0; a < qubits.rows(); ++a)
            for (Eigen::Index b = 0; b < qubits.cols(); ++b)
                if (qubits(a, b) != cplx{0.0})
                    u.block(a * levels, b * levels, levels, levels) += qubits(a, b) * proj.cast<cplx>();
    }
    return u;
}

inline double effective_coupling(const SystemParams& p, CouplingScheme scheme, double t) {
    return scheme == CouplingScheme::HalfPeriodAveraged ? 0.5 * p.g0 : coupling(p, t);
}

// One factorized step of length tau; t is the instant at which the cosine is
// sampled (ignored by the averaged scheme).
inline OperatorMatrix single_step_propagator(const SystemParams& p, double tau, CouplingScheme scheme,
                                             double t, StepOrdering ordering = StepOrdering::Lie) {
    if (!(tau > 0.0)) throw std::invalid_argument("single_step_propagator: tau must be positive");
    const OperatorMatrix ui = interaction_exponential(p, effective_coupling(p, scheme, t), tau);
    if (ordering == StepOrdering::Strang) {
        const OperatorMatrix half = free_step(p, 0.5 * tau);
        return half * ui * half;
    }
    return ui * free_step(p, tau);
}

// Step propagators U(t_k + tau, t_k) tabulated over one period and their
// prefix products, giving U(s, 0) for any s in [0, T].
class TrotterPropagator {
public:
    TrotterPropagator(const SystemParams& params, const TrotterConfig& config)
        : params_(params), config_(config), period_(params.period()) {
        params.validate();
        config.validate();
        tau_ = period_ / config.steps_per_period;
        prefix_.reserve(static_cast<std::size_t>(config.steps_per_period) + 1);
        prefix_.push_back(OperatorMatrix::Identity(params.dim(), params.dim()));
        const bool constant = config.scheme == CouplingScheme::HalfPeriodAveraged;
        OperatorMatrix fixed;
        if (constant) fixed = single_step_propagator(params, tau_, config.scheme, 0.0, config.ordering);
        for (int k = 0; k < config.steps_per_period; ++k) {
            const OperatorMatrix step =
                constant ? fixed
                         : single_step_propagator(params, tau_, config.scheme, (k + 0.5) * tau_, config.ordering);
            prefix_.push_back(step * prefix_.back());
        }
    }

    double period() const noexcept { return period_; }
    double tau() const noexcept { return tau_; }
    const OperatorMatrix& monodromy() const noexcept { return prefix_.back(); }

    // Whole steps up to s, then one partial step of the remaining length.
    OperatorMatrix operator()(double s) const {
        if (s < -1e-12 * period_ || s > period_ * (1.0 + 1e-12))
            throw std::out_of_range("TrotterPropagator: time outside [0, T]");
        s = std::clamp(s, 0.0, period_);
        const int n = config_.steps_per_period;
        int m = std::min(n, static_cast<int>(std::floor(s / tau_)));
        const double rest = s - m * tau_;
        if (m == n || rest <= 1e-12 * tau_) return prefix_[static_cast<std::size_t>(m)];
        const double start = m * tau_;
        return single_step_propagator(params_, rest, config_.scheme, start + 0.5 * rest, config_.ordering) *
               prefix_[static_cast<std::size_t>(m)];
    }

private:
    SystemParams params_;
    TrotterConfig config_;
    double period_;
    double tau_{0.0};
    std::vector<OperatorMatrix> prefix_;
};

// Ordered product of the N_t step propagators over one period.
inline OperatorMatrix one_period_propagator(const SystemParams& params, const TrotterConfig& config) {
    return TrotterPropagator(params, config).monodromy();
}

}  // namespace qubosc
