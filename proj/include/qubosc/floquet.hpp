// floquet.hpp: Monodromy eigendecomposition, quasienergies and Floquet evolution
//
// Procedure: take U(T,0) from any source, diagonalize it, expand psi(0) in the
// Floquet modes, then
//   psi(t) = sum_a c_a exp(-i e_a t) U(s,0) exp(+i e_a s) |phi_a(0)>,  s = t mod T.

#pragma once

#include "qubosc/model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qubosc {

// Maps s in [0, T] to U(s, 0).
using InPeriodPropagator = std::function<OperatorMatrix(double)>;

struct FloquetDecomposition {
    OperatorMatrix modes;               // columns |phi_a(0)>, unit norm
    Eigen::VectorXd quasienergies;      // folded into (-pi/T, pi/T]
    Eigen::VectorXcd raw_eigenvalues;   // exp(-i e_a T)
    double period{0.0};
    double condition_number{1.0};       // of the mode matrix

    Eigen::Index size() const noexcept { return modes.cols(); }
    StateVector mode(Eigen::Index a) const { return modes.col(a); }
};

struct OverlapCoefficients {
    Eigen::VectorXcd c_alpha;
};

// Representative of e modulo 2 pi / T in (-pi/T, pi/T].
inline double quasienergy_fold(double epsilon, double period) {
    if (!(period > 0.0)) throw std::invalid_argument("quasienergy_fold: period must be positive");
    const double zone = 2.0 * std::numbers::pi / period;
    const double half = 0.5 * zone;
    double r = epsilon - zone * std::ceil((epsilon - half) / zone);
    if (r <= -half) r += zone;
    if (r > half) r -= zone;
    return r;
}

namespace detail {

inline Eigen::Index dominant_index(const StateVector& v) {
    Eigen::Index best = 0;
    v.cwiseAbs().maxCoeff(&best);
    return best;
}

}  // namespace detail

// Eigenpairs of a unitary one-period propagator.
//
// U is normal, so its complex Schur form is diagonal up to roundoff and the
// Schur vectors are an orthonormal eigenbasis, degenerate eigenspaces included.
// Modes are ordered by ascending quasienergy, ties (within 1e-10) by the index
// of their largest component; each mode's largest component is made real
// positive.
inline FloquetDecomposition floquet_decompose(const OperatorMatrix& u, double period,
                                              double unitarity_tol = 1e-8) {
    if (u.rows() != u.cols() || u.rows() == 0)
        throw std::invalid_argument("floquet_decompose: propagator must be square and non-empty");
    if (!(period > 0.0)) throw std::invalid_argument("floquet_decompose: period must be positive");
    const double uerr = unitarity_error(u);
    if (uerr > unitarity_tol) {
        std::ostringstream msg;
        msg << "floquet_decompose: propagator is not unitary (max |U^dag U - 1| = " << uerr << ")";
        throw std::invalid_argument(msg.str());
    }

    Eigen::ComplexSchur<OperatorMatrix> schur(u);
    if (schur.info() != Eigen::Success) throw std::runtime_error("floquet_decompose: Schur decomposition failed");
    const OperatorMatrix& q = schur.matrixU();
    const OperatorMatrix& tri = schur.matrixT();
    const Eigen::Index n = u.rows();

    struct Entry {
        double eps;
        Eigen::Index dominant;
        Eigen::Index column;
    };
    std::vector<Entry> order;
    order.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
        const double eps = quasienergy_fold(-std::arg(tri(k, k)) / period, period);
        order.push_back({eps, detail::dominant_index(q.col(k)), k});
    }
    std::sort(order.begin(), order.end(), [](const Entry& a, const Entry& b) { return a.eps < b.eps; });
    // Group near-equal quasienergies, then order each group by dominant index.
    for (std::size_t start = 0; start < order.size();) {
        std::size_t end = start + 1;
        while (end < order.size() && order[end].eps - order[end - 1].eps <= 1e-10) ++end;
        std::sort(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end),
                  [](const Entry& a, const Entry& b) { return a.dominant < b.dominant; });
        start = end;
    }

    FloquetDecomposition d;
    d.period = period;
    d.modes.resize(n, n);
    d.quasienergies.resize(n);
    d.raw_eigenvalues.resize(n);
    for (Eigen::Index a = 0; a < n; ++a) {
        const Entry& e = order[static_cast<std::size_t>(a)];
        StateVector v = q.col(e.column);
        v /= v.norm();
        const cplx lead = v(e.dominant);
        v *= std::conj(lead) / std::abs(lead);
        v(e.dominant) = std::abs(v(e.dominant));
        d.modes.col(a) = v;
        d.quasienergies(a) = e.eps;
        d.raw_eigenvalues(a) = tri(e.column, e.column);
    }
    Eigen::JacobiSVD<OperatorMatrix> svd(d.modes);
    const auto& sv = svd.singularValues();
    d.condition_number = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    return d;
}

// Solves modes * c = psi0.
inline OverlapCoefficients overlaps(const FloquetDecomposition& d, const StateVector& psi0) {
    if (psi0.size() != d.modes.rows()) throw std::invalid_argument("overlaps: dimension mismatch");
    if (std::abs(psi0.norm() - 1.0) > 1e-6) throw std::invalid_argument("overlaps: initial state is not normalized");
    if (!std::isfinite(d.condition_number) || d.condition_number > 1e12)
        throw std::runtime_error("overlaps: Floquet mode matrix is singular");
    Eigen::FullPivLU<OperatorMatrix> lu(d.modes);
    if (!lu.isInvertible()) throw std::runtime_error("overlaps: Floquet mode matrix is singular");
    return OverlapCoefficients{lu.solve(psi0)};
}

inline StateVector evolve_floquet(const FloquetDecomposition& d, const OverlapCoefficients& c, double t,
                                  const InPeriodPropagator& stepper) {
    if (t < 0.0) throw std::invalid_argument("evolve_floquet: t must be non-negative");
    if (c.c_alpha.size() != d.size()) throw std::invalid_argument("evolve_floquet: coefficient count mismatch");
    const double period = d.period;
    double whole = std::floor(t / period);
    double s = t - whole * period;
    if (s >= period * (1.0 - 1e-12)) {
        whole += 1.0;
        s = 0.0;
    }
    StateVector inner = StateVector::Zero(d.modes.rows());
    for (Eigen::Index a = 0; a < d.size(); ++a) {
        // exp(-i e t) exp(+i e s) = exp(-i e k T)
        inner += c.c_alpha(a) * std::exp(-I * (d.quasienergies(a) * whole * period)) * d.modes.col(a);
    }
    if (s == 0.0) return inner;
    const OperatorMatrix u = stepper(s);
    if (u.rows() != inner.size() || u.cols() != inner.size())
        throw std::invalid_argument("evolve_floquet: stepper and decomposition dimensions differ");
    return u * inner;
}

// ----------------------- Closed-form single-step eigensystem ----------------
//
// The single Trotter step for one qubit and n_max = 1 (averaged coupling
// g0/2) splits into the blocks {|g,0>, |e,1>} and {|g,1>, |e,0>}.
// Derived evaluates the 2x2 eigenproblems exactly; Printed evaluates the
// reference expressions term by term for comparison.

enum class ClosedFormChannel { Derived, Printed };

struct StepEigensystem {
    std::array<cplx, 4> eigenvalues;
    std::array<StateVector, 4> eigenvectors;  // normalized, support on one block
};

namespace detail {

// Eigenvector of [[a, b], [c, d]] for lambda, from whichever row is better conditioned.
inline Eigen::Vector2cd block_eigenvector(cplx a, cplx b, cplx c, cplx d, cplx lambda) {
    Eigen::Vector2cd v1(b, lambda - a);
    Eigen::Vector2cd v2(lambda - d, c);
    Eigen::Vector2cd v = v1.norm() >= v2.norm() ? v1 : v2;
    return v / v.norm();
}

}  // namespace detail

inline StepEigensystem closed_form_step_eigensystem(const SystemParams& p, double tau,
                                                    ClosedFormChannel channel = ClosedFormChannel::Derived) {
    p.validate();
    if (p.n_qubits() != 1 || p.photon_cutoff != 1)
        throw std::invalid_argument("closed_form_step_eigensystem: requires one qubit and n_max = 1");
    const double w0 = p.omega0[0];
    const double wr = p.omega_r;
    const double om = w0 + wr;
    const double c = std::cos(0.5 * p.g0 * tau);
    const double s = std::sin(0.5 * p.g0 * tau);
    auto ex = [](double x) { return std::exp(I * x); };

    StepEigensystem out;
    auto place = [&](int slot, Eigen::Index i, Eigen::Index j, const Eigen::Vector2cd& v) {
        StateVector full = StateVector::Zero(4);
        full(i) = v(0);
        full(j) = v(1);
        out.eigenvectors[static_cast<std::size_t>(slot)] = full / full.norm();
    };

    if (channel == ClosedFormChannel::Derived) {
        // block {g0, e1}: [[c, -i s e^{-i om tau}], [-i s, c e^{-i om tau}]]
        const cplx a1 = c, b1 = -I * s * ex(-om * tau), c1 = -I * s, d1 = c * ex(-om * tau);
        // block {g1, e0}: [[c e^{-i wr tau}, -i s e^{-i w0 tau}], [-i s e^{-i wr tau}, c e^{-i w0 tau}]]
        const cplx a2 = c * ex(-wr * tau), b2 = -I * s * ex(-w0 * tau), c2 = -I * s * ex(-wr * tau),
                   d2 = c * ex(-w0 * tau);
        const std::array<std::array<cplx, 4>, 2> blocks{{{a1, b1, c1, d1}, {a2, b2, c2, d2}}};
        for (int blk = 0; blk < 2; ++blk) {
            const auto& m = blocks[static_cast<std::size_t>(blk)];
            const cplx tr = m[0] + m[3];
            const cplx det = m[0] * m[3] - m[1] * m[2];
            const cplx root = std::sqrt(tr * tr - 4.0 * det);
            const std::array<cplx, 2> lam{0.5 * (tr - root), 0.5 * (tr + root)};
            for (int r = 0; r < 2; ++r) {
                const int slot = 2 * blk + r;
                out.eigenvalues[static_cast<std::size_t>(slot)] = lam[static_cast<std::size_t>(r)];
                const Eigen::Vector2cd v =
                    detail::block_eigenvector(m[0], m[1], m[2], m[3], lam[static_cast<std::size_t>(r)]);
                if (blk == 0) place(slot, basis::g0, basis::e1, v);
                else place(slot, basis::g1, basis::e0, v);
            }
        }
        return out;
    }

    const cplx e = ex(om * tau);
    const double sec2 = 1.0 / (c * c);
    const double cot = c / s;
    const cplx pre = 0.5 * c * ex(-om * tau);
    const cplx r12 = std::sqrt((e + 1.0) * (e + 1.0) + 4.0 * sec2 * e);
    const cplx r34 = std::sqrt((e + ex(wr * tau)) * (e + ex(wr * tau)) + 4.0 * sec2 * e);
    out.eigenvalues = {pre * (e + 1.0 - I * r12), pre * (e + 1.0 + I * r12), pre * (e + 1.0 - I * r34),
                       pre * (e + 1.0 + I * r34)};
    const cplx v12 = std::sqrt(1.0 + 2.0 * e * (1.0 - 2.0 * sec2) + e * e);
    const cplx v34 = std::sqrt(ex(2.0 * w0 * tau) + ex(2.0 * wr * tau) + 2.0 * e * (1.0 - 2.0 * sec2));
    const cplx x1 = 0.5 * I * cot * (1.0 - ex(-om * tau) - ex(-om * tau) * v12);
    const cplx x2 = 0.5 * I * cot * (1.0 - ex(-om * tau) + ex(-om * tau) * v12);
    const cplx x3 = 0.5 * I * cot * ex(-w0 * tau) * (e - ex(wr * tau) - v34);
    const cplx x4 = 0.5 * I * cot * ex(-w0 * tau) * (e - ex(wr * tau) + v34);
    place(0, basis::g0, basis::e1, Eigen::Vector2cd(x1, 1.0));
    place(1, basis::g0, basis::e1, Eigen::Vector2cd(x2, 1.0));
    place(2, basis::g1, basis::e0, Eigen::Vector2cd(x3, 1.0));
    place(3, basis::g1, basis::e0, Eigen::Vector2cd(x4, 1.0));
    return out;
}

struct ClosedFormComparison {
    ClosedFormChannel channel{ClosedFormChannel::Derived};
    std::array<double, 4> eigenvalue_distance{};   // to the nearest numeric eigenvalue
    std::array<double, 4> eigenvector_residual{};  // |M v - lambda v| with lambda the Rayleigh quotient
    double tolerance{1e-8};

    bool branch_matches(std::size_t k) const {
        return eigenvalue_distance[k] <= tolerance && eigenvector_residual[k] <= tolerance;
    }
    bool all_match() const {
        for (std::size_t k = 0; k < 4; ++k)
            if (!branch_matches(k)) return false;
        return true;
    }
    std::string report() const {
        std::ostringstream os;
        os << "closed-form channel "
           << (channel == ClosedFormChannel::Derived ? "derived" : "printed") << '\n';
        for (std::size_t k = 0; k < 4; ++k) {
            os << "  branch " << k + 1 << ": eigenvalue distance " << eigenvalue_distance[k]
               << ", eigenvector residual " << eigenvector_residual[k]
               << (branch_matches(k) ? "  match" : "  MISMATCH") << '\n';
        }
        return os.str();
    }
};

// Set-wise comparison of a closed-form channel with a generic eigensolve of
// the single step matrix.
inline ClosedFormComparison compare_closed_form(const SystemParams& p, double tau, ClosedFormChannel channel,
                                                const OperatorMatrix& step, double tol = 1e-8) {
    const StepEigensystem cf = closed_form_step_eigensystem(p, tau, channel);
    Eigen::ComplexEigenSolver<OperatorMatrix> es(step, false);
    const Eigen::VectorXcd numeric = es.eigenvalues();
    ClosedFormComparison cmp;
    cmp.channel = channel;
    cmp.tolerance = tol;
    for (std::size_t k = 0; k < 4; ++k) {
        double best = INFINITY;
        for (Eigen::Index j = 0; j < numeric.size(); ++j) best = std::min(best, std::abs(numeric(j) - cf.eigenvalues[k]));
        cmp.eigenvalue_distance[k] = std::isfinite(best) ? best : INFINITY;
        const StateVector& v = cf.eigenvectors[k];
        if (!v.allFinite()) {
            cmp.eigenvector_residual[k] = INFINITY;
            continue;
        }
        const cplx rq = v.dot(step * v) / v.squaredNorm();
        cmp.eigenvector_residual[k] = (step * v - rq * v).norm();
    }
    return cmp;
}

}  // namespace qubosc
