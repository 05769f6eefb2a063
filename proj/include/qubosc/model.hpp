// model.hpp: Qubit/resonator parameters, product basis, and Hamiltonian terms
//
// H(t) = w_r a^dag a + sum_i w0_i s+_i s-_i + g(t) sum_i sx_i (a^dag + a),
// g(t) = g0 cos(ws t), with hbar = 1, time in ns and frequencies in rad/ns.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace qubosc {

using cplx = std::complex<double>;
using StateVector = Eigen::VectorXcd;
using OperatorMatrix = Eigen::MatrixXcd;

inline constexpr cplx I{0.0, 1.0};

// ------------------------------- Parameters ---------------------------------

struct SystemParams {
    std::vector<double> omega0{5.0};  // per-qubit transition frequencies
    double omega_r{6.0};              // resonator frequency
    double g0{0.1};                   // coupling amplitude
    double varpi_s{11.0};             // switching frequency of the coupling
    int photon_cutoff{1};             // n_max

    std::size_t n_qubits() const noexcept { return omega0.size(); }
    Eigen::Index photon_levels() const noexcept { return photon_cutoff + 1; }
    Eigen::Index dim() const noexcept {
        return (Eigen::Index{1} << n_qubits()) * photon_levels();
    }
    double period() const noexcept { return 2.0 * std::numbers::pi / varpi_s; }

    // Sum frequency of the first qubit and the resonator.
    double omega_plus() const { return omega0.at(0) + omega_r; }

    void validate() const {
        if (omega0.empty()) throw std::invalid_argument("SystemParams: at least one qubit required");
        if (omega0.size() > 16) throw std::invalid_argument("SystemParams: too many qubits for a dense basis");
        for (double w : omega0) {
            if (!(w > 0.0) || !std::isfinite(w))
                throw std::invalid_argument("SystemParams: qubit frequencies must be positive and finite");
        }
        if (!(omega_r > 0.0) || !std::isfinite(omega_r))
            throw std::invalid_argument("SystemParams: resonator frequency must be positive and finite");
        if (!(varpi_s > 0.0) || !std::isfinite(varpi_s))
            throw std::invalid_argument("SystemParams: switching frequency must be positive and finite");
        if (!(g0 >= 0.0) || !std::isfinite(g0))
            throw std::invalid_argument("SystemParams: coupling amplitude must be non-negative and finite");
        if (photon_cutoff < 1) throw std::invalid_argument("SystemParams: photon cutoff must be >= 1");
    }

    // Same system at a different switching frequency.
    SystemParams with_varpi(double ws) const {
        SystemParams p = *this;
        p.varpi_s = ws;
        return p;
    }
};

// --------------------------------- Basis ------------------------------------
//
// flat = photons + (n_max + 1) * qubit_code, qubit 0 being the most significant
// bit of qubit_code. For one qubit and n_max = 1: |g,0>, |g,1>, |e,0>, |e,1>.

struct BasisIndex {
    std::vector<int> qubit_bits;  // 0 = g, 1 = e
    int photons{0};

    friend bool operator==(const BasisIndex&, const BasisIndex&) = default;
};

namespace basis {
inline constexpr Eigen::Index g0 = 0;
inline constexpr Eigen::Index g1 = 1;
inline constexpr Eigen::Index e0 = 2;
inline constexpr Eigen::Index e1 = 3;
}  // namespace basis

inline Eigen::Index flat_index(const SystemParams& p, const BasisIndex& label) {
    if (label.qubit_bits.size() != p.n_qubits())
        throw std::invalid_argument("flat_index: qubit label length does not match the number of qubits");
    if (label.photons < 0 || label.photons > p.photon_cutoff)
        throw std::out_of_range("flat_index: photon number outside [0, n_max]");
    Eigen::Index code = 0;
    for (int b : label.qubit_bits) {
        if (b != 0 && b != 1) throw std::invalid_argument("flat_index: qubit bits must be 0 or 1");
        code = (code << 1) | b;
    }
    return label.photons + p.photon_levels() * code;
}

inline BasisIndex basis_label(const SystemParams& p, Eigen::Index flat) {
    if (flat < 0 || flat >= p.dim()) throw std::out_of_range("basis_label: index outside Hilbert space");
    BasisIndex label;
    label.photons = static_cast<int>(flat % p.photon_levels());
    Eigen::Index code = flat / p.photon_levels();
    const std::size_t n = p.n_qubits();
    label.qubit_bits.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        label.qubit_bits[n - 1 - i] = static_cast<int>((code >> i) & 1);
    }
    return label;
}

// All qubits in |g>, no photons.
inline BasisIndex ground_label(const SystemParams& p) {
    return BasisIndex{std::vector<int>(p.n_qubits(), 0), 0};
}

// First qubit excited, one photon: |e,1> for a single qubit.
inline BasisIndex excited_one_photon_label(const SystemParams& p) {
    BasisIndex label{std::vector<int>(p.n_qubits(), 0), 1};
    label.qubit_bits.front() = 1;
    return label;
}

inline StateVector basis_state(const SystemParams& p, const BasisIndex& label) {
    StateVector psi = StateVector::Zero(p.dim());
    psi(flat_index(p, label)) = 1.0;
    return psi;
}

inline std::string to_string(const BasisIndex& label) {
    std::string s = "|";
    for (int b : label.qubit_bits) {
        s += (b ? 'e' : 'g');
        s += ',';
    }
    s += std::to_string(label.photons);
    s += '>';
    return s;
}

// ------------------------------ Hamiltonian ---------------------------------

inline double coupling(const SystemParams& p, double t) {
    return p.g0 * std::cos(p.varpi_s * t);
}

// Diagonal of H0 in the flat basis.
inline Eigen::VectorXd h0_diagonal(const SystemParams& p) {
    p.validate();
    Eigen::VectorXd d(p.dim());
    for (Eigen::Index k = 0; k < p.dim(); ++k) {
        const BasisIndex label = basis_label(p, k);
        double e = p.omega_r * label.photons;
        for (std::size_t i = 0; i < p.n_qubits(); ++i) e += p.omega0[i] * label.qubit_bits[i];
        d(k) = e;
    }
    return d;
}

inline OperatorMatrix build_h0(const SystemParams& p) {
    return h0_diagonal(p).cast<cplx>().asDiagonal();
}

// sum_i sx_i (a^dag + a); real symmetric, t-independent.
inline Eigen::MatrixXd coupling_operator(const SystemParams& p) {
    p.validate();
    const Eigen::Index n = p.dim();
    const Eigen::Index levels = p.photon_levels();
    const std::size_t nq = p.n_qubits();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index photons = k % levels;
        const Eigen::Index code = k / levels;
        for (std::size_t q = 0; q < nq; ++q) {
            const Eigen::Index flipped = code ^ (Eigen::Index{1} << (nq - 1 - q));
            if (photons + 1 < levels) {
                c(flipped * levels + photons + 1, k) += std::sqrt(static_cast<double>(photons + 1));
            }
            if (photons > 0) {
                c(flipped * levels + photons - 1, k) += std::sqrt(static_cast<double>(photons));
            }
        }
    }
    return c;
}

inline OperatorMatrix build_hI(const SystemParams& p, double t) {
    return coupling(p, t) * coupling_operator(p).cast<cplx>();
}

inline OperatorMatrix build_h(const SystemParams& p, double t) {
    return build_h0(p) + build_hI(p, t);
}

// max |M - M^dag|
inline double hermiticity_error(const OperatorMatrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// max |M^dag M - 1|
inline double unitarity_error(const OperatorMatrix& m) {
    return (m.adjoint() * m - OperatorMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
}

}  // namespace qubosc
