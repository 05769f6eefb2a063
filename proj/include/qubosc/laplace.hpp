// laplace.hpp: Rational functions, residue inversion and the Laplace-domain
// perturbative solve
//
// Every amplitude in the perturbative chain is an exponential polynomial
// sum_k c_k t^m_k exp(p_k t). Its transform is rational, each order is the
// algebraic solve A = RHS / (i s - E), and the inverse transform is the sum of
// residues of A(s) e^{st}.

#pragma once

#include "qubosc/model.hpp"
#include "qubosc/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace qubosc {

class RationalFunction;

// ------------------------- Exponential polynomials --------------------------

struct ExpTerm {
    cplx coefficient;
    int power{0};  // t^power
    cplx rate;     // exp(rate t)
};

// sum c t^k e^{pt}; terms with equal power and rates within 1e-10 are merged.
class ExponentialPolynomialSum {
public:
    static constexpr double kRateMergeTol = 1e-10;

    ExponentialPolynomialSum() = default;

    static ExponentialPolynomialSum constant(cplx c) {
        ExponentialPolynomialSum s;
        s.add({c, 0, cplx{}});
        return s;
    }
    static ExponentialPolynomialSum exponential(cplx c, cplx rate) {
        ExponentialPolynomialSum s;
        s.add({c, 0, rate});
        return s;
    }

    // g0 cos(ws t) = g0/2 (e^{i ws t} + e^{-i ws t})
    static ExponentialPolynomialSum cosine(double amplitude, double frequency) {
        ExponentialPolynomialSum s;
        s.add({0.5 * amplitude, 0, I * frequency});
        s.add({0.5 * amplitude, 0, -I * frequency});
        return s;
    }

    void add(const ExpTerm& term) {
        if (term.power < 0) throw std::invalid_argument("ExponentialPolynomialSum: negative power");
        if (term.coefficient == cplx{}) return;
        for (auto& t : terms_) {
            if (t.power == term.power && std::abs(t.rate - term.rate) <= kRateMergeTol) {
                t.coefficient += term.coefficient;
                return;
            }
        }
        terms_.push_back(term);
    }

    const std::vector<ExpTerm>& terms() const noexcept { return terms_; }
    bool empty() const noexcept { return terms_.empty(); }

    cplx operator()(double t) const {
        cplx acc{};
        for (const auto& term : terms_) acc += term.coefficient * std::pow(t, term.power) * std::exp(term.rate * t);
        return acc;
    }

    friend ExponentialPolynomialSum operator+(const ExponentialPolynomialSum& a, const ExponentialPolynomialSum& b) {
        ExponentialPolynomialSum out = a;
        for (const auto& t : b.terms_) out.add(t);
        return out;
    }
    friend ExponentialPolynomialSum operator*(cplx k, const ExponentialPolynomialSum& a) {
        ExponentialPolynomialSum out;
        for (const auto& t : a.terms_) out.add({k * t.coefficient, t.power, t.rate});
        return out;
    }
    friend ExponentialPolynomialSum operator*(const ExponentialPolynomialSum& a, const ExponentialPolynomialSum& b) {
        ExponentialPolynomialSum out;
        for (const auto& x : a.terms_)
            for (const auto& y : b.terms_) out.add({x.coefficient * y.coefficient, x.power + y.power, x.rate + y.rate});
        return out;
    }

    // L[t^k e^{pt}] = k! / (s - p)^{k+1}, over a common denominator.
    RationalFunction laplace_transform() const;

private:
    std::vector<ExpTerm> terms_;
};

// ---------------------------- Rational functions ----------------------------

struct Pole {
    cplx location;
    int multiplicity{1};
};
using PoleSet = std::vector<Pole>;

// numerator / denominator. Common roots of the two (within 1e-10) are
// cancelled on construction; a zero numerator is stored as 0 / 1.
class RationalFunction {
public:
    static constexpr double kCancelTol = 1e-10;

    RationalFunction() : num_(), den_(Polynomial::constant(1.0)) {}
    RationalFunction(Polynomial numerator, Polynomial denominator)
        : num_(std::move(numerator)), den_(std::move(denominator)) {
        if (den_.is_zero()) throw std::invalid_argument("RationalFunction: zero denominator");
        cancel_common_roots();
    }

    const Polynomial& numerator() const noexcept { return num_; }
    const Polynomial& denominator() const noexcept { return den_; }
    bool is_zero() const noexcept { return num_.is_zero(); }
    bool strictly_proper() const noexcept { return num_.degree() < den_.degree(); }

    cplx operator()(cplx s) const { return num_(s) / den_(s); }

    friend RationalFunction operator*(const RationalFunction& a, const RationalFunction& b) {
        return RationalFunction(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend RationalFunction operator*(cplx k, const RationalFunction& a) {
        return RationalFunction(k * a.num_, a.den_);
    }
    friend RationalFunction operator+(const RationalFunction& a, const RationalFunction& b) {
        return RationalFunction(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }

private:
    void cancel_common_roots() {
        if (num_.is_zero()) {
            den_ = Polynomial::constant(1.0);
            return;
        }
        if (num_.degree() < 1 || den_.degree() < 1) return;
        std::vector<cplx> nr = polynomial_roots(num_.trimmed(1e-14));
        std::vector<cplx> dr = polynomial_roots(den_);
        for (const cplx& r : dr) {
            auto it = std::find_if(nr.begin(), nr.end(), [&](cplx x) { return std::abs(x - r) <= kCancelTol; });
            if (it == nr.end()) continue;
            num_ = num_.deflate(*it);
            den_ = den_.deflate(r);
            nr.erase(it);
        }
    }

    Polynomial num_;
    Polynomial den_;
};

inline RationalFunction ExponentialPolynomialSum::laplace_transform() const {
    if (terms_.empty()) return RationalFunction();
    // Distinct rates (already merged on insertion) with their highest power.
    struct Group {
        cplx rate;
        int max_power;
    };
    std::vector<Group> groups;
    for (const auto& t : terms_) {
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const Group& g) { return std::abs(g.rate - t.rate) <= kRateMergeTol; });
        if (it == groups.end()) groups.push_back({t.rate, t.power});
        else it->max_power = std::max(it->max_power, t.power);
    }
    Polynomial den = Polynomial::constant(1.0);
    for (const auto& g : groups) den = den * Polynomial::linear_factor(g.rate).pow(g.max_power + 1);

    Polynomial num;
    for (const auto& t : terms_) {
        Polynomial part = Polynomial::constant(t.coefficient * std::tgamma(t.power + 1.0));
        for (const auto& g : groups) {
            const bool own = std::abs(g.rate - t.rate) <= kRateMergeTol;
            const int exponent = own ? g.max_power - t.power : g.max_power + 1;
            part = part * Polynomial::linear_factor(g.rate).pow(exponent);
        }
        num = num + part;
    }
    return RationalFunction(num, den);
}

// ------------------------------- Operations ---------------------------------

// G(s) = g0 s / (s^2 + ws^2)
inline RationalFunction laplace_of_coupling(const SystemParams& p) {
    p.validate();
    return RationalFunction(Polynomial({0.0, p.g0}), Polynomial({p.varpi_s * p.varpi_s, 0.0, 1.0}));
}

// A(s) from i s A = E A + RHS, i.e. A = -i RHS / (s + i E).
inline RationalFunction solve_order_level(const RationalFunction& rhs, double level_energy) {
    if (rhs.is_zero()) return RationalFunction();
    return RationalFunction((-I) * rhs.numerator(), rhs.denominator() * Polynomial::linear_factor(-I * level_energy));
}

namespace detail {

// Rounding scale of the k-th Taylor coefficient of d about c.
inline double taylor_noise(const Polynomial& d, cplx c, int k) {
    std::vector<cplx> mags;
    for (const auto& a : d.coefficients()) mags.emplace_back(std::abs(a));
    const double scale = std::abs(Polynomial(mags).taylor_at(std::abs(c), k + 1)[static_cast<std::size_t>(k)]);
    return 64.0 * (d.degree() + 1) * std::numeric_limits<double>::epsilon() * scale;
}

// d is numerically divisible by (s - c)^m.
inline bool is_multiple_root(const Polynomial& d, cplx c, int m) {
    const std::vector<cplx> tc = d.taylor_at(c, m);
    for (int k = 0; k < m; ++k)
        if (std::abs(tc[static_cast<std::size_t>(k)]) > taylor_noise(d, c, k)) return false;
    return true;
}

// Newton on d^(m-1), which has a simple root at an m-fold root of d.
inline cplx polish_multiple_root(const Polynomial& d, cplx c, int m) {
    Polynomial q = d;
    for (int i = 1; i < m; ++i) q = q.derivative();
    const Polynomial dq = q.derivative();
    for (int it = 0; it < 4; ++it) {
        const cplx f = q(c);
        const cplx df = dq(c);
        if (std::abs(df) == 0.0) break;
        const cplx next = c - f / df;
        if (!(std::abs(q(next)) < std::abs(f))) break;
        c = next;
    }
    return c;
}

// Gauss-Newton fit of the pole locations to the denominator coefficients with
// the multiplicities held fixed; well conditioned once the structure is known.
inline void refine_pole_locations(const Polynomial& den, PoleSet& ps) {
    const int n = den.degree();
    const auto k = static_cast<Eigen::Index>(ps.size());
    auto product = [&](const PoleSet& q, std::ptrdiff_t skip_one_of) {
        Polynomial r = Polynomial::constant(den.leading());
        for (std::size_t j = 0; j < q.size(); ++j) {
            const int m = q[j].multiplicity - (static_cast<std::ptrdiff_t>(j) == skip_one_of ? 1 : 0);
            r = r * Polynomial::linear_factor(q[j].location).pow(m);
        }
        return r;
    };
    auto residual = [&](const PoleSet& q) {
        const Polynomial r = product(q, -1) - den;
        Eigen::VectorXcd v(n);
        for (int i = 0; i < n; ++i) v(i) = r.coeff(i);
        return v;
    };
    Eigen::VectorXcd r = residual(ps);
    for (int it = 0; it < 6 && r.norm() > 0.0; ++it) {
        Eigen::MatrixXcd jac(n, k);
        for (Eigen::Index j = 0; j < k; ++j) {
            const Polynomial col = cplx(-ps[static_cast<std::size_t>(j)].multiplicity) * product(ps, j);
            for (int i = 0; i < n; ++i) jac(i, j) = col.coeff(i);
        }
        const Eigen::VectorXcd step = jac.colPivHouseholderQr().solve(-r);
        PoleSet trial = ps;
        for (Eigen::Index j = 0; j < k; ++j) trial[static_cast<std::size_t>(j)].location += step(j);
        const Eigen::VectorXcd rt = residual(trial);
        if (!(rt.norm() < r.norm())) break;
        ps = std::move(trial);
        r = rt;
    }
}

}  // namespace detail

// Denominator roots grouped into poles with multiplicity, sorted by real then
// imaginary part. Roots within 1e-9 always merge. A companion eigensolve
// splits an exact m-fold root by ~eps^(1/m), so wider groups (up to 1e-2
// relative) also merge when the denominator is numerically divisible by
// (s - c)^m at their polished mean c.
inline PoleSet poles(const RationalFunction& rf) {
    constexpr double kMergeTol = 1e-9;
    constexpr double kCandidateRadius = 1e-2;
    const Polynomial& den = rf.denominator();
    if (den.is_zero()) throw std::invalid_argument("poles: zero denominator");
    if (den.degree() > 12) throw std::invalid_argument("poles: denominator degree above 12");
    const std::vector<cplx> roots = polynomial_roots(den);

    PoleSet out;
    std::vector<bool> used(roots.size(), false);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (used[i]) continue;
        std::vector<std::size_t> near;
        const double radius = kCandidateRadius * std::max(1.0, std::abs(roots[i]));
        for (std::size_t j = 0; j < roots.size(); ++j)
            if (j != i && !used[j] && std::abs(roots[j] - roots[i]) <= radius) near.push_back(j);
        std::sort(near.begin(), near.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(roots[a] - roots[i]) < std::abs(roots[b] - roots[i]);
        });

        Pole pole{roots[i], 1};
        std::size_t taken = 0;
        for (std::size_t extra = near.size(); extra > 0; --extra) {
            const int m = static_cast<int>(extra) + 1;
            cplx mean = roots[i];
            for (std::size_t k = 0; k < extra; ++k) mean += roots[near[k]];
            mean /= static_cast<double>(m);
            double spread = std::abs(roots[i] - mean);
            for (std::size_t k = 0; k < extra; ++k) spread = std::max(spread, std::abs(roots[near[k]] - mean));
            if (spread <= kMergeTol) {
                pole = {mean, m};
                taken = extra;
                break;
            }
            const cplx c = detail::polish_multiple_root(den, mean, m);
            const double drift = std::max(10.0 * spread, 1e-6 * std::max(1.0, std::abs(mean)));
            if (std::abs(c - mean) <= drift && detail::is_multiple_root(den, c, m)) {
                pole = {c, m};
                taken = extra;
                break;
            }
        }
        used[i] = true;
        for (std::size_t k = 0; k < taken; ++k) used[near[k]] = true;
        out.push_back(pole);
    }
    if (std::any_of(out.begin(), out.end(), [](const Pole& p) { return p.multiplicity > 1; }))
        detail::refine_pole_locations(den, out);
    std::sort(out.begin(), out.end(), [](const Pole& a, const Pole& b) {
        if (a.location.real() != b.location.real()) return a.location.real() < b.location.real();
        return a.location.imag() < b.location.imag();
    });
    return out;
}

// Sum over poles p of Res(F(s) e^{st}). With h(s) = (s - p)^m F(s) and
// h_j its Taylor coefficients at p, the residue is sum_{j+k=m-1} h_j t^k/k! e^{pt}.
inline ExponentialPolynomialSum inverse_laplace(const RationalFunction& rf) {
    if (rf.is_zero()) return {};
    if (!rf.strictly_proper()) throw std::invalid_argument("inverse_laplace: rational function is not strictly proper");
    const PoleSet ps = poles(rf);
    for (const auto& p : ps) {
        if (p.multiplicity > 4) {
            std::ostringstream msg;
            msg << "inverse_laplace: pole at " << p.location << " has unsupported multiplicity " << p.multiplicity;
            throw std::invalid_argument(msg.str());
        }
    }
    ExponentialPolynomialSum out;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const Pole& pole = ps[i];
        Polynomial rest = Polynomial::constant(rf.denominator().leading());
        for (std::size_t j = 0; j < ps.size(); ++j) {
            if (j != i) rest = rest * Polynomial::linear_factor(ps[j].location).pow(ps[j].multiplicity);
        }
        const int m = pole.multiplicity;
        const std::vector<cplx> n = rf.numerator().taylor_at(pole.location, m);
        const std::vector<cplx> q = rest.taylor_at(pole.location, m);
        std::vector<cplx> h(static_cast<std::size_t>(m));
        for (int j = 0; j < m; ++j) {
            cplx acc = n[static_cast<std::size_t>(j)];
            for (int k = 1; k <= j; ++k) acc -= q[static_cast<std::size_t>(k)] * h[static_cast<std::size_t>(j - k)];
            h[static_cast<std::size_t>(j)] = acc / q[0];
        }
        for (int k = 0; k < m; ++k) {
            out.add({h[static_cast<std::size_t>(m - 1 - k)] / std::tgamma(k + 1.0), k, pole.location});
        }
    }
    return out;
}

// --------------------------------- Pipeline ---------------------------------

struct LaplaceOrder {
    std::vector<RationalFunction> transforms;            // A_k(s) per basis state
    std::vector<ExponentialPolynomialSum> amplitudes;    // a_k(t) per basis state
};

struct LaplaceSolution {
    std::vector<LaplaceOrder> orders;

    cplx amplitude(int order, Eigen::Index k, double t) const {
        return orders.at(static_cast<std::size_t>(order)).amplitudes.at(static_cast<std::size_t>(k))(t);
    }
};

// Orders 0..max_order from |ground>. Order j's source g(t) (C a^(j-1))_k(t)
// is formed exactly as an exponential polynomial, transformed, solved at the
// level energy E_k and inverted.
inline LaplaceSolution laplace_pipeline(const SystemParams& p, int max_order) {
    p.validate();
    if (max_order < 0 || max_order > 2) throw std::invalid_argument("laplace_pipeline: orders above 2 are not supported");
    const Eigen::VectorXd e = h0_diagonal(p);
    const Eigen::MatrixXd c = coupling_operator(p);
    const auto dim = static_cast<std::size_t>(p.dim());
    const Eigen::Index ground = flat_index(p, ground_label(p));

    LaplaceSolution sol;
    LaplaceOrder zeroth;
    zeroth.transforms.resize(dim);
    zeroth.amplitudes.resize(dim);
    zeroth.transforms[static_cast<std::size_t>(ground)] =
        RationalFunction(Polynomial::constant(1.0), Polynomial({0.0, 1.0}));
    zeroth.amplitudes[static_cast<std::size_t>(ground)] =
        inverse_laplace(zeroth.transforms[static_cast<std::size_t>(ground)]);
    sol.orders.push_back(std::move(zeroth));

    const ExponentialPolynomialSum g = ExponentialPolynomialSum::cosine(p.g0, p.varpi_s);
    for (int j = 1; j <= max_order; ++j) {
        const LaplaceOrder& prev = sol.orders.back();
        LaplaceOrder next;
        next.transforms.resize(dim);
        next.amplitudes.resize(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            ExponentialPolynomialSum source;
            for (std::size_t l = 0; l < dim; ++l) {
                const double w = c(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
                if (w != 0.0 && !prev.amplitudes[l].empty()) source = source + cplx{w} * prev.amplitudes[l];
            }
            if (source.empty()) continue;
            const RationalFunction rhs = (g * source).laplace_transform();
            next.transforms[k] = solve_order_level(rhs, e(static_cast<Eigen::Index>(k)));
            next.amplitudes[k] = inverse_laplace(next.transforms[k]);
        }
        sol.orders.push_back(std::move(next));
    }
    return sol;
}

// ------------------------- Reference closed forms ---------------------------
// Evaluated verbatim for figure reproduction; the engine above is authoritative.

inline cplx closed_form_alpha_e1_laplace(const SystemParams& p, double t) {
    const double om = p.omega_plus();
    const double ws = p.varpi_s;
    const cplx ew = std::exp(I * (ws * t));
    return -(p.g0 / 2.0) *
           (ew / (ws - om) - ew / (ws + om) - 2.0 * std::exp(-I * (om * t)) * om / (ws * ws - om * om));
}

inline RationalFunction closed_form_second_order_transform(const SystemParams& p) {
    const double om = p.omega_plus();
    const double ws = p.varpi_s;
    const double g2 = p.g0 * p.g0;
    const Polynomial num =
        (-I * g2) * Polynomial({2.0 * ws * ws * om * om, 3.0 * I * ws * ws * om, 4.0 * ws * ws + om * om, 0.0, 1.0});
    const Polynomial den = cplx{2.0 * om} * Polynomial({0.0, 1.0}) * Polynomial({4.0 * ws * ws, 0.0, 1.0}) *
                           Polynomial::linear_factor(I * (ws - om)) * Polynomial::linear_factor(-I * (ws + om));
    return RationalFunction(num, den);
}

inline cplx closed_form_alpha_g0_second_order_laplace(const SystemParams& p, double t) {
    const double om = p.omega_plus();
    const double ws = p.varpi_s;
    const cplx first = (ws * ws * (6.0 - 4.0 * I * om * t) + 2.0 * I * om * om * (2.0 * om * t + 7.0 * I)) /
                       ((ws - om) * (ws - om) * (ws + om) * (ws + om));
    return p.g0 * p.g0 / 16.0 *
           (first + std::exp(-2.0 * I * ws * t) / (ws * (ws - om)) + std::exp(2.0 * I * ws * t) / (ws * (ws + om)));
}

}  // namespace qubosc
