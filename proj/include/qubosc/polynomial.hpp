// polynomial.hpp: Dense complex polynomials and companion-matrix roots

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qubosc {

// Coefficients in ascending degree; the highest stored coefficient is nonzero
// unless the polynomial is zero (no coefficients).
class Polynomial {
public:
    using cplx = std::complex<double>;

    Polynomial() = default;
    explicit Polynomial(std::vector<cplx> ascending) : c_(std::move(ascending)) { trim(); }
    Polynomial(std::initializer_list<cplx> ascending) : c_(ascending) { trim(); }

    static Polynomial constant(cplx v) { return Polynomial({v}); }
    // s - root
    static Polynomial linear_factor(cplx root) { return Polynomial({-root, cplx{1.0}}); }

    int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const noexcept { return c_.empty(); }
    const std::vector<cplx>& coefficients() const noexcept { return c_; }
    cplx coeff(int i) const { return i >= 0 && i < static_cast<int>(c_.size()) ? c_[static_cast<std::size_t>(i)] : cplx{}; }
    cplx leading() const { return c_.empty() ? cplx{} : c_.back(); }

    cplx operator()(cplx s) const {
        cplx acc{};
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
        return acc;
    }

    Polynomial derivative() const {
        if (c_.size() <= 1) return {};
        std::vector<cplx> d(c_.size() - 1);
        for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = static_cast<double>(i) * c_[i];
        return Polynomial(std::move(d));
    }

    // Taylor coefficients about p: out[j] = P^(j)(p) / j!, j < count.
    std::vector<cplx> taylor_at(cplx p, int count) const {
        std::vector<cplx> work = c_;
        std::vector<cplx> out(static_cast<std::size_t>(std::max(count, 0)));
        // Repeated synthetic division by (s - p).
        for (int j = 0; j < count && !work.empty(); ++j) {
            const std::size_t n = work.size();
            std::vector<cplx> q(n > 1 ? n - 1 : 0);
            cplx acc = work[n - 1];
            for (std::size_t i = n - 1; i-- > 0;) {
                q[i] = acc;
                acc = work[i] + acc * p;
            }
            out[static_cast<std::size_t>(j)] = acc;
            work = std::move(q);
        }
        return out;
    }

    // Quotient of division by (s - root); the remainder is discarded.
    Polynomial deflate(cplx root) const {
        if (c_.size() <= 1) return {};
        const std::size_t n = c_.size();
        std::vector<cplx> q(n - 1);
        cplx acc = c_[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) {
            q[i] = acc;
            acc = c_[i] + acc * root;
        }
        return Polynomial(std::move(q));
    }

    // Copy with leading coefficients below rel_tol * max|c| removed.
    Polynomial trimmed(double rel_tol) const {
        double scale = 0.0;
        for (const auto& v : c_) scale = std::max(scale, std::abs(v));
        std::vector<cplx> c = c_;
        while (!c.empty() && std::abs(c.back()) <= rel_tol * scale) c.pop_back();
        return Polynomial(std::move(c));
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        std::vector<cplx> c(std::max(a.c_.size(), b.c_.size()));
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = a.coeff(static_cast<int>(i)) + b.coeff(static_cast<int>(i));
        return Polynomial(std::move(c));
    }
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-1.0) * b; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<cplx> c(a.c_.size() + b.c_.size() - 1);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return Polynomial(std::move(c));
    }
    friend Polynomial operator*(cplx k, const Polynomial& a) {
        std::vector<cplx> c = a.c_;
        for (auto& v : c) v *= k;
        return Polynomial(std::move(c));
    }

    Polynomial pow(int n) const {
        Polynomial r = constant(1.0);
        for (int i = 0; i < n; ++i) r = r * *this;
        return r;
    }

private:
    void trim() {
        while (!c_.empty() && c_.back() == cplx{}) c_.pop_back();
    }

    std::vector<cplx> c_;
};

// Roots with repetition. Exact zero roots are split off from vanishing low
// coefficients; the rest are eigenvalues of the companion matrix, each
// polished by a few guarded Newton steps on the full polynomial.
inline std::vector<std::complex<double>> polynomial_roots(const Polynomial& poly) {
    using cplx = std::complex<double>;
    if (poly.is_zero()) throw std::invalid_argument("polynomial_roots: zero polynomial");
    std::vector<cplx> roots;
    const auto& c = poly.coefficients();
    std::size_t low = 0;
    while (low < c.size() && c[low] == cplx{}) {
        roots.emplace_back(0.0, 0.0);
        ++low;
    }
    const std::vector<cplx> rest(c.begin() + static_cast<std::ptrdiff_t>(low), c.end());
    const int n = static_cast<int>(rest.size()) - 1;
    if (n <= 0) return roots;

    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -rest[static_cast<std::size_t>(i)] / rest.back();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion, false);
    if (es.info() != Eigen::Success) throw std::runtime_error("polynomial_roots: companion eigensolve failed");

    const Polynomial reduced(rest);
    const Polynomial dreduced = reduced.derivative();
    for (int i = 0; i < n; ++i) {
        cplx r = es.eigenvalues()(i);
        for (int it = 0; it < 3; ++it) {
            const cplx f = reduced(r);
            const cplx df = dreduced(r);
            if (std::abs(df) == 0.0) break;
            const cplx candidate = r - f / df;
            if (!(std::abs(reduced(candidate)) < std::abs(f))) break;
            r = candidate;
        }
        roots.push_back(r);
    }
    return roots;
}

}  // namespace qubosc
