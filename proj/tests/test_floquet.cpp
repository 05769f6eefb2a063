#include "qubosc/floquet.hpp"
#include "qubosc/integrator.hpp"
#include "qubosc/trotter.hpp"

#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <numbers>
#include <random>

using namespace qubosc;

namespace {

constexpr double kPi = std::numbers::pi;

OperatorMatrix random_unitary(Eigen::Index n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    OperatorMatrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
    Eigen::HouseholderQR<OperatorMatrix> qr(a);
    return qr.householderQ() * OperatorMatrix::Identity(n, n);
}

StateVector random_state(Eigen::Index n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    StateVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(g(rng), g(rng));
    return v.normalized();
}

}  // namespace

TEST(QuasienergyFold, Examples) {
    const double t = 0.7;
    EXPECT_EQ(quasienergy_fold(0.0, t), 0.0);
    EXPECT_NEAR(quasienergy_fold(2.0 * kPi / t, t), 0.0, 1e-14);
    EXPECT_NEAR(quasienergy_fold(kPi / t + 0.1, t), -kPi / t + 0.1, 1e-13);
    EXPECT_DOUBLE_EQ(quasienergy_fold(kPi / t, t), kPi / t);
    EXPECT_THROW(quasienergy_fold(1.0, 0.0), std::invalid_argument);
}

TEST(QuasienergyFold, IdempotentAndInZone) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-200.0, 200.0);
    for (int i = 0; i < 1000; ++i) {
        const double t = 0.05 + std::abs(u(rng)) / 100.0;
        const double f = quasienergy_fold(u(rng), t);
        EXPECT_GT(f, -kPi / t);
        EXPECT_LE(f, kPi / t);
        EXPECT_EQ(quasienergy_fold(f, t), f);
    }
}

TEST(FloquetDecompose, Identity) {
    const auto d = floquet_decompose(OperatorMatrix::Identity(4, 4), 0.5);
    for (Eigen::Index a = 0; a < 4; ++a) {
        EXPECT_EQ(d.quasienergies(a), 0.0);
        EXPECT_LE((d.mode(a) - StateVector::Unit(4, a)).norm(), 1e-15);
    }
}

TEST(FloquetDecompose, PhaseReadOff) {
    OperatorMatrix u(1, 1);
    u(0, 0) = std::exp(-I * 0.3);
    const auto d = floquet_decompose(u, 1.0);
    ASSERT_EQ(d.size(), 1);
    EXPECT_NEAR(d.quasienergies(0), 0.3, 1e-15);
}

TEST(FloquetDecompose, DecoupledLevels) {
    SystemParams p;
    p.g0 = 0.0;
    p.varpi_s = 9.0;
    const ExactPeriodPropagator exact(p);
    const auto d = floquet_decompose(exact.monodromy(), p.period());
    std::vector<double> expected;
    for (double e : {0.0, 6.0, 5.0, 11.0}) expected.push_back(quasienergy_fold(e, p.period()));
    std::sort(expected.begin(), expected.end());
    // RK4 phase error of the monodromy dominates.
    for (Eigen::Index a = 0; a < 4; ++a) EXPECT_NEAR(d.quasienergies(a), expected[static_cast<std::size_t>(a)], 1e-8);
}

TEST(FloquetDecompose, RejectsNonUnitary) {
    OperatorMatrix u = OperatorMatrix::Identity(4, 4);
    u(0, 0) = 1.01;
    EXPECT_THROW(floquet_decompose(u, 1.0), std::invalid_argument);
    EXPECT_THROW(floquet_decompose(OperatorMatrix::Identity(4, 4), -1.0), std::invalid_argument);
}

TEST(FloquetDecompose, SortedUnitModulusOrthonormal) {
    SystemParams p;
    p.photon_cutoff = 2;
    const OperatorMatrix u = one_period_propagator(p, {256, CouplingScheme::SampledCosine});
    const auto d = floquet_decompose(u, p.period());
    for (Eigen::Index a = 0; a + 1 < d.size(); ++a) EXPECT_LE(d.quasienergies(a), d.quasienergies(a + 1));
    for (Eigen::Index a = 0; a < d.size(); ++a) {
        EXPECT_NEAR(std::abs(d.raw_eigenvalues(a)), 1.0, 1e-10);
        EXPECT_LE((u * d.mode(a) - d.raw_eigenvalues(a) * d.mode(a)).norm(), 1e-10);
        Eigen::Index dom = 0;
        d.mode(a).cwiseAbs().maxCoeff(&dom);
        EXPECT_EQ(d.mode(a)(dom).imag(), 0.0);
        EXPECT_GT(d.mode(a)(dom).real(), 0.0);
    }
    EXPECT_LE((d.modes.adjoint() * d.modes - OperatorMatrix::Identity(d.size(), d.size())).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_NEAR(d.condition_number, 1.0, 1e-8);
}

TEST(FloquetDecompose, DegenerateSpectrumStillABasis) {
    const OperatorMatrix v = random_unitary(6, 5);
    Eigen::VectorXcd lam(6);
    lam << 1.0, 1.0, std::exp(I * 0.4), std::exp(I * 0.4), std::exp(I * 0.4), std::exp(-I * 2.0);
    const OperatorMatrix u = v * lam.asDiagonal() * v.adjoint();
    const auto d = floquet_decompose(u, 1.0);
    EXPECT_LE((d.modes.adjoint() * d.modes - OperatorMatrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-10);
    const StateVector psi = random_state(6, 9);
    const auto c = overlaps(d, psi);
    EXPECT_LE((d.modes * c.c_alpha - psi).norm(), 1e-10);
    EXPECT_LE((evolve_floquet(d, c, 3.0, [](double) -> OperatorMatrix { return OperatorMatrix(); }) -
               u * u * u * psi).norm(), 1e-10);
}

TEST(Overlaps, ModeAsInitialState) {
    SystemParams p;
    const auto d = floquet_decompose(one_period_propagator(p, {}), p.period());
    const auto c = overlaps(d, d.mode(2));
    for (Eigen::Index a = 0; a < 4; ++a) EXPECT_NEAR(std::abs(c.c_alpha(a) - (a == 2 ? 1.0 : 0.0)), 0.0, 1e-12);
}

TEST(Overlaps, ReconstructionOfRandomStates) {
    SystemParams p;
    p.photon_cutoff = 3;
    p.omega0 = {5.0, 4.5};
    const auto d = floquet_decompose(one_period_propagator(p, {64, CouplingScheme::SampledCosine}), p.period());
    for (unsigned seed = 0; seed < 10; ++seed) {
        const StateVector psi = random_state(p.dim(), seed);
        EXPECT_LE((d.modes * overlaps(d, psi).c_alpha - psi).norm(), 1e-10);
    }
    EXPECT_THROW(overlaps(d, StateVector::Ones(p.dim())), std::invalid_argument);
    EXPECT_THROW(overlaps(d, StateVector::Unit(3, 0)), std::invalid_argument);
}

TEST(Overlaps, GroundStateUsesTheG0E1Block) {
    SystemParams p;
    const auto d = floquet_decompose(one_period_propagator(p, {}), p.period());
    const auto c = overlaps(d, basis_state(p, {{0}, 0}));
    double on_block = 0.0;
    for (Eigen::Index a = 0; a < 4; ++a) {
        const StateVector m = d.mode(a);
        const bool block = std::abs(m(basis::g1)) < 1e-12 && std::abs(m(basis::e0)) < 1e-12;
        if (block) on_block += std::norm(c.c_alpha(a));
        else EXPECT_LE(std::abs(c.c_alpha(a)), 1e-12);
    }
    EXPECT_NEAR(on_block, 1.0, 1e-12);
}

TEST(EvolveFloquet, StartsAtInitialState) {
    SystemParams p;
    const TrotterPropagator tp(p, {});
    const auto d = floquet_decompose(tp.monodromy(), p.period());
    const StateVector psi = random_state(4, 1);
    const auto c = overlaps(d, psi);
    EXPECT_LE((evolve_floquet(d, c, 0.0, [&](double s) { return tp(s); }) - psi).norm(), 1e-10);
    EXPECT_THROW(evolve_floquet(d, c, -1.0, [&](double s) { return tp(s); }), std::invalid_argument);
}

TEST(EvolveFloquet, StroboscopicIdentity) {
    SystemParams p;
    p.varpi_s = 10.3;
    const TrotterPropagator tp(p, {128, CouplingScheme::SampledCosine});
    const auto d = floquet_decompose(tp.monodromy(), p.period());
    const StateVector psi = random_state(4, 2);
    const auto c = overlaps(d, psi);
    StateVector direct = psi;
    for (int k = 1; k <= 50; ++k) {
        direct = tp.monodromy() * direct;
        const StateVector f = evolve_floquet(d, c, k * p.period(), [&](double s) { return tp(s); });
        EXPECT_LE((f - direct).norm(), 1e-9) << "k = " << k;
    }
}

TEST(EvolveFloquet, ExactMonodromyMatchesIntegrator) {
    SystemParams p;
    const ExactPeriodPropagator exact(p);
    const auto d = floquet_decompose(exact.monodromy(), p.period());
    const StateVector psi0 = basis_state(p, {{0}, 0});
    const auto c = overlaps(d, psi0);
    const Trajectory tr = integrate_schrodinger(p, psi0, {0.0, 20.0, 2000});
    double worst = 0.0;
    for (std::size_t n = 0; n < tr.size(); ++n) {
        const StateVector f = evolve_floquet(d, c, tr.times[n], [&](double s) { return exact(s); });
        worst = std::max(worst, std::abs(std::norm(f(basis::e1)) - std::norm(tr.states[n](basis::e1))));
    }
    EXPECT_LE(worst, 1e-7);
}

TEST(EvolveFloquet, DimensionMismatch) {
    const auto d = floquet_decompose(OperatorMatrix::Identity(4, 4), 1.0);
    const auto c = overlaps(d, StateVector::Unit(4, 0));
    EXPECT_THROW(evolve_floquet(d, c, 0.5, [](double) { return OperatorMatrix(OperatorMatrix::Identity(3, 3)); }),
                 std::invalid_argument);
}

TEST(ClosedForm, DerivedDecoupledLimit) {
    SystemParams p;
    p.g0 = 0.0;
    const double tau = 0.01;
    const auto es = closed_form_step_eigensystem(p, tau);
    std::vector<cplx> expected{1.0, std::exp(-I * (6.0 * tau)), std::exp(-I * (5.0 * tau)), std::exp(-I * (11.0 * tau))};
    for (const cplx& e : expected) {
        double best = INFINITY;
        for (const cplx& l : es.eigenvalues) best = std::min(best, std::abs(l - e));
        EXPECT_LE(best, 1e-14);
    }
}

TEST(ClosedForm, DerivedMatchesNumericEigensolve) {
    SystemParams p;
    for (double tau : {0.01, 0.05, 0.3}) {
        const OperatorMatrix step = single_step_propagator(p, tau, CouplingScheme::HalfPeriodAveraged, 0.0);
        const auto cmp = compare_closed_form(p, tau, ClosedFormChannel::Derived, step);
        EXPECT_TRUE(cmp.all_match()) << cmp.report();
    }
}

TEST(ClosedForm, BlockSupportPattern) {
    SystemParams p;
    for (auto channel : {ClosedFormChannel::Derived, ClosedFormChannel::Printed}) {
        const auto es = closed_form_step_eigensystem(p, 0.01, channel);
        for (int k = 0; k < 2; ++k) {
            EXPECT_EQ(es.eigenvectors[static_cast<std::size_t>(k)](basis::g1), cplx(0.0));
            EXPECT_EQ(es.eigenvectors[static_cast<std::size_t>(k)](basis::e0), cplx(0.0));
        }
        for (int k = 2; k < 4; ++k) {
            EXPECT_EQ(es.eigenvectors[static_cast<std::size_t>(k)](basis::g0), cplx(0.0));
            EXPECT_EQ(es.eigenvectors[static_cast<std::size_t>(k)](basis::e1), cplx(0.0));
        }
    }
}

TEST(ClosedForm, PrintedChannelMismatchIsReported) {
    SystemParams p;
    const double tau = 0.01;
    const OperatorMatrix step = single_step_propagator(p, tau, CouplingScheme::HalfPeriodAveraged, 0.0);
    const auto cmp = compare_closed_form(p, tau, ClosedFormChannel::Printed, step);
    const std::string report = cmp.report();
    EXPECT_NE(report.find("printed"), std::string::npos);
    EXPECT_FALSE(cmp.all_match());
    EXPECT_NE(report.find("MISMATCH"), std::string::npos);
    // Printed eigenvalues are not even on the unit circle.
    const auto es = closed_form_step_eigensystem(p, tau, ClosedFormChannel::Printed);
    double off = 0.0;
    for (const cplx& l : es.eigenvalues) off = std::max(off, std::abs(std::abs(l) - 1.0));
    EXPECT_GT(off, 1e-3);
}

TEST(ClosedForm, RequiresSingleQubitMinimalCutoff) {
    SystemParams p;
    p.photon_cutoff = 2;
    EXPECT_THROW(closed_form_step_eigensystem(p, 0.01), std::invalid_argument);
}
