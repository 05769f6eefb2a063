#include "qubosc/integrator.hpp"
#include "qubosc/trotter.hpp"

#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <numbers>

using namespace qubosc;

namespace {

// Scaling-and-squaring Pade exponential of -i A t.
OperatorMatrix expm_oracle(const OperatorMatrix& a, double t) {
    const OperatorMatrix x = (-I * t) * a;
    return x.exp();
}

double max_abs(const OperatorMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(TrotterConfig, Validation) {
    EXPECT_NO_THROW(TrotterConfig{}.validate());
    EXPECT_THROW((TrotterConfig{1}).validate(), std::invalid_argument);
    EXPECT_THROW((TrotterConfig{7}).validate(), std::invalid_argument);
    EXPECT_THROW((TrotterConfig{0}).validate(), std::invalid_argument);
}

TEST(InteractionExponential, ZeroCouplingIsIdentity) {
    SystemParams p;
    EXPECT_LE(max_abs(interaction_exponential(p, 0.0, 0.3) - OperatorMatrix::Identity(4, 4)), 1e-15);
}

TEST(InteractionExponential, QuarterTurnSwapsGroundAndE1) {
    SystemParams p;
    const OperatorMatrix u = interaction_exponential(p, 1.0, std::numbers::pi / 2.0);
    const StateVector out = u * basis_state(p, {{0}, 0});
    EXPECT_NEAR(std::abs(out(basis::e1) - (-I)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(out(basis::g0)), 0.0, 1e-15);
}

TEST(InteractionExponential, MatchesExpmForSeveralShapes) {
    for (int nq = 1; nq <= 3; ++nq) {
        for (int nmax = 1; nmax <= 4; ++nmax) {
            SystemParams p;
            p.omega0.assign(static_cast<std::size_t>(nq), 5.0);
            p.photon_cutoff = nmax;
            const OperatorMatrix c = coupling_operator(p).cast<cplx>();
            for (double theta : {0.003, 0.7, 2.9}) {
                const OperatorMatrix fast = interaction_exponential(p, theta, 1.0);
                EXPECT_LE(max_abs(fast - expm_oracle(c, theta)), 1e-12) << nq << " qubits, n_max " << nmax;
            }
        }
    }
}

TEST(SingleStep, DecoupledPhases) {
    SystemParams p;
    p.g0 = 0.0;
    const double tau = 0.05;
    const OperatorMatrix u = single_step_propagator(p, tau, CouplingScheme::HalfPeriodAveraged, 0.0);
    Eigen::Vector4cd d(1.0, std::exp(-I * (6.0 * tau)), std::exp(-I * (5.0 * tau)), std::exp(-I * (11.0 * tau)));
    EXPECT_LE(max_abs(u - OperatorMatrix(d.asDiagonal())), 1e-15);
}

TEST(SingleStep, HandWrittenMatrixEntries) {
    SystemParams p;
    const double tau = 0.05;
    const OperatorMatrix u = single_step_propagator(p, tau, CouplingScheme::HalfPeriodAveraged, 0.0);
    const double c = std::cos(0.0025), s = std::sin(0.0025);
    auto ex = [](double x) { return std::exp(-I * x); };
    // Hand-written 4x4 base matrix in the (|g,0>, |g,1>, |e,0>, |e,1>) basis.
    Eigen::Matrix4cd m;
    m << c, 0.0, 0.0, -I * s * ex(11.0 * tau),
         0.0, c * ex(6.0 * tau), -I * s * ex(5.0 * tau), 0.0,
         0.0, -I * s * ex(6.0 * tau), c * ex(5.0 * tau), 0.0,
         -I * s, 0.0, 0.0, c * ex(11.0 * tau);
    EXPECT_LE(max_abs(u - OperatorMatrix(m)), 1e-15);
    EXPECT_NEAR(std::abs(u(0, 0) - c), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(u(0, 3) - (-I * s * ex(0.55))), 0.0, 1e-15);
    EXPECT_LE(unitarity_error(u), 1e-12);
}

TEST(SingleStep, ProductOfExactFactors) {
    SystemParams p;
    p.omega0 = {4.0, 5.5};
    p.photon_cutoff = 2;
    const double tau = 0.02, t = 0.31;
    const OperatorMatrix h0 = build_h0(p);
    const OperatorMatrix c = coupling_operator(p).cast<cplx>();
    const OperatorMatrix expected = expm_oracle(coupling(p, t) * c, tau) * expm_oracle(h0, tau);
    EXPECT_LE(max_abs(single_step_propagator(p, tau, CouplingScheme::SampledCosine, t) - expected), 1e-12);
    EXPECT_THROW(single_step_propagator(p, 0.0, CouplingScheme::SampledCosine, t), std::invalid_argument);
}

TEST(OnePeriod, AveragedEqualsPowerOfBaseMatrix) {
    SystemParams p;
    for (int nt : {2, 16, 256}) {
        const TrotterConfig cfg{nt, CouplingScheme::HalfPeriodAveraged};
        const OperatorMatrix base = single_step_propagator(p, p.period() / nt, cfg.scheme, 0.0);
        OperatorMatrix power = OperatorMatrix::Identity(4, 4);
        for (int k = 0; k < nt; ++k) power = base * power;
        EXPECT_LE(max_abs(one_period_propagator(p, cfg) - power), 1e-12);
    }
}

TEST(OnePeriod, DecoupledIsDiagonalPhases) {
    SystemParams p;
    p.g0 = 0.0;
    p.varpi_s = 9.0;
    const Eigen::VectorXd e = h0_diagonal(p);
    for (auto scheme : {CouplingScheme::HalfPeriodAveraged, CouplingScheme::SampledCosine}) {
        const OperatorMatrix u = one_period_propagator(p, {64, scheme});
        for (Eigen::Index k = 0; k < 4; ++k) EXPECT_NEAR(std::abs(u(k, k) - std::exp(-I * (e(k) * p.period()))), 0.0, 1e-12);
        EXPECT_LE(max_abs(u - OperatorMatrix(u.diagonal().asDiagonal())), 1e-15);
    }
}

TEST(OnePeriod, UnitaryForBothSchemes) {
    SystemParams p;
    p.photon_cutoff = 3;
    for (auto scheme : {CouplingScheme::HalfPeriodAveraged, CouplingScheme::SampledCosine})
        EXPECT_LE(unitarity_error(one_period_propagator(p, {256, scheme})), 1e-10);
}

TEST(OnePeriod, SampledConvergesFirstOrderToExactMonodromy) {
    SystemParams p;
    p.g0 = 1.0;  // makes the splitting error visible above RK4 error
    const OperatorMatrix exact = propagate_operator(p, 0.0, p.period(), 20000);
    const StateVector psi0 = basis_state(p, {{0}, 0});
    std::vector<double> err;
    for (int nt : {64, 256, 1024}) {
        const OperatorMatrix u = one_period_propagator(p, {nt, CouplingScheme::SampledCosine});
        err.push_back(((u - exact) * psi0).norm());
    }
    EXPECT_GT(err[0], err[1]);
    EXPECT_GT(err[1], err[2]);
    // C / N_t: err * N_t roughly constant.
    for (std::size_t i = 0; i + 1 < err.size(); ++i) {
        const double ratio = err[i] / err[i + 1];
        EXPECT_GE(ratio, 4.0 / 3.0);
        EXPECT_LE(ratio, 12.0);
    }
}

TEST(OnePeriod, AveragedConvergesToAveragedHamiltonian) {
    SystemParams p;
    p.g0 = 1.0;
    const OperatorMatrix h = build_h0(p) + 0.5 * p.g0 * coupling_operator(p).cast<cplx>();
    const OperatorMatrix limit = expm_oracle(h, p.period());
    double previous = INFINITY;
    for (int nt : {64, 256, 1024}) {
        const double e = max_abs(one_period_propagator(p, {nt, CouplingScheme::HalfPeriodAveraged}) - limit);
        EXPECT_LT(e, previous);
        previous = e;
    }
    EXPECT_LT(previous, 1e-3);
}

TEST(OnePeriod, StrangIsSecondOrder) {
    SystemParams p;
    p.g0 = 1.0;
    const OperatorMatrix h = build_h0(p) + 0.5 * p.g0 * coupling_operator(p).cast<cplx>();
    const OperatorMatrix limit = expm_oracle(h, p.period());
    const double e1 = max_abs(one_period_propagator(p, {64, CouplingScheme::HalfPeriodAveraged, StepOrdering::Strang}) - limit);
    const double e2 = max_abs(one_period_propagator(p, {128, CouplingScheme::HalfPeriodAveraged, StepOrdering::Strang}) - limit);
    EXPECT_NEAR(e1 / e2, 4.0, 1.0);
}

TEST(TrotterPropagator, PartialStepsAndBounds) {
    SystemParams p;
    const TrotterPropagator tp(p, {16, CouplingScheme::SampledCosine});
    EXPECT_EQ(tp(0.0), OperatorMatrix(OperatorMatrix::Identity(4, 4)));
    EXPECT_EQ(tp(p.period()), tp.monodromy());
    const double s = 2.5 * tp.tau();
    const OperatorMatrix expected = single_step_propagator(p, 0.5 * tp.tau(), CouplingScheme::SampledCosine, 2.25 * tp.tau()) *
                                    single_step_propagator(p, tp.tau(), CouplingScheme::SampledCosine, 1.5 * tp.tau()) *
                                    single_step_propagator(p, tp.tau(), CouplingScheme::SampledCosine, 0.5 * tp.tau());
    EXPECT_LE(max_abs(tp(s) - expected), 1e-14);
    EXPECT_THROW(tp(-0.1), std::out_of_range);
    EXPECT_THROW(tp(2.0 * p.period()), std::out_of_range);
}
