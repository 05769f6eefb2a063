// Locates the resonance on a coarse switching-frequency grid, then prints
// P_e1(t) at resonance for the numerical and perturbative channels.

#include "qubosc/qubosc.hpp"

#include <cmath>
#include <cstdio>
#include <string>

int main() {
    using namespace qubosc;

    SweepConfig coarse = SweepConfig::defaults();
    coarse.varpi_grid = uniform_grid(5.5, 16.5, 23);
    const SweepResult scan = run_sweep(coarse);
    const double ws = resonance_estimate(scan, Method::ODE);
    std::printf("resonance at ws = %.3f rad/ns (omega0 + omega_r = %.3f)\n\n", ws, coarse.base.omega_plus());

    SweepConfig slice = SweepConfig::defaults();
    slice.varpi_grid = {ws};
    slice.time = TimeGrid{0.0, 20.0, 10};
    slice.methods = {Method::ODE, Method::FloquetExact, Method::Perturbation, Method::Laplace};
    const SweepResult r = run_sweep(slice);

    std::printf("%6s", "t(ns)");
    for (Method m : r.methods()) std::printf(" %14s", std::string(method_name(m)).c_str());
    std::printf(" %14s\n", "(g0 t/2)^2");
    for (std::size_t n = 0; n < r.times.size(); ++n) {
        const double t = r.times[n];
        std::printf("%6.1f", t);
        for (Method m : r.methods()) std::printf(" %14.6e", r.p_e1.at(m)(0, static_cast<Eigen::Index>(n)));
        std::printf(" %14.6e\n", std::pow(slice.base.g0 * t / 2.0, 2));
    }
    return 0;
}
