#ifndef NONLOCAL_ORACLES_HPP
#define NONLOCAL_ORACLES_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nonlocal/core.hpp"
#include "nonlocal/solver.hpp"
#include "nonlocal/symbol.hpp"
#include "nonlocal/transforms.hpp"

namespace nonlocal {

/// A smooth function with closed-form derivatives of every order.
struct AnalyticVectorProfile {
    TimeFunction phi_eval;
    std::function<Complex(int, double)> derivative_rule; // (n, t) -> phi^{(n)}(t)
    std::function<double(int)> norm_bound;              // ||phi^{(n)}|| <= c(n) ||phi||
    std::string description;

    Complex operator()(double t) const { return phi_eval(t); }

    /// e^{-t/k}; c(n) = k^{-n}.
    static AnalyticVectorProfile exponential(double k);
    /// coefficient * t^m e^{omega t}
    static AnalyticVectorProfile exponential_atom(unsigned m, Complex omega, Complex coefficient = 1.0);
    /// sin(tau t) / (tau t) = (1/2) int_{-1}^{1} e^{i tau t u} du; c(n) = tau^n.
    static AnalyticVectorProfile band_limited(double tau);
};

struct SeriesApplication {
    Complex value{};
    int terms = 0;
    bool converged = false;
    bool diverged = false;
};

/// sum_{n=0}^{N} f^{(n)}(0)/n! phi^{(n)}(t), stopping early once terms drop
/// below 1e-16 of the partial sum.
SeriesApplication apply_truncated_series(const AnalyticSymbol& f, const AnalyticVectorProfile& phi,
                                         double t, int N = 60);
SeriesApplication apply_truncated_series(const VectorXc& taylor, const AnalyticVectorProfile& phi,
                                         double t, int N);

/// RK4 solution of the constant-coefficient ODE f(d/dt) phi = J with
/// phi^{(j)}(0) = initial[j], step <= 1e-3. A constant symbol gives J / f.
std::vector<Complex> classical_ode_reference(const AnalyticSymbol& f, const Forcing& J,
                                             std::span<const Complex> initial,
                                             std::span<const double> t_grid, double max_step = 1e-3);

struct ResidualReport {
    std::vector<double> t;
    std::vector<double> residual;
    double sup = 0.0;
    int terms = 0;
    int bromwich_order = -1; // highest Bromwich-remainder derivative included; -1 = all
    bool passed = false;
    std::vector<std::string> warnings;
};

/// sup over t_grid of |sum_n c_n phi^{(n)}(t) - J(t)| for a closed-form profile.
ResidualReport residual_check(const AnalyticSymbol& f, const AnalyticVectorProfile& phi, const Forcing& J,
                              std::span<const double> t_grid, int N = 60, double tolerance = 1e-6);

/// Same for a computed solution: exact derivatives for the residue atoms and
/// the fitted Bromwich atoms, moment integrals for the Bromwich remainder up
/// to its smoothness order (higher orders are dropped with a warning).
ResidualReport residual_check(const AnalyticSymbol& f, const Solution& solution, const Forcing& J,
                              std::span<const double> t_grid, int N = 60, double tolerance = 1e-6);

} // namespace nonlocal

#endif
