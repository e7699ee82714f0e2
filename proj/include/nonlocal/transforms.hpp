#ifndef NONLOCAL_TRANSFORMS_HPP
#define NONLOCAL_TRANSFORMS_HPP

#include <array>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nonlocal/core.hpp"
#include "nonlocal/symbol.hpp"

namespace nonlocal {

/// One term c t^m e^{rate t} of an exponential polynomial.
struct ExpTerm {
    Complex coefficient{};
    unsigned power = 0;
    Complex rate{};
};

/// Recognizes a tree in t built from constants, t, +, -, *, / by constants,
/// integer powers and exp of an affine argument. Returns nullopt otherwise.
std::optional<std::vector<ExpTerm>> as_exp_polynomial(const Node& node);

/// sum_j c_j m_j! / (s - rate_j)^{m_j + 1}
AnalyticSymbol laplace_of_exp_polynomial(const std::vector<ExpTerm>& terms);

/// Forcing term J(t) on t >= 0.
struct Forcing {
    TimeFunction j_eval;
    std::optional<AnalyticSymbol> closed_form_laplace;
    std::optional<double> decay_hint; // J(t) = O(e^{-decay_hint t})
    std::vector<double> breakpoints;  // discontinuities of J
    std::string description;
    bool identically_zero = false;

    Complex operator()(double t) const { return j_eval(t); }

    static Forcing zero();
    /// amplitude * e^{-rate t}
    static Forcing exp_decay(double rate, Complex amplitude = 1.0);
    /// amplitude * t^m e^{-rate t}
    static Forcing t_power_exp(unsigned m, double rate, Complex amplitude = 1.0);
    /// indicator of [a, b]
    static Forcing indicator(double a, double b);
    /// Expression in t; exponential polynomials get a closed-form transform.
    static Forcing from_text(std::string_view text);
    static Forcing from_exp_polynomial(std::vector<ExpTerm> terms, std::string description);
};

struct LaplaceSettings {
    double abs_tol = 1e-12;
    int max_intervals = 4000;
};

/// int_0^inf e^{-st} J(t) dt by adaptive quadrature on [0, T] with T chosen
/// from the decay rate; throws ErrorKind::Convergence if the tail bound at T
/// exceeds the tolerance.
Complex laplace_forward(const Forcing& J, Complex s, const LaplaceSettings& settings = {});

/// L(J) as a function: the closed form when available, quadrature otherwise.
ComplexFunction laplace_function(const Forcing& J, const LaplaceSettings& settings = {});

struct ForcingCheck {
    bool ok = true;
    double max_difference = 0.0; // closed form vs quadrature at the probes
    double tail_estimate = 0.0;  // |J(T)| e^{-Re(s) T} at the truncation point
    std::string message;
};

/// Checks integrability of J and, when a closed form is present, that
/// quadrature reproduces it at 10 probe points to `tolerance`.
ForcingCheck verify_forcing(const Forcing& J, double tolerance = 1e-8);

struct BromwichConfig {
    double sigma = 1.0;
    double y_max = 200.0;
    double quad_tol = 1e-9;
    int max_subdivisions = 200; // adaptive bisections allowed per panel

    void validate() const;
};

/// F(s) ~ sum_k c_k (s + shift)^{-k} fitted on |y| in [Y/2, 4Y]. The atoms
/// invert exactly to c_k t^{k-1} e^{-shift t} / (k-1)!.
struct AsymptoticModel {
    double shift = 1.0;
    VectorXc coefficients; // c_1 .. c_D
    double fit_residual = 0.0;

    bool empty() const { return coefficients.size() == 0; }
    Complex operator()(Complex s) const;
    /// n-th one-sided derivative of the atom sum at t >= 0.
    Complex atoms(int n, double t) const;
};

struct InversionResult {
    Complex value{};
    double quadrature_error = 0.0;
    double tail_estimate = 0.0;
    bool tail_integrated = false;
};

/// Inverse Laplace transform along Re(s) = sigma:
///
///   phi(t) = (e^{sigma t} / 2 pi) int e^{i y t} F(sigma + i y) dy.
///
/// The leading algebraic decay of F is removed by the fitted atoms, the
/// remainder is integrated on panels of width <= pi / (4 max(t, 1)) up to
/// y_max and its tail is either bounded away or summed by cycles with Wynn
/// acceleration. Samples of the remainder are cached per panel level, so
/// repeated evaluation on a t-grid is cheap. Thread-safe after construction.
class BromwichInverter {
public:
    explicit BromwichInverter(ComplexFunction F, BromwichConfig cfg = {});
    BromwichInverter(const BromwichInverter&) = delete;
    BromwichInverter& operator=(const BromwichInverter&) = delete;

    /// Value of the inversion integral; at t = 0 this is the midpoint of the
    /// jump, (phi(0+) + 0) / 2.
    Complex operator()(double t) const { return evaluate(t, 0, false).value; }
    /// lim_{tau -> t+} phi(tau).
    Complex one_sided(double t) const { return evaluate(t, 0, true).value; }
    /// n-th derivative (one-sided at t = 0): the line integral weighted by s^n.
    Complex derivative(int n, double t) const { return evaluate(t, n, true).value; }

    InversionResult evaluate(double t, int n, bool one_sided) const;

    /// lim_{t -> 0+} by Richardson extrapolation from t in {h, 2h, 4h}.
    Complex richardson_limit(double h = 1e-3) const;

    const AsymptoticModel& model() const { return model_; }
    const BromwichConfig& config() const { return cfg_; }
    bool identically_zero() const { return zero_; }
    Complex transform(Complex s) const { return F_(s); }
    /// F minus the fitted atoms.
    Complex remainder_at(Complex s) const { return remainder(s); }

private:
    static constexpr int max_level = 14;

    struct Level {
        std::once_flag once;
        double width = 0.0;
        int panels = 0;
        std::vector<Complex> upper; // F(sigma + i y) at the GK nodes, panel-major
        std::vector<Complex> lower; // F(sigma - i y)
    };

    Complex remainder(Complex s) const { return F_(s) - model_(s); }
    void fit_model();
    const Level& level(int l) const;
    Complex tail_integral(double y0, double t, int n, double tol, double& error) const;

    ComplexFunction F_;
    BromwichConfig cfg_;
    AsymptoticModel model_;
    bool zero_ = false;
    mutable std::array<Level, max_level + 1> levels_;
};

/// One-shot inversion (midpoint convention at t = 0).
Complex bromwich_invert(const ComplexFunction& F, double t, const BromwichConfig& cfg = {});

struct HardyNorm {
    double value = 0.0;
    double tail_estimate = 0.0;
    bool divergent = false;
    std::string reason;
};

/// mu_p(F, x) = ((1/2pi) int |F(x + iy)|^p dy)^{1/p}, integrated on
/// [-y_max, y_max] with a fitted power-law tail.
HardyNorm hardy_norm(const ComplexFunction& F, double p, double x, double y_max = 200.0);

struct HardyMembership {
    std::vector<double> x_grid;
    std::vector<HardyNorm> norms;
    double supremum = 0.0;
    bool bounded = true;
    std::string reason;
};

/// mu_p over an x-grid; flags divergence on any line and growth as x -> 0+.
HardyMembership hardy_membership(const ComplexFunction& F, double p,
                                 std::span<const double> x_grid, double y_max = 200.0);

inline const std::vector<double>& standard_hardy_grid()
{
    static const std::vector<double> grid = {0.01, 0.1, 1.0, 10.0};
    return grid;
}

/// L_n = (1/2 pi i) int s^n F(s) ds, i.e. one-sided derivatives at t = 0 of the
/// inversion of F. Throws ErrorKind::Hypothesis when a moment integral does
/// not converge.
std::vector<Complex> compute_Ln(const ComplexFunction& F, std::span<const int> n_list,
                                const BromwichConfig& cfg = {});
std::vector<Complex> compute_Ln(const BromwichInverter& inverter, std::span<const int> n_list);

struct SmoothnessOrder {
    int order = 0;
    double alpha = 0.0; // fitted decay exponent of |F(sigma + iy)|
    bool entire_decay = false;
    bool fit_ok = true;
    std::string warning;
};

/// Largest M <= n_cap with M < alpha - 1, alpha fitted on y in [y_max/4, y_max].
SmoothnessOrder smoothness_order(const ComplexFunction& F, double sigma, int n_cap,
                                 double y_max = 200.0);

} // namespace nonlocal

#endif
