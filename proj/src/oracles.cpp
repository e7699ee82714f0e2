#include "nonlocal/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "nonlocal/quadrature.hpp"

namespace nonlocal {

namespace {

    double binomial(int n, int k)
    {
        double b = 1.0;
        for (int j = 1; j <= k; ++j)
            b = b * (n - k + j) / j;
        return b;
    }

    double falling(int m, int j) // m! / (m - j)!
    {
        double f = 1.0;
        for (int i = 0; i < j; ++i)
            f *= m - i;
        return f;
    }

    // Highest order n for which the moment integral of s^n R is trustworthy.
    int remainder_order(const BromwichInverter& inv, int N, std::vector<std::string>& warnings)
    {
        if (inv.identically_zero())
            return N;
        const auto& cfg = inv.config();
        const Complex up(cfg.sigma, cfg.y_max), down(cfg.sigma, -cfg.y_max);
        const double r = std::max(std::abs(inv.remainder_at(up)), std::abs(inv.remainder_at(down)));
        const double F = std::max(std::abs(inv.transform(up)), std::abs(inv.transform(down)));
        if (r <= 1e-6 * F && !inv.model().empty()) {
            // The atoms carry the algebraic decay of F up to (s + 1)^{-D}, so
            // the remainder is O(y^{-D-1}) and moments below D converge. Its
            // own decay fit is useless here, being at rounding level.
            return std::max<int>(0, static_cast<int>(inv.model().coefficients.size()) - 1);
        }
        const auto order = smoothness_order([&inv](Complex s) { return inv.remainder_at(s); },
                                            cfg.sigma, N, cfg.y_max);
        if (!order.fit_ok)
            warnings.push_back("Bromwich remainder: " + order.warning);
        return order.order;
    }

    ResidualReport finish(ResidualReport report, double tolerance)
    {
        report.sup = 0.0;
        for (double r : report.residual)
            report.sup = std::max(report.sup, r);
        report.passed = report.sup < tolerance;
        return report;
    }

} // namespace

AnalyticVectorProfile AnalyticVectorProfile::exponential(double k)
{
    if (!(k > 0.0))
        throw Error(ErrorKind::Domain, "exponential profile needs k > 0");
    AnalyticVectorProfile p;
    const double rate = -1.0 / k;
    p.phi_eval = [rate](double t) { return Complex(std::exp(rate * t)); };
    p.derivative_rule = [rate](int n, double t) { return Complex(std::pow(rate, n) * std::exp(rate * t)); };
    p.norm_bound = [k](int n) { return std::pow(k, -n); };
    std::ostringstream os;
    os << "exp(-t/" << k << ")";
    p.description = os.str();
    return p;
}

AnalyticVectorProfile AnalyticVectorProfile::exponential_atom(unsigned m, Complex omega, Complex coefficient)
{
    AnalyticVectorProfile p;
    const int mm = static_cast<int>(m);
    p.phi_eval = [=](double t) { return coefficient * std::pow(t, mm) * std::exp(omega * t); };
    p.derivative_rule = [=](int n, double t) {
        // Leibniz: sum_j C(n, j) (t^m)^{(j)} omega^{n-j} e^{omega t}
        Complex sum = 0.0;
        for (int j = 0; j <= std::min(n, mm); ++j)
            sum += binomial(n, j) * falling(mm, j) * std::pow(t, mm - j) * std::pow(omega, n - j);
        return coefficient * sum * std::exp(omega * t);
    };
    p.norm_bound = [=](int n) { return std::pow(std::abs(omega) + mm, n); };
    std::ostringstream os;
    os << "t^" << m << " exp(" << omega << " t)";
    p.description = os.str();
    return p;
}

AnalyticVectorProfile AnalyticVectorProfile::band_limited(double tau)
{
    if (!(tau > 0.0))
        throw Error(ErrorKind::Domain, "band-limited profile needs tau > 0");
    auto nodes = std::make_shared<std::vector<double>>();
    auto weights = std::make_shared<std::vector<double>>();
    quad::gauss_legendre(96, *nodes, *weights);
    AnalyticVectorProfile p;
    p.derivative_rule = [=](int n, double t) {
        Complex sum = 0.0;
        for (std::size_t j = 0; j < nodes->size(); ++j) {
            const double u = (*nodes)[j];
            sum += (*weights)[j] * std::pow(Complex(0.0, tau * u), n) * std::polar(1.0, tau * t * u);
        }
        return 0.5 * sum;
    };
    p.phi_eval = [rule = p.derivative_rule](double t) { return rule(0, t); };
    p.norm_bound = [tau](int n) { return std::pow(tau, n); };
    std::ostringstream os;
    os << "sin(" << tau << " t)/(" << tau << " t)";
    p.description = os.str();
    return p;
}

SeriesApplication apply_truncated_series(const VectorXc& taylor, const AnalyticVectorProfile& phi,
                                         double t, int N)
{
    if (taylor.size() < N + 1)
        throw Error(ErrorKind::Dimension, "apply_truncated_series: not enough Taylor coefficients");
    SeriesApplication out;
    Complex sum = 0.0;
    int quiet = 0;
    double tail_peak = 0.0;
    for (int n = 0; n <= N; ++n) {
        const Complex term = taylor(n) == Complex(0.0) ? Complex(0.0) : taylor(n) * phi.derivative_rule(n, t);
        sum += term;
        out.terms = n + 1;
        if (n >= 3 * N / 4)
            tail_peak = std::max(tail_peak, std::abs(term));
        const bool small = std::abs(term) <= 1e-16 * std::abs(sum);
        quiet = small ? quiet + 1 : 0;
        if (quiet >= 3 && n >= 4) {
            out.converged = true;
            break;
        }
    }
    out.value = sum;
    if (!out.converged) {
        // Terms still comparable to the sum at the end mean a divergent series.
        out.diverged = tail_peak > 1e-8 * std::max(std::abs(sum), 1e-300);
        out.converged = !out.diverged;
    }
    return out;
}

SeriesApplication apply_truncated_series(const AnalyticSymbol& f, const AnalyticVectorProfile& phi,
                                         double t, int N)
{
    if (N < 0)
        throw Error(ErrorKind::Domain, "apply_truncated_series: N must be non-negative");
    return apply_truncated_series(taylor_coefficients(f, N), phi, t, N);
}

std::vector<Complex> classical_ode_reference(const AnalyticSymbol& f, const Forcing& J,
                                             std::span<const Complex> initial,
                                             std::span<const double> t_grid, double max_step)
{
    if (!f.is_polynomial())
        throw Error(ErrorKind::Domain, "classical_ode_reference: symbol must be a polynomial");
    const VectorXc c = taylor_coefficients(f, 32);
    const double scale = c.cwiseAbs().maxCoeff();
    int m = 0;
    for (int k = 0; k < c.size(); ++k)
        if (std::abs(c(k)) > 1e-14 * scale)
            m = k;
    if (m == 32)
        throw Error(ErrorKind::Domain, "classical_ode_reference: degree too high");
    std::vector<Complex> out;
    out.reserve(t_grid.size());
    if (m == 0) {
        if (scale == 0.0)
            throw Error(ErrorKind::Domain, "classical_ode_reference: zero symbol");
        for (double t : t_grid)
            out.push_back(J(t) / c(0));
        return out;
    }
    if (static_cast<int>(initial.size()) != m)
        throw Error(ErrorKind::Dimension, "classical_ode_reference: need one initial value per order");

    using State = Eigen::VectorXcd;
    auto rhs = [&](double t, const State& y) {
        State dy(m);
        for (int k = 0; k + 1 < m; ++k)
            dy(k) = y(k + 1);
        Complex acc = J(t);
        for (int k = 0; k < m; ++k)
            acc -= c(k) * y(k);
        dy(m - 1) = acc / c(m);
        return dy;
    };
    State y(m);
    for (int k = 0; k < m; ++k)
        y(k) = initial[static_cast<std::size_t>(k)];
    double t = 0.0;
    for (double target : t_grid) {
        if (target < t)
            throw Error(ErrorKind::Domain, "classical_ode_reference: t_grid must be non-decreasing and >= 0");
        const int steps = static_cast<int>(std::ceil((target - t) / max_step - 1e-12));
        const double h = steps > 0 ? (target - t) / steps : 0.0;
        for (int s = 0; s < steps; ++s) {
            const State k1 = rhs(t, y);
            const State k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
            const State k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
            const State k4 = rhs(t + h, y + h * k3);
            y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h;
        }
        t = target;
        out.push_back(y(0));
    }
    return out;
}

ResidualReport residual_check(const AnalyticSymbol& f, const AnalyticVectorProfile& phi, const Forcing& J,
                              std::span<const double> t_grid, int N, double tolerance)
{
    ResidualReport report;
    const VectorXc c = taylor_coefficients(f, N);
    for (double t : t_grid) {
        const auto app = apply_truncated_series(c, phi, t, N);
        if (app.diverged)
            report.warnings.push_back("truncated series diverges at t = " + std::to_string(t));
        report.terms = std::max(report.terms, app.terms);
        report.t.push_back(t);
        report.residual.push_back(std::abs(app.value - J(t)));
    }
    return finish(std::move(report), tolerance);
}

ResidualReport residual_check(const AnalyticSymbol& f, const Solution& solution, const Forcing& J,
                              std::span<const double> t_grid, int N, double tolerance)
{
    ResidualReport report;
    const VectorXc c = taylor_coefficients(f, N);
    const BromwichInverter* inv = solution.inverter();
    int order = N;
    if (inv) {
        order = std::min(N, remainder_order(*inv, N, report.warnings));
        report.bromwich_order = order;
        if (order < N) {
            std::ostringstream os;
            os << "Bromwich remainder derivatives limited to order " << order
               << " by its smoothness; higher orders use the fitted atoms only";
            report.warnings.push_back(os.str());
        }
    }
    for (double t : t_grid) {
        Complex sum = 0.0;
        int quiet = 0;
        int terms = 0;
        for (int n = 0; n <= N; ++n) {
            if (c(n) == Complex(0.0)) {
                ++terms;
                continue;
            }
            Complex d = solution.residue_part(t, n);
            if (inv)
                d += n <= order ? solution.bromwich_part(t, n) : inv->model().atoms(n, t);
            const Complex term = c(n) * d;
            sum += term;
            ++terms;
            quiet = std::abs(term) <= 1e-16 * std::abs(sum) ? quiet + 1 : 0;
            if (quiet >= 3 && n >= 4)
                break;
        }
        report.terms = std::max(report.terms, terms);
        report.t.push_back(t);
        report.residual.push_back(std::abs(sum - J(t)));
    }
    return finish(std::move(report), tolerance);
}

} // namespace nonlocal
