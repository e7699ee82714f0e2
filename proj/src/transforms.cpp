#include "nonlocal/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "nonlocal/quadrature.hpp"

namespace nonlocal {

namespace {

    using Terms = std::vector<ExpTerm>;

    Terms normalize(const Terms& terms)
    {
        // Merge equal (power, rate) pairs; drop exact zeros.
        Terms out;
        for (const auto& term : terms) {
            auto it = std::find_if(out.begin(), out.end(), [&](const ExpTerm& o) {
                return o.power == term.power && o.rate == term.rate;
            });
            if (it == out.end())
                out.push_back(term);
            else
                it->coefficient += term.coefficient;
        }
        std::erase_if(out, [](const ExpTerm& t) { return t.coefficient == Complex(0.0); });
        return out;
    }

    Terms multiply(const Terms& a, const Terms& b)
    {
        Terms out;
        for (const auto& x : a)
            for (const auto& y : b)
                out.push_back({x.coefficient * y.coefficient, x.power + y.power, x.rate + y.rate});
        return normalize(out);
    }

    Terms scale(Terms a, Complex c)
    {
        for (auto& t : a)
            t.coefficient *= c;
        return normalize(a);
    }

    std::optional<Complex> as_constant(const Terms& a)
    {
        if (a.empty())
            return Complex(0.0);
        if (a.size() == 1 && a[0].power == 0 && a[0].rate == Complex(0.0))
            return a[0].coefficient;
        return std::nullopt;
    }

    std::optional<Terms> recognize(const Node& node)
    {
        switch (node.kind) {
        case NodeKind::Constant:
            return normalize({{node.value, 0, 0.0}});
        case NodeKind::Variable:
            return Terms{{1.0, 1, 0.0}};
        case NodeKind::Add:
        case NodeKind::Subtract: {
            auto a = recognize(*node.lhs);
            auto b = recognize(*node.rhs);
            if (!a || !b)
                return std::nullopt;
            if (node.kind == NodeKind::Subtract)
                *b = scale(*b, -1.0);
            a->insert(a->end(), b->begin(), b->end());
            return normalize(*a);
        }
        case NodeKind::Negate: {
            auto a = recognize(*node.lhs);
            if (!a)
                return std::nullopt;
            return scale(*a, -1.0);
        }
        case NodeKind::Multiply: {
            auto a = recognize(*node.lhs);
            auto b = recognize(*node.rhs);
            if (!a || !b)
                return std::nullopt;
            return multiply(*a, *b);
        }
        case NodeKind::Divide: {
            auto a = recognize(*node.lhs);
            auto b = recognize(*node.rhs);
            if (!a || !b)
                return std::nullopt;
            const auto c = as_constant(*b);
            if (!c || *c == Complex(0.0))
                return std::nullopt;
            return scale(*a, 1.0 / *c);
        }
        case NodeKind::Power: {
            auto a = recognize(*node.lhs);
            if (!a || node.exponent > 64)
                return std::nullopt;
            Terms out{{1.0, 0, 0.0}};
            for (unsigned k = 0; k < node.exponent; ++k)
                out = multiply(out, *a);
            return out;
        }
        case NodeKind::Exp: {
            auto a = recognize(*node.lhs);
            if (!a)
                return std::nullopt;
            Complex offset = 0.0, rate = 0.0;
            for (const auto& t : *a) {
                if (t.rate != Complex(0.0) || t.power > 1)
                    return std::nullopt;
                (t.power == 0 ? offset : rate) += t.coefficient;
            }
            return Terms{{std::exp(offset), 0, rate}};
        }
        case NodeKind::ZetaShift:
            return std::nullopt;
        }
        return std::nullopt;
    }

    double factorial(unsigned m)
    {
        double f = 1.0;
        for (unsigned k = 2; k <= m; ++k)
            f *= k;
        return f;
    }

    std::optional<double> decay_of(const Terms& terms)
    {
        if (terms.empty())
            return std::nullopt;
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& t : terms)
            worst = std::max(worst, t.rate.real());
        return -worst;
    }

    // max(|F(x + iy)|, |F(x - iy)|)
    double line_modulus(const ComplexFunction& F, double x, double y)
    {
        return std::max(std::abs(F(Complex(x, y))), std::abs(F(Complex(x, -y))));
    }

} // namespace

std::optional<std::vector<ExpTerm>> as_exp_polynomial(const Node& node) { return recognize(node); }

AnalyticSymbol laplace_of_exp_polynomial(const std::vector<ExpTerm>& terms)
{
    NodePtr sum;
    for (const auto& t : terms) {
        const NodePtr atom = expr::divide(
            expr::constant(t.coefficient * factorial(t.power)),
            expr::power(expr::subtract(expr::variable(), expr::constant(t.rate)), t.power + 1));
        sum = sum ? expr::add(sum, atom) : atom;
    }
    return AnalyticSymbol(sum ? sum : expr::constant(0.0));
}

Forcing Forcing::zero()
{
    Forcing f;
    f.j_eval = [](double) { return Complex(0.0); };
    f.closed_form_laplace = AnalyticSymbol(expr::constant(0.0));
    f.description = "zero";
    f.identically_zero = true;
    return f;
}

Forcing Forcing::from_exp_polynomial(std::vector<ExpTerm> terms, std::string description)
{
    terms = normalize(terms);
    if (terms.empty()) {
        Forcing f = zero();
        f.description = std::move(description);
        return f;
    }
    Forcing f;
    f.j_eval = [terms](double t) {
        Complex sum = 0.0;
        for (const auto& term : terms)
            sum += term.coefficient * std::pow(t, static_cast<double>(term.power))
                * std::exp(term.rate * t);
        return sum;
    };
    f.closed_form_laplace = laplace_of_exp_polynomial(terms);
    f.decay_hint = decay_of(terms);
    f.description = std::move(description);
    return f;
}

Forcing Forcing::exp_decay(double rate, Complex amplitude)
{
    std::ostringstream os;
    os << "exp_decay(rate=" << rate << ")";
    return from_exp_polynomial({{amplitude, 0, -rate}}, os.str());
}

Forcing Forcing::t_power_exp(unsigned m, double rate, Complex amplitude)
{
    std::ostringstream os;
    os << "t_power_exp(m=" << m << ", rate=" << rate << ")";
    return from_exp_polynomial({{amplitude, m, -rate}}, os.str());
}

Forcing Forcing::indicator(double a, double b)
{
    if (!(a >= 0.0 && b > a))
        throw Error(ErrorKind::Domain, "indicator forcing needs 0 <= a < b");
    Forcing f;
    f.j_eval = [a, b](double t) { return Complex(t >= a && t <= b ? 1.0 : 0.0); };
    // (e^{-a s} - e^{-b s}) / s
    const NodePtr s = expr::variable();
    f.closed_form_laplace = AnalyticSymbol(expr::divide(
        expr::subtract(expr::exp(expr::multiply(expr::constant(-a), s)),
                       expr::exp(expr::multiply(expr::constant(-b), s))),
        s));
    f.closed_form_laplace->set_taylor_radius_hint(std::nullopt);
    f.decay_hint = std::numeric_limits<double>::infinity();
    f.breakpoints = {a, b};
    std::ostringstream os;
    os << "indicator(" << a << ", " << b << ")";
    f.description = os.str();
    return f;
}

Forcing Forcing::from_text(std::string_view text)
{
    const NodePtr tree = parse_expression(text, "t");
    if (auto terms = as_exp_polynomial(*tree))
        return from_exp_polynomial(std::move(*terms), std::string(text));
    Forcing f;
    f.j_eval = [tree](double t) { return evaluate(*tree, Complex(t, 0.0)); };
    f.description = std::string(text);
    return f;
}

Complex laplace_forward(const Forcing& J, Complex s, const LaplaceSettings& settings)
{
    if (J.identically_zero)
        return 0.0;
    if (!(s.real() > 0.0))
        throw Error(ErrorKind::Domain, "laplace_forward: Re(s) must be positive");
    const double decay = J.decay_hint.value_or(0.0);
    const double rate = s.real() + (std::isfinite(decay) ? decay : 0.0);
    if (!(rate > 0.0))
        throw Error(ErrorKind::Convergence, "laplace_forward: forcing grows faster than e^{Re(s) t}");

    const double scale = std::max({1.0, std::abs(J(0.0)), std::abs(J(1.0))});
    double T = std::log(scale / settings.abs_tol) / rate;
    for (double b : J.breakpoints)
        T = std::max(T, b);
    if (std::isinf(decay) && !J.breakpoints.empty())
        T = *std::max_element(J.breakpoints.begin(), J.breakpoints.end());
    T = std::min(T, 1e5);

    std::vector<double> cuts = {0.0};
    for (double b : J.breakpoints)
        if (b > 0.0 && b < T)
            cuts.push_back(b);
    const double chunk = std::max(1.0, 8.0 / (1.0 + std::abs(s.imag())));
    for (double x = chunk; x < T; x += chunk)
        cuts.push_back(x);
    cuts.push_back(T);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto integrand = [&](double t) { return std::exp(-s * t) * J(t); };
    Complex total = 0.0;
    const double piece_tol = settings.abs_tol / static_cast<double>(cuts.size());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const auto r = quad::integrate(integrand, cuts[k], cuts[k + 1], piece_tol, 1e-13,
                                       settings.max_intervals);
        total += r.value;
    }
    // Compactly supported forcing (infinite decay) has no tail.
    const double tail = std::isinf(decay) ? 0.0 : std::abs(J(T)) * std::exp(-s.real() * T) / rate;
    if (tail > 100.0 * settings.abs_tol)
        throw Error(ErrorKind::Convergence,
                    "laplace_forward: tail-truncation failure (decay too slow for the tolerance)");
    return total;
}

ComplexFunction laplace_function(const Forcing& J, const LaplaceSettings& settings)
{
    if (J.identically_zero)
        return [](Complex) { return Complex(0.0); };
    if (J.closed_form_laplace) {
        const AnalyticSymbol L = *J.closed_form_laplace;
        return [L](Complex s) { return L(s); };
    }
    return [J, settings](Complex s) { return laplace_forward(J, s, settings); };
}

ForcingCheck verify_forcing(const Forcing& J, double tolerance)
{
    ForcingCheck check;
    if (J.identically_zero)
        return check;
    double peak = 0.0;
    for (double t : {0.0, 0.5, 1.0, 2.0})
        peak = std::max(peak, std::abs(J(t)));
    for (double t : {50.0, 100.0, 200.0})
        check.tail_estimate = std::max(check.tail_estimate, std::abs(J(t)));
    if (!(check.tail_estimate <= 1e-8 * std::max(1.0, peak))) {
        check.ok = false;
        check.message = "forcing does not decay: |J(t)| at t >= 50 is not negligible";
        return check;
    }
    if (!J.closed_form_laplace)
        return check;
    const std::array<double, 10> ys = {-20.0, -10.0, -5.0, -2.0, -0.5, 0.5, 2.0, 5.0, 10.0, 20.0};
    for (double y : ys) {
        const Complex s(1.0, y);
        const Complex numeric = laplace_forward(J, s);
        const Complex closed = (*J.closed_form_laplace)(s);
        check.max_difference = std::max(check.max_difference, std::abs(numeric - closed));
    }
    if (check.max_difference > tolerance) {
        check.ok = false;
        check.message = "closed-form Laplace transform disagrees with quadrature";
    }
    return check;
}

void BromwichConfig::validate() const
{
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw Error(ErrorKind::Domain, "Bromwich abscissa sigma must be positive");
    if (!(y_max > 0.0) || !std::isfinite(y_max))
        throw Error(ErrorKind::Domain, "Bromwich y_max must be positive and finite");
    if (!(quad_tol > 0.0))
        throw Error(ErrorKind::Domain, "Bromwich quad_tol must be positive");
    if (max_subdivisions < 1)
        throw Error(ErrorKind::Domain, "Bromwich max_subdivisions must be at least 1");
}

HardyNorm hardy_norm(const ComplexFunction& F, double p, double x, double y_max)
{
    if (!(p >= 1.0) || !(y_max > 0.0))
        throw Error(ErrorKind::Domain, "hardy_norm: need p >= 1 and y_max > 0");
    HardyNorm out;
    try {
        bool finite = true;
        auto integrand = [&](double y) {
            const double m = std::abs(F(Complex(x, y)));
            if (!std::isfinite(m)) {
                finite = false;
                return 0.0;
            }
            return std::pow(m, p);
        };
        const auto left = quad::integrate(integrand, -y_max, 0.0, 1e-14, 1e-11, 2000);
        const auto right = quad::integrate(integrand, 0.0, y_max, 1e-14, 1e-11, 2000);
        if (!finite) {
            out.divergent = true;
            out.reason = "F is not finite on the line Re(s) = x";
            return out;
        }
        if (!left.converged || !right.converged || !(left.value + right.value < 1e12)) {
            out.divergent = true;
            out.reason = "integral along the line does not converge (singularity on or near the line)";
            return out;
        }
        const double a1 = line_modulus(F, x, y_max);
        const double a4 = line_modulus(F, x, 4.0 * y_max);
        if (a1 > 0.0) {
            const double beta = a4 > 0.0 ? std::log(a1 / a4) / std::log(4.0)
                                         : std::numeric_limits<double>::infinity();
            if (!(p * beta > 1.05)) {
                out.divergent = true;
                std::ostringstream os;
                os << "|F|^p is not integrable along the line (fitted decay exponent " << beta << ")";
                out.reason = os.str();
                return out;
            }
            if (std::isfinite(beta))
                out.tail_estimate = 2.0 * std::pow(a1, p) * y_max / (p * beta - 1.0);
        }
        out.value = std::pow((left.value + right.value + out.tail_estimate) / (2.0 * pi), 1.0 / p);
    } catch (const Error& e) {
        out.divergent = true;
        out.reason = e.what();
    }
    return out;
}

HardyMembership hardy_membership(const ComplexFunction& F, double p,
                                 std::span<const double> x_grid, double y_max)
{
    HardyMembership out;
    out.x_grid.assign(x_grid.begin(), x_grid.end());
    std::sort(out.x_grid.begin(), out.x_grid.end());
    for (double x : out.x_grid) {
        out.norms.push_back(hardy_norm(F, p, x, y_max));
        const auto& n = out.norms.back();
        if (n.divergent) {
            if (out.bounded) {
                std::ostringstream os;
                os << "divergent at x = " << x << ": " << n.reason;
                out.reason = os.str();
            }
            out.bounded = false;
        } else {
            out.supremum = std::max(out.supremum, n.value);
        }
    }
    if (out.bounded && out.x_grid.size() >= 2 && out.x_grid[0] > 0.0) {
        // mu_p of a Hardy-space function is nonincreasing in x; a power-law
        // rise toward the axis at least as steep as that of 1/s means a
        // singularity on Re(s) = 0.
        const double slope = std::log(out.norms[0].value / out.norms[1].value)
            / std::log(out.x_grid[0] / out.x_grid[1]);
        if (slope < -0.8 * (1.0 - 1.0 / p)) {
            out.bounded = false;
            std::ostringstream os;
            os << "mu_p grows like x^" << slope << " as x -> 0+";
            out.reason = os.str();
        }
    }
    return out;
}

std::vector<Complex> compute_Ln(const BromwichInverter& inverter, std::span<const int> n_list)
{
    std::vector<Complex> out;
    for (int n : n_list) {
        if (n < 0)
            throw Error(ErrorKind::Domain, "compute_Ln: moment order must be non-negative");
        try {
            out.push_back(inverter.derivative(n, 0.0));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Convergence)
                throw;
            throw Error(ErrorKind::Hypothesis, "moment integral L_" + std::to_string(n)
                                                   + " does not converge: " + e.what());
        }
    }
    return out;
}

std::vector<Complex> compute_Ln(const ComplexFunction& F, std::span<const int> n_list,
                                const BromwichConfig& cfg)
{
    const BromwichInverter inverter(F, cfg);
    return compute_Ln(inverter, n_list);
}

SmoothnessOrder smoothness_order(const ComplexFunction& F, double sigma, int n_cap, double y_max)
{
    if (!(sigma > 0.0) || n_cap < 0)
        throw Error(ErrorKind::Domain, "smoothness_order: need sigma > 0 and n_cap >= 0");
    SmoothnessOrder out;
    constexpr int points = 32;
    std::vector<double> lx, ly;
    bool vanished = false;
    for (int j = 0; j < points; ++j) {
        const double y = 0.25 * y_max * std::pow(4.0, j / (points - 1.0));
        const double m = line_modulus(F, sigma, y);
        if (!std::isfinite(m)) {
            out.fit_ok = false;
            out.warning = "F is not finite on the line";
            return out;
        }
        if (m == 0.0 || m < 1e-300) {
            vanished = true;
            break;
        }
        lx.push_back(std::log(y));
        ly.push_back(std::log(m));
    }
    if (vanished) {
        out.order = n_cap;
        out.entire_decay = true;
        out.alpha = std::numeric_limits<double>::infinity();
        return out;
    }
    const double n = points;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int j = 0; j < points; ++j) {
        sx += lx[j];
        sy += ly[j];
        sxx += lx[j] * lx[j];
        sxy += lx[j] * ly[j];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    double worst = 0.0;
    for (int j = 0; j < points; ++j)
        worst = std::max(worst, std::abs(ly[j] - intercept - slope * lx[j]));
    out.alpha = -slope;
    if (worst > 0.5) {
        out.fit_ok = false;
        out.order = 0;
        out.warning = "decay of |F| along the line is not power-like; assuming M = 0";
        return out;
    }
    if (out.alpha > n_cap + 2.0) {
        out.order = n_cap;
        out.entire_decay = true;
        return out;
    }
    // M < alpha - 1, treating alpha within 0.01 of an integer as that integer.
    const int m = static_cast<int>(std::ceil(out.alpha - 1.0 - 0.01)) - 1;
    out.order = std::clamp(m, 0, n_cap);
    return out;
}

} // namespace nonlocal
