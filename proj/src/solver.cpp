#include "nonlocal/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SVD>

namespace nonlocal {

namespace {

    double binomial(int n, int k)
    {
        if (k < 0 || k > n)
            return 0.0;
        double b = 1.0;
        for (int j = 1; j <= k; ++j)
            b = b * (n - k + j) / j;
        return b;
    }

    double factorial(int m)
    {
        double f = 1.0;
        for (int k = 2; k <= m; ++k)
            f *= k;
        return f;
    }

    std::string format(Complex z)
    {
        std::ostringstream os;
        os.precision(6);
        os << z.real();
        if (z.imag() != 0.0)
            os << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
        return os.str();
    }

    ComplexFunction quotient(ComplexFunction numerator, AnalyticSymbol f)
    {
        return [numerator = std::move(numerator), f = std::move(f)](Complex s) {
            return numerator(s) / f(s);
        };
    }

    // Refuse a contour on which f vanishes: 1/f would not be integrable there.
    void check_contour(const AnalyticSymbol& f, const BromwichConfig& cfg)
    {
        constexpr int samples = 2001;
        double smallest = std::numeric_limits<double>::infinity();
        double largest = 0.0;
        double where = 0.0;
        for (int j = 0; j < samples; ++j) {
            const double y = -cfg.y_max + 2.0 * cfg.y_max * j / (samples - 1.0);
            double m = 0.0;
            try {
                m = std::abs(f(Complex(cfg.sigma, y)));
            } catch (const Error&) {
                m = 0.0;
            }
            if (!std::isfinite(m))
                continue;
            largest = std::max(largest, m);
            if (m < smallest) {
                smallest = m;
                where = y;
            }
        }
        if (!(smallest > 1e-12 * std::max(1.0, largest))) {
            std::ostringstream os;
            os << "f vanishes on the contour Re(s) = " << cfg.sigma << " near y = " << where
               << "; choose a different sigma";
            throw Error(ErrorKind::Domain, os.str());
        }
    }

    HardyMembership require_hardy(const ComplexFunction& F, const BromwichConfig& cfg, const char* what)
    {
        auto hardy = hardy_membership(F, 2.0, standard_hardy_grid(), cfg.y_max);
        if (!hardy.bounded)
            throw Error(ErrorKind::Hypothesis,
                        std::string(what) + " is not in the Hardy space H^2: " + hardy.reason);
        return hardy;
    }

    ResiduePolynomials split(const VectorXc& a, const PoleSpec& poles)
    {
        ResiduePolynomials rp;
        Eigen::Index offset = 0;
        for (const auto& p : poles.poles()) {
            rp.coefficients.push_back(a.segment(offset, p.order));
            offset += p.order;
        }
        return rp;
    }

    // Fornberg's recursion: weights w[j] for the n-th derivative at 0 from
    // samples at nodes x[j].
    std::vector<double> fd_weights(const std::vector<double>& x, int n)
    {
        const int N = static_cast<int>(x.size());
        std::vector<std::vector<double>> c(static_cast<std::size_t>(N), std::vector<double>(n + 1, 0.0));
        c[0][0] = 1.0;
        double c1 = 1.0;
        for (int i = 1; i < N; ++i) {
            double c2 = 1.0;
            for (int j = 0; j < i; ++j) {
                const double c3 = x[i] - x[j];
                c2 *= c3;
                for (int k = std::min(i, n); k >= 0; --k) {
                    if (j == i - 1) {
                        const double prev = k > 0 ? c[i - 1][k - 1] : 0.0;
                        c[i][k] = c1 * (k * prev - x[i - 1] * c[i - 1][k]) / c2;
                    }
                }
                for (int k = std::min(i, n); k >= 0; --k) {
                    const double prev = k > 0 ? c[j][k - 1] : 0.0;
                    c[j][k] = (x[i] * c[j][k] - k * prev) / c3;
                }
            }
            c1 = c2;
        }
        std::vector<double> w(static_cast<std::size_t>(N));
        for (int j = 0; j < N; ++j)
            w[j] = c[j][n];
        return w;
    }

} // namespace

int PoleSpec::K() const
{
    int k = 0;
    for (const auto& p : poles_)
        k += p.order;
    return k;
}

void PoleSpec::validate() const
{
    for (std::size_t i = 0; i < poles_.size(); ++i) {
        const auto& p = poles_[i];
        if (p.order < 1)
            throw Error(ErrorKind::Hypothesis, "pole orders must be positive integers");
        if (!(p.omega.real() < 0.0))
            throw Error(ErrorKind::Hypothesis,
                        "pole " + format(p.omega) + " is not strictly left of the imaginary axis");
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(poles_[j].omega - p.omega) < 1e-12)
                throw Error(ErrorKind::Hypothesis,
                            "poles must be pairwise distinct (" + format(p.omega) + " listed twice)");
    }
}

double PoleSpec::laurent_radius(std::size_t i) const
{
    const Complex w = poles_.at(i).omega;
    double r = 0.5 * std::abs(w.real());
    for (std::size_t j = 0; j < poles_.size(); ++j)
        if (j != i)
            r = std::min(r, 0.5 * std::abs(poles_[j].omega - w));
    return r;
}

Complex ResiduePolynomials::polynomial(std::size_t i, double t, int n) const
{
    // P^{(n)}(t) = sum_{k > n} a_k t^{k-1-n} / (k-1-n)!
    const VectorXc& a = coefficients.at(i);
    Complex sum = 0.0;
    for (Eigen::Index k = n + 1; k <= a.size(); ++k) {
        const int m = static_cast<int>(k) - 1 - n;
        sum += a(k - 1) * std::pow(t, m) / factorial(m);
    }
    return sum;
}

Complex residue_sum_eval(const ResiduePolynomials& rp, const PoleSpec& poles, double t, int n)
{
    if (rp.coefficients.size() != poles.size())
        throw Error(ErrorKind::Dimension, "residue polynomials do not match the pole list");
    Complex total = 0.0;
    for (std::size_t i = 0; i < poles.size(); ++i) {
        const Complex w = poles[i].omega;
        // d^n [P e^{wt}] = sum_k C(n, k) w^{n-k} P^{(k)} e^{wt}
        Complex sum = 0.0;
        for (int k = 0; k <= n; ++k)
            sum += binomial(n, k) * std::pow(w, n - k) * rp.polynomial(i, t, k);
        total += sum * std::exp(w * t);
    }
    return total;
}

NodePtr residue_laplace_tree(const ResiduePolynomials& rp, const PoleSpec& poles)
{
    NodePtr sum;
    for (std::size_t i = 0; i < poles.size(); ++i) {
        const VectorXc& a = rp.coefficients.at(i);
        for (Eigen::Index k = 1; k <= a.size(); ++k) {
            if (a(k - 1) == Complex(0.0))
                continue;
            const NodePtr atom = expr::divide(
                expr::constant(a(k - 1)),
                expr::power(expr::subtract(expr::variable(), expr::constant(poles[i].omega)),
                            static_cast<unsigned>(k)));
            sum = sum ? expr::add(sum, atom) : atom;
        }
    }
    return sum ? sum : expr::constant(0.0);
}

GeneralizedIC GeneralizedIC::zero()
{
    GeneralizedIC r;
    r.symbol = AnalyticSymbol(expr::constant(0.0));
    r.r = [](Complex) { return Complex(0.0); };
    r.description = "0";
    return r;
}

GeneralizedIC GeneralizedIC::from_symbol(AnalyticSymbol sym, Provenance provenance)
{
    GeneralizedIC r;
    r.r = [sym](Complex s) { return sym(s); };
    r.description = sym.to_string();
    r.symbol = std::move(sym);
    r.provenance = provenance;
    return r;
}

GeneralizedIC GeneralizedIC::from_data(const AnalyticSymbol& f, const DataSequence& d, int n_trunc)
{
    // Summing the r-series over n first gives closed forms:
    //   geometric d_j = d_0 rho^j:  d_0 (f(s) - f(rho)) / (s - rho)
    //   finite d_0..d_{J-1}:         sum_j d_{j-1} s^{-j} (f(s) - T_{j-1}(s))
    // with T_m the degree-m Taylor polynomial of f at 0.
    if (d.growth_radius() >= 1.0)
        throw Error(ErrorKind::Hypothesis, "data sequence grows too fast for the r-series (limsup |d_j|^{1/j} >= 1)");
    const NodePtr s = expr::variable();
    NodePtr tree;
    if (d.is_geometric()) {
        const Complex rho = *d.ratio();
        tree = expr::divide(
            expr::multiply(expr::constant(d[0]),
                           expr::subtract(f.root(), expr::constant(f(rho)))),
            expr::subtract(s, expr::constant(rho)));
    } else {
        const auto& values = d.values();
        const int J = static_cast<int>(values.size());
        if (J == 0)
            return zero();
        if (J > n_trunc)
            throw Error(ErrorKind::Dimension, "data sequence longer than the truncation order");
        const VectorXc c = taylor_coefficients(f, J);
        NodePtr taylor = expr::constant(0.0);
        for (int j = 1; j <= J; ++j) {
            taylor = expr::add(taylor, expr::multiply(expr::constant(c(j - 1)),
                                                      expr::power(s, static_cast<unsigned>(j - 1))));
            if (values[static_cast<std::size_t>(j - 1)] == Complex(0.0))
                continue;
            const NodePtr term = expr::divide(
                expr::multiply(expr::constant(values[static_cast<std::size_t>(j - 1)]),
                               expr::subtract(f.root(), taylor)),
                expr::power(s, static_cast<unsigned>(j)));
            tree = tree ? expr::add(tree, term) : term;
        }
        if (!tree)
            return zero();
    }
    GeneralizedIC r = from_symbol(AnalyticSymbol(tree), Provenance::SeriesFromData);
    return r;
}

const char* to_string(GeneralizedIC::Provenance p)
{
    switch (p) {
    case GeneralizedIC::Provenance::UserSupplied: return "user-supplied";
    case GeneralizedIC::Provenance::ConstructedFromIVP: return "constructed-from-ivp";
    case GeneralizedIC::Provenance::SeriesFromData: return "series-from-data";
    }
    return "unknown";
}

DecayFit decay_fit(const ComplexFunction& G)
{
    DecayFit fit;
    std::vector<double> lr, lm;
    for (double radius : {1e2, 1e3, 1e4}) {
        double peak = -1.0;
        for (int j = 0; j < 8; ++j) {
            const double theta = -7.0 * pi / 16.0 + j * pi / 8.0;
            try {
                const double m = std::abs(G(std::polar(radius, theta)));
                if (std::isfinite(m)) {
                    peak = std::max(peak, m);
                    ++fit.probes;
                }
            } catch (const Error&) {
            }
        }
        if (peak > 0.0) {
            lr.push_back(std::log(radius));
            lm.push_back(std::log(peak));
        } else if (peak == 0.0) {
            lr.push_back(std::log(radius));
            lm.push_back(std::log(std::numeric_limits<double>::min()));
        }
    }
    if (lr.size() < 2) {
        fit.note = "decay check inconclusive: too few finite probe values";
        return fit;
    }
    const double n = static_cast<double>(lr.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t j = 0; j < lr.size(); ++j) {
        sx += lr[j];
        sy += lm[j];
        sxx += lr[j] * lr[j];
        sxy += lr[j] * lm[j];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.q = -slope;
    fit.C = std::exp((sy - slope * sx) / n);
    fit.ok = fit.q > 0.0;
    if (!fit.ok)
        fit.note = "r/f does not decay along rays in the right half-plane";
    return fit;
}

Solution::Solution(std::shared_ptr<const BromwichInverter> inverter, ResiduePolynomials residues,
                   PoleSpec poles, BromwichConfig config)
    : inverter_(std::move(inverter)), residues_(std::move(residues)), poles_(std::move(poles)),
      config_(config)
{
}

Complex Solution::bromwich_part(double t, int n) const
{
    if (!inverter_)
        return 0.0;
    return n == 0 ? inverter_->one_sided(t) : inverter_->derivative(n, t);
}

void ClassicalIVP::validate() const
{
    poles.validate();
    if (static_cast<int>(initial_values.size()) != poles.K()) {
        std::ostringstream os;
        os << "initial_values: expected K = " << poles.K() << " values, got " << initial_values.size();
        throw Error(ErrorKind::Dimension, os.str());
    }
}

Solution solve_generalized(const AnalyticSymbol& f, const Forcing& J, const GeneralizedIC& r,
                           const BromwichConfig& cfg)
{
    cfg.validate();
    check_contour(f, cfg);
    const ComplexFunction LJ = laplace_function(J);
    const ComplexFunction rr = r.r;
    const ComplexFunction F = quotient([LJ, rr](Complex s) { return LJ(s) + rr(s); }, f);
    Diagnostics diag;
    diag.hardy = require_hardy(F, cfg, "(L(J) + r)/f");
    diag.decay = decay_fit(quotient(rr, f));
    auto inverter = std::make_shared<const BromwichInverter>(F, cfg);
    Solution sol(std::move(inverter), {}, {}, cfg);
    sol.diagnostics = std::move(diag);
    return sol;
}

LaurentResult laurent_coefficients(const ComplexFunction& g, Complex omega, int order, double radius)
{
    if (order < 1)
        throw Error(ErrorKind::Domain, "laurent_coefficients: order must be positive");
    if (!(radius > 0.0))
        throw Error(ErrorKind::Domain, "laurent_coefficients: radius must be positive");
    // Two extra coefficients detect an understated order or a foreign
    // singularity inside the circle.
    const int count = order + 2;
    auto trapezoid = [&](int nodes, double& peak) {
        VectorXc a = VectorXc::Zero(count);
        peak = 0.0;
        for (int j = 0; j < nodes; ++j) {
            const Complex u = std::polar(radius, 2.0 * pi * j / nodes);
            const Complex v = g(omega + u);
            if (!is_finite(v))
                throw Error(ErrorKind::Pole, "laurent_coefficients: singularity on the circle");
            peak = std::max(peak, std::abs(v));
            Complex power = u;
            for (int k = 0; k < count; ++k) {
                a(k) += v * power;
                power *= u;
            }
        }
        return VectorXc(a / static_cast<double>(nodes));
    };
    double peak = 0.0;
    int nodes = 64;
    VectorXc a = trapezoid(nodes, peak);
    bool converged = false;
    while (nodes < 8192) {
        nodes *= 2;
        const VectorXc next = trapezoid(nodes, peak);
        const double scale = std::max(1.0, next.cwiseAbs().maxCoeff());
        const double change = (next - a).cwiseAbs().maxCoeff();
        a = next;
        if (change < 1e-11 * scale) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw Error(ErrorKind::Convergence,
                    "laurent_coefficients: no convergence under node doubling (circle meets another singularity)");
    for (int k = order; k < count; ++k) {
        const double scale = peak * std::pow(radius, k + 1);
        if (std::abs(a(k)) > 1e-8 * scale)
            throw Error(ErrorKind::Pole, "laurent_coefficients: pole at " + format(omega)
                                             + " has order above the declared " + std::to_string(order)
                                             + " or another singularity lies inside the circle");
    }
    LaurentResult out;
    out.coefficients = a.head(order);
    out.nodes = nodes;
    const double scale = std::max(1.0, out.coefficients.cwiseAbs().maxCoeff());
    if (std::abs(out.coefficients(order - 1)) < 1e-10 * scale)
        out.warning = "pole at " + format(omega) + ": leading Laurent coefficient vanishes, order overstated";
    return out;
}

Solution solve_with_poles(const AnalyticSymbol& f, const Forcing& J, const GeneralizedIC& r,
                          const PoleSpec& poles, const BromwichConfig& cfg)
{
    cfg.validate();
    poles.validate();
    check_contour(f, cfg);
    const ComplexFunction G = quotient(r.r, f);
    Diagnostics diag;

    ResiduePolynomials rp;
    for (std::size_t i = 0; i < poles.size(); ++i) {
        auto laurent = laurent_coefficients(G, poles[i].omega, poles[i].order, poles.laurent_radius(i));
        if (laurent.warning)
            diag.warnings.push_back(*laurent.warning);
        rp.coefficients.push_back(std::move(laurent.coefficients));
    }

    // r/f must equal the sum of its principal parts: whatever is left is
    // entire and decaying, hence zero.
    const NodePtr principal = residue_laplace_tree(rp, poles);
    double worst = 0.0, scale = 0.0;
    for (double y : {0.0, 0.5, -0.5, 2.0, -2.0, 10.0, -10.0, 50.0, -50.0}) {
        const Complex s(cfg.sigma, y);
        const Complex g = G(s);
        scale = std::max(scale, std::abs(g));
        worst = std::max(worst, std::abs(g - evaluate(*principal, s)));
    }
    if (worst > 1e-7 * std::max(scale, 1e-300) && scale > 0.0)
        throw Error(ErrorKind::Hypothesis,
                    "r/f is not the sum of its principal parts at the declared poles "
                    "(undeclared poles or non-decaying r/f)");
    diag.decay = decay_fit(G);

    std::shared_ptr<const BromwichInverter> inverter;
    if (!J.identically_zero) {
        const ComplexFunction F = quotient(laplace_function(J), f);
        diag.hardy = require_hardy(F, cfg, "L(J)/f");
        inverter = std::make_shared<const BromwichInverter>(F, cfg);
    }
    Solution sol(std::move(inverter), std::move(rp), poles, cfg);
    sol.diagnostics = std::move(diag);
    return sol;
}

std::pair<MatrixXc, VectorXc> assemble_ivp_system(const ClassicalIVP& ivp, std::span<const Complex> Ln)
{
    const int K = ivp.poles.K();
    if (static_cast<int>(Ln.size()) != K || static_cast<int>(ivp.initial_values.size()) != K)
        throw Error(ErrorKind::Dimension, "assemble_ivp_system: expected K moments and K initial values");
    MatrixXc A = MatrixXc::Zero(K, K);
    VectorXc b(K);
    for (int n = 0; n < K; ++n) {
        b(n) = ivp.initial_values[static_cast<std::size_t>(n)] - Ln[static_cast<std::size_t>(n)];
        int col = 0;
        for (const auto& p : ivp.poles.poles()) {
            for (int j = 1; j <= p.order; ++j, ++col) {
                const int k = n - j + 1;
                if (k >= 0 && k <= n)
                    A(n, col) = binomial(n, k) * (k == 0 ? Complex(1.0) : std::pow(p.omega, k));
            }
        }
    }
    return {A, b};
}

Complex one_sided_derivative(const TimeFunction& phi, int n, double h)
{
    auto estimate = [&](double step) {
        std::vector<double> x;
        for (int j = 0; j < n + 4; ++j)
            x.push_back(j * step);
        const auto w = fd_weights(x, n);
        Complex sum = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j)
            sum += w[j] * phi(x[j]);
        return sum;
    };
    if (n == 0)
        return phi(0.0);
    return (16.0 * estimate(h) - estimate(2.0 * h)) / 15.0;
}

std::pair<Solution, GeneralizedIC> solve_classical_ivp(const ClassicalIVP& ivp, const BromwichConfig& cfg)
{
    cfg.validate();
    ivp.validate();
    const int K = ivp.poles.K();
    check_contour(ivp.f, cfg);
    Diagnostics diag;

    std::shared_ptr<const BromwichInverter> inverter;
    std::vector<Complex> Ln(static_cast<std::size_t>(K), Complex(0.0));
    if (!ivp.J.identically_zero) {
        const ComplexFunction F = quotient(laplace_function(ivp.J), ivp.f);
        const auto order = smoothness_order(F, cfg.sigma, K + 2, cfg.y_max);
        diag.smoothness = order;
        if (!order.fit_ok)
            diag.warnings.push_back(order.warning);
        // phi_{K-1} needs y^{K-1} L(J)/f integrable, i.e. M >= K - 1.
        if (order.order < K - 1) {
            std::ostringstream os;
            os << "smoothness order of L(J)/f is M = " << order.order << " but K - 1 = " << K - 1
               << " derivatives at 0 are prescribed";
            throw Error(ErrorKind::Hypothesis, os.str());
        }
        if (order.order < K)
            diag.warnings.push_back("phi^(K)(0+) prediction relies on the fitted atoms: smoothness order below K");
        diag.hardy = require_hardy(F, cfg, "L(J)/f");
        inverter = std::make_shared<const BromwichInverter>(F, cfg);
        std::vector<int> ns(static_cast<std::size_t>(K));
        for (int n = 0; n < K; ++n)
            ns[static_cast<std::size_t>(n)] = n;
        Ln = compute_Ln(*inverter, ns);
    }

    const auto [A, b] = assemble_ivp_system(ivp, Ln);
    Eigen::JacobiSVD<MatrixXc> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cond = sv(K - 1) > 0.0 ? sv(0) / sv(K - 1) : std::numeric_limits<double>::infinity();
    diag.condition_number = cond;
    if (!(cond < max_condition_number)) {
        // Name the unknowns carrying the near-null direction.
        const VectorXc v = svd.matrixV().col(K - 1);
        std::ostringstream os;
        os << "non-generic pole configuration: system condition number " << cond
           << " exceeds " << max_condition_number << "; near-dependency among";
        int col = 0;
        for (const auto& p : ivp.poles.poles())
            for (int j = 1; j <= p.order; ++j, ++col)
                if (std::abs(v(col)) > 0.1)
                    os << " a_{" << j << "," << format(p.omega) << "}";
        throw Error(ErrorKind::Singular, os.str());
    }
    const Eigen::FullPivLU<MatrixXc> lu(A);
    const VectorXc a = lu.solve(b);

    // Smooth dependence on the data: the map phi -> a is affine with
    // Jacobian A^{-1}; compare against a finite-difference solve.
    {
        const MatrixXc inverse = lu.inverse();
        const double delta = 1e-6;
        double deviation = 0.0;
        for (int j = 0; j < K; ++j) {
            VectorXc bp = b;
            bp(j) += delta;
            const VectorXc column = (lu.solve(bp) - a) / delta;
            deviation = std::max(deviation, (column - inverse.col(j)).cwiseAbs().maxCoeff()
                                     / std::max(1.0, inverse.col(j).cwiseAbs().maxCoeff()));
        }
        diag.jacobian_deviation = deviation;
    }

    ResiduePolynomials rp = split(a, ivp.poles);
    GeneralizedIC r0 = GeneralizedIC::from_symbol(
        AnalyticSymbol(expr::multiply(ivp.f.root(), residue_laplace_tree(rp, ivp.poles))),
        GeneralizedIC::Provenance::ConstructedFromIVP);
    diag.decay = decay_fit([&](Complex s) { return evaluate(*residue_laplace_tree(rp, ivp.poles), s); });

    Solution sol(std::move(inverter), std::move(rp), ivp.poles, cfg);
    for (int n = 0; n < K; ++n) {
        const Complex fd = one_sided_derivative([&](double t) { return sol.eval(t); }, n);
        diag.initial_value_errors.push_back(std::abs(fd - ivp.initial_values[static_cast<std::size_t>(n)]));
    }
    // The one-sided moment L_K converges whenever the remainder after the atoms
    // does, which is weaker than M >= K.
    try {
        diag.predicted_next_derivative = sol.derivative(K, 0.0);
    } catch (const Error& e) {
        diag.warnings.push_back(std::string("phi^(K)(0+) not predicted: ") + e.what());
    }
    for (std::size_t n = 0; n < diag.initial_value_errors.size(); ++n)
        if (diag.initial_value_errors[n] > 1e-4)
            diag.warnings.push_back("initial value phi_" + std::to_string(n)
                                    + " is not reproduced by finite differences to 1e-4");
    sol.diagnostics = std::move(diag);
    return {std::move(sol), std::move(r0)};
}

} // namespace nonlocal
