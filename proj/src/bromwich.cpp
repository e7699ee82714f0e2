#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/QR>

#include "nonlocal/quadrature.hpp"
#include "nonlocal/transforms.hpp"

namespace nonlocal {

namespace {

    constexpr double eps = std::numeric_limits<double>::epsilon();

    double binomial(int n, int k)
    {
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

    Complex weight(Complex s, int n)
    {
        Complex w = 1.0;
        for (int k = 0; k < n; ++k)
            w *= s;
        return w;
    }

} // namespace

Complex AsymptoticModel::operator()(Complex s) const
{
    const Complex x = 1.0 / (s + shift);
    Complex sum = 0.0;
    for (Eigen::Index k = coefficients.size(); k >= 1; --k)
        sum = (sum + coefficients(k - 1)) * x;
    return sum;
}

Complex AsymptoticModel::atoms(int n, double t) const
{
    // d^n/dt^n [t^{k-1} e^{-a t} / (k-1)!]
    //   = sum_j C(n, j) t^{k-1-j} / (k-1-j)! (-a)^{n-j} e^{-a t}
    Complex sum = 0.0;
    const double decay = std::exp(-shift * t);
    for (Eigen::Index idx = 0; idx < coefficients.size(); ++idx) {
        const int k = static_cast<int>(idx) + 1;
        double term = 0.0;
        for (int j = 0; j <= std::min(n, k - 1); ++j)
            term += binomial(n, j) * std::pow(t, k - 1 - j) / factorial(k - 1 - j)
                * std::pow(-shift, n - j);
        sum += coefficients(idx) * term * decay;
    }
    return sum;
}

BromwichInverter::BromwichInverter(ComplexFunction F, BromwichConfig cfg)
    : F_(std::move(F)), cfg_(cfg)
{
    cfg_.validate();
    fit_model();
}

void BromwichInverter::fit_model()
{
    const double Y = cfg_.y_max;
    const double sigma = cfg_.sigma;
    constexpr int per_side = 16;
    std::vector<Complex> s_pts, f_vals;
    double near_peak = 0.0, far_peak = 0.0, peak = 0.0;
    for (int j = 0; j < per_side; ++j) {
        const double y = 0.5 * Y * std::pow(8.0, j / (per_side - 1.0));
        for (double sign : {1.0, -1.0}) {
            const Complex s(sigma, sign * y);
            const Complex v = F_(s);
            if (!is_finite(v))
                throw Error(ErrorKind::Domain, "Bromwich inversion: F is not finite on the contour");
            s_pts.push_back(s);
            f_vals.push_back(v);
            const double m = std::abs(v);
            peak = std::max(peak, m);
            if (y <= Y * (1.0 + 1e-12))
                near_peak = std::max(near_peak, m);
            if (y >= 2.0 * Y * (1.0 - 1e-12))
                far_peak = std::max(far_peak, m);
        }
    }
    const Complex at_axis = F_(Complex(sigma, 0.0));
    if (peak == 0.0 && at_axis == Complex(0.0)) {
        zero_ = true;
        return;
    }
    if (far_peak > near_peak / 1.5)
        throw Error(ErrorKind::Convergence,
                    "Bromwich inversion: non-decaying integrand (|F| does not decrease along the contour)");

    // Least squares in the scaled unknowns c_k Y^{-k}.
    const double shift = model_.shift;
    const double f_scale = std::max(std::abs(F_(Complex(sigma, Y))), std::abs(F_(Complex(sigma, -Y))));
    auto fit = [&](const std::vector<int>& powers) {
        const auto cols = static_cast<Eigen::Index>(powers.size());
        MatrixXc A(static_cast<Eigen::Index>(s_pts.size()), cols);
        VectorXc b(static_cast<Eigen::Index>(s_pts.size()));
        for (std::size_t i = 0; i < s_pts.size(); ++i) {
            const Complex xy = Y / (s_pts[i] + shift);
            for (Eigen::Index k = 0; k < cols; ++k)
                A(static_cast<Eigen::Index>(i), k) = std::pow(xy, powers[static_cast<std::size_t>(k)]);
            b(static_cast<Eigen::Index>(i)) = f_vals[i];
        }
        const VectorXc scaled = A.colPivHouseholderQr().solve(b);
        AsymptoticModel m;
        m.shift = shift;
        m.coefficients = VectorXc::Zero(powers.empty() ? 0 : powers.back());
        for (Eigen::Index k = 0; k < cols; ++k) {
            const int p = powers[static_cast<std::size_t>(k)];
            m.coefficients(p - 1) = scaled(k) * std::pow(Y, p);
        }
        double residual = 0.0;
        for (std::size_t i = 0; i < s_pts.size(); ++i)
            residual = std::max(residual, std::abs(f_vals[i] - m(s_pts[i])));
        m.fit_residual = residual / peak;
        return m;
    };

    // Accept the richest model that reproduces the samples to 1e-6 relative
    // without inflating F near the real axis. Coefficients whose contribution
    // at Y is far below the fit residual are not identified by the data. Leading
    // ones are dropped and the rest refitted, since a spurious c_1 would leave a
    // 1/y tail in the remainder.
    for (int D : {6, 4, 2, 1}) {
        std::vector<int> powers(static_cast<std::size_t>(D));
        for (int k = 0; k < D; ++k)
            powers[static_cast<std::size_t>(k)] = k + 1;
        AsymptoticModel candidate = fit(powers);
        if (f_scale > 0.0) {
            const double x_mod = 1.0 / std::abs(Complex(sigma + shift, Y));
            const double floor = std::max(1e3 * candidate.fit_residual, 1e-10);
            std::vector<int> kept;
            for (int p : powers)
                if (!kept.empty()
                    || std::abs(candidate.coefficients(p - 1)) * std::pow(x_mod, p) >= floor * f_scale)
                    kept.push_back(p);
            if (!kept.empty() && kept.size() < powers.size()) {
                AsymptoticModel refit = fit(kept);
                if (refit.fit_residual < 1e-6)
                    candidate = std::move(refit);
            }
        }
        const VectorXc& c = candidate.coefficients;
        double size_at_axis = 0.0;
        for (Eigen::Index k = 0; k < c.size(); ++k)
            size_at_axis += std::abs(c(k)) * std::pow(sigma + shift, -static_cast<double>(k + 1));
        if (candidate.fit_residual < 1e-6 && c.allFinite()
            && size_at_axis <= 1e6 * std::max(std::abs(at_axis), peak)) {
            model_ = std::move(candidate);
            return;
        }
    }
}

const BromwichInverter::Level& BromwichInverter::level(int l) const
{
    Level& lv = levels_[static_cast<std::size_t>(l)];
    std::call_once(lv.once, [&] {
        lv.width = (pi / 4.0) / std::ldexp(1.0, l);
        lv.panels = static_cast<int>(std::ceil(cfg_.y_max / lv.width - 1e-9));
        lv.upper.resize(static_cast<std::size_t>(lv.panels) * 21);
        lv.lower.resize(lv.upper.size());
        for (int p = 0; p < lv.panels; ++p) {
            const auto x = quad::gk21_abscissae(p * lv.width, (p + 1) * lv.width);
            for (int j = 0; j < 21; ++j) {
                const std::size_t idx = static_cast<std::size_t>(p) * 21 + j;
                lv.upper[idx] = F_(Complex(cfg_.sigma, x[j]));
                lv.lower[idx] = F_(Complex(cfg_.sigma, -x[j]));
            }
        }
    });
    return lv;
}

Complex BromwichInverter::tail_integral(double y0, double t, int n, double tol, double& error) const
{
    const double sigma = cfg_.sigma;
    auto g = [&](double y) {
        const Complex up(sigma, y), down(sigma, -y);
        return weight(up, n) * remainder(up) * std::polar(1.0, y * t)
            + weight(down, n) * remainder(down) * std::polar(1.0, -y * t);
    };
    if (t == 0.0) {
        const auto r = quad::integrate_to_infinity(g, y0, tol, 0.0, 4000);
        if (!r.converged)
            throw Error(ErrorKind::Convergence, "Bromwich inversion: tail integral does not converge");
        error = r.error;
        return r.value;
    }
    // Half-periods of e^{iyt}; the alternating partial sums are accelerated.
    const double cycle = pi / t;
    const double cap = 50.0 * cfg_.y_max;
    std::vector<Complex> partial;
    Complex sum = 0.0;
    double a = y0;
    double quad_error = 0.0;
    for (int k = 0; k < 200 && a < cap; ++k) {
        const auto r = quad::integrate(g, a, a + cycle, 0.01 * tol, 0.0, cfg_.max_subdivisions);
        quad_error += r.error;
        sum += r.value;
        partial.push_back(sum);
        a += cycle;
        if (partial.size() >= 8) {
            const auto w = quad::wynn_epsilon<Complex>(partial);
            if (w.error < tol) {
                error = w.error + quad_error;
                return w.value;
            }
        }
    }
    throw Error(ErrorKind::Convergence,
                "Bromwich inversion: truncation-tail estimate exceeds quad_tol and extrapolation failed");
}

InversionResult BromwichInverter::evaluate(double t, int n, bool one_sided) const
{
    if (!(t >= 0.0) || !std::isfinite(t))
        throw Error(ErrorKind::Domain, "Bromwich inversion: t must be finite and non-negative");
    if (n < 0)
        throw Error(ErrorKind::Domain, "Bromwich inversion: derivative order must be non-negative");
    InversionResult out;
    if (zero_)
        return out;
    if (t == 0.0 && one_sided && n == 0 && model_.empty()) {
        out.value = richardson_limit();
        return out;
    }

    Complex atoms = model_.empty() ? Complex(0.0) : model_.atoms(n, t);
    if (t == 0.0 && !one_sided && n == 0 && !model_.empty())
        atoms = 0.5 * model_.coefficients(0); // only the k = 1 atom jumps at 0

    const double sigma = cfg_.sigma;
    const double tol = std::max(cfg_.quad_tol * 2.0 * pi * std::exp(-sigma * t), 1e-300);
    const int l = std::min(max_level, static_cast<int>(std::ceil(std::log2(std::max(t, 1.0)) - 1e-12)));
    const Level& lv = level(l);

    auto g = [&](double y) {
        const Complex up(sigma, y), down(sigma, -y);
        return weight(up, n) * remainder(up) * std::polar(1.0, y * t)
            + weight(down, n) * remainder(down) * std::polar(1.0, -y * t);
    };

    std::complex<long double> acc = 0.0L;
    double error = 0.0;
    const double panel_tol = tol / lv.panels;
    std::array<Complex, 21> samples;
    std::array<double, 21> noise; // |s^n F|: the remainder cannot be resolved below eps times this
    for (int p = 0; p < lv.panels; ++p) {
        const double a = p * lv.width, b = (p + 1) * lv.width;
        const auto x = quad::gk21_abscissae(a, b);
        for (int j = 0; j < 21; ++j) {
            const std::size_t idx = static_cast<std::size_t>(p) * 21 + j;
            const Complex up(sigma, x[j]), down(sigma, -x[j]);
            const Complex wu = weight(up, n), wd = weight(down, n);
            samples[j] = wu * (lv.upper[idx] - model_(up)) * std::polar(1.0, x[j] * t)
                + wd * (lv.lower[idx] - model_(down)) * std::polar(1.0, -x[j] * t);
            noise[j] = std::abs(wu * lv.upper[idx]) + std::abs(wd * lv.lower[idx]);
        }
        auto est = quad::gk21_from_samples<Complex>(samples, a, b);
        double noise_floor = 0.0;
        for (int j = 0; j < 10; ++j)
            noise_floor += quad::GaussKronrod21::kronrod_weights[j] * (noise[j] + noise[20 - j]);
        noise_floor += quad::GaussKronrod21::kronrod_weights[10] * noise[10];
        noise_floor *= 0.5 * (b - a);
        const double local_tol = std::max(panel_tol, 64.0 * eps * std::max(est.absolute, noise_floor));
        if (est.error > local_tol) {
            const auto r = quad::integrate(g, a, b, local_tol, 0.0, cfg_.max_subdivisions);
            est.value = r.value;
            est.error = r.error;
        }
        acc += std::complex<long double>(est.value.real(), est.value.imag());
        error += est.error;
    }
    Complex integral(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));

    // Tail beyond the panel grid: bound it from the decay of the remainder, and
    // integrate it only when the bound is not negligible.
    const double y0 = lv.panels * lv.width;
    auto modulus = [&](double y) {
        const Complex up(sigma, y), down(sigma, -y);
        return std::max(std::abs(weight(up, n) * remainder(up)),
                        std::abs(weight(down, n) * remainder(down)));
    };
    const double a1 = modulus(y0);
    const double f1 = std::max(std::abs(weight(Complex(sigma, y0), n) * F_(Complex(sigma, y0))),
                               std::abs(weight(Complex(sigma, -y0), n) * F_(Complex(sigma, -y0))));
    double tail_bound = 0.0;
    // A remainder at rounding level of F carries no resolvable tail.
    if (a1 > 1e3 * eps * f1) {
        const double a4 = modulus(4.0 * y0);
        const double beta = a4 > 0.0 ? std::log(a1 / a4) / std::log(4.0)
                                     : std::numeric_limits<double>::infinity();
        tail_bound = beta > 1.05 ? 2.0 * a1 * y0 / (beta - 1.0)
                                 : std::numeric_limits<double>::infinity();
        if (std::isinf(beta))
            tail_bound = 2.0 * a1 * y0;
    }
    const double growth = std::exp(sigma * t) / (2.0 * pi);
    if (tail_bound > 0.1 * tol) {
        double tail_error = 0.0;
        integral += tail_integral(y0, t, n, tol, tail_error);
        error += tail_error;
        out.tail_integrated = true;
        out.tail_estimate = tail_error * growth;
    } else {
        out.tail_estimate = tail_bound * growth;
    }
    out.value = atoms + growth * integral;
    out.quadrature_error = error * growth;
    return out;
}

Complex BromwichInverter::richardson_limit(double h) const
{
    const Complex v1 = one_sided(h), v2 = one_sided(2.0 * h), v4 = one_sided(4.0 * h);
    return (8.0 * v1 - 6.0 * v2 + v4) / 3.0;
}

Complex bromwich_invert(const ComplexFunction& F, double t, const BromwichConfig& cfg)
{
    const BromwichInverter inverter(F, cfg);
    return inverter(t);
}

} // namespace nonlocal
