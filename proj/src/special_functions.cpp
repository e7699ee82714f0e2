#include "nonlocal/special_functions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>

namespace nonlocal {

namespace {

    // B_{2k} / (2k)! for k = 1..10.
    constexpr std::array<double, 10> bernoulli_over_factorial = {
        1.0 / 6.0 / 2.0,
        -1.0 / 30.0 / 24.0,
        1.0 / 42.0 / 720.0,
        -1.0 / 30.0 / 40320.0,
        5.0 / 66.0 / 3628800.0,
        -691.0 / 2730.0 / 479001600.0,
        7.0 / 6.0 / 87178291200.0,
        -3617.0 / 510.0 / 20922789888000.0,
        43867.0 / 798.0 / 6402373705728000.0,
        -174611.0 / 330.0 / 2432902008176640000.0,
    };

    constexpr std::array<double, 9> lanczos_coefficients = {
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    };

    constexpr double lanczos_g = 7.0;

    bool is_nonpositive_integer(Complex z)
    {
        if (z.imag() != 0.0)
            return false;
        const double r = std::round(z.real());
        return r <= 0.0 && std::abs(z.real() - r) < 1e-14;
    }

    void validate(const ZetaSettings& settings)
    {
        if (settings.terms < 10)
            throw Error(ErrorKind::Domain, "zeta settings: partial-sum length must be at least 10");
        if (settings.corrections < 1 || settings.corrections > 10)
            throw Error(ErrorKind::Domain, "zeta settings: correction order must lie in 1..10");
    }

    constexpr std::size_t log_table_size = 1u << 16;

    // log(n) for n < log_table_size, built once.
    const std::vector<double>& log_table()
    {
        static const std::vector<double> table = [] {
            std::vector<double> t(log_table_size, 0.0);
            for (std::size_t n = 1; n < log_table_size; ++n)
                t[n] = std::log(static_cast<double>(n));
            return t;
        }();
        return table;
    }

    double log_of(int n)
    {
        const auto& table = log_table();
        return static_cast<std::size_t>(n) < table.size() ? table[n] : std::log(static_cast<double>(n));
    }

} // namespace

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Syntax: return "syntax";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Pole: return "pole";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::Hypothesis: return "hypothesis";
    case ErrorKind::Singular: return "singular";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

Complex log_gamma(Complex z)
{
    if (is_nonpositive_integer(z))
        throw Error(ErrorKind::Pole, "log_gamma: pole at non-positive integer");
    if (z.real() < 0.5) {
        // Gamma(z) Gamma(1-z) = pi / sin(pi z)
        return std::log(pi) - std::log(std::sin(pi * z)) - log_gamma(1.0 - z);
    }
    const Complex w = z - 1.0;
    Complex x = lanczos_coefficients[0];
    for (std::size_t i = 1; i < lanczos_coefficients.size(); ++i)
        x += lanczos_coefficients[i] / (w + static_cast<double>(i));
    const Complex t = w + lanczos_g + 0.5;
    return 0.5 * std::log(2.0 * pi) + (w + 0.5) * std::log(t) - t + std::log(x);
}

Complex gamma(Complex z) { return std::exp(log_gamma(z)); }

Complex zeta_euler_maclaurin(Complex z, const ZetaSettings& settings)
{
    validate(settings);
    if (z == Complex(1.0, 0.0))
        throw Error(ErrorKind::Pole, "zeta: pole at z = 1");
    const int m = settings.corrections;
    // Each Bernoulli term shrinks by roughly (|z| + 2M)^2 / (2 pi N)^2. Left of
    // the axis the partial sum grows like N^{1 - Re z} and cancels, so use the
    // smallest N the corrections allow there.
    const int n_min = static_cast<int>(std::ceil(1.1 * (std::abs(z) + 2.0 * m)));
    const int n = z.real() < 0.0 ? n_min : std::max(settings.terms, n_min);
    Complex sum = 1.0;
    for (int k = 2; k < n; ++k)
        sum += std::exp(-z * log_of(k));

    const double log_n = log_of(n);
    const Complex n_pow = std::exp(-z * log_n); // N^{-z}
    sum += n_pow * static_cast<double>(n) / (z - 1.0) + 0.5 * n_pow;

    // sum_k B_{2k}/(2k)! (z)_{2k-1} N^{-z-2k+1}
    Complex rising = z;                       // z (z+1) ... (z + 2k - 2)
    Complex power = n_pow / static_cast<double>(n); // N^{-z-1}
    const double inv_n2 = 1.0 / (static_cast<double>(n) * n);
    for (int k = 1; k <= m; ++k) {
        sum += bernoulli_over_factorial[k - 1] * rising * power;
        rising *= (z + static_cast<double>(2 * k - 1)) * (z + static_cast<double>(2 * k));
        power *= inv_n2;
    }
    return sum;
}

Complex zeta_reflection(Complex z, const ZetaSettings& settings)
{
    if (z == Complex(1.0, 0.0) || z == Complex(0.0, 0.0)) {
        if (z == Complex(1.0, 0.0))
            throw Error(ErrorKind::Pole, "zeta: pole at z = 1");
        return -0.5;
    }
    const Complex w = 1.0 - z;
    const Complex prefactor = std::exp(z * std::log(2.0) + (z - 1.0) * std::log(pi) + log_gamma(w));
    return prefactor * std::sin(0.5 * pi * z) * zeta_euler_maclaurin(w, settings);
}

Complex zeta(Complex z, const ZetaSettings& settings)
{
    if (z == Complex(1.0, 0.0))
        throw Error(ErrorKind::Pole, "zeta: pole at z = 1 (simple pole with residue 1)");
    if (z.real() < 0.5) {
        // Gamma(1 - z) has poles at z = 1, 2, ...; none lie in this half-plane.
        // At the negative even integers the sine factor vanishes exactly.
        if (z.imag() == 0.0 && z.real() < 0.0 && std::fmod(z.real(), 2.0) == 0.0)
            return 0.0;
        return zeta_reflection(z, settings);
    }
    return zeta_euler_maclaurin(z, settings);
}

Complex zeta_derivative(Complex z, const ZetaSettings& settings)
{
    const double h = 1e-3;
    return (-zeta(z + 2.0 * h, settings) + 8.0 * zeta(z + h, settings)
            - 8.0 * zeta(z - h, settings) + zeta(z - 2.0 * h, settings))
        / (12.0 * h);
}

bool zeta_height_exceeded(Complex z, const ZetaSettings& settings)
{
    return std::abs(z.imag()) > settings.height_cap;
}

ZetaShift::ZetaShift(double h, ZetaSettings settings)
    : h_(h), settings_(settings)
{
    if (!(h > 1.0))
        throw Error(ErrorKind::Domain, "zeta shift must exceed 1 (got " + std::to_string(h) + ")");
    validate(settings_);
}

Complex ZetaShift::operator()(Complex s) const
{
    const Complex z = s + h_;
    if (z == Complex(1.0, 0.0))
        throw Error(ErrorKind::Pole, "zeta_h: pole at s = 1 - h");
    return zeta(z, settings_);
}

std::vector<double> ZetaShift::trivial_zeros(int count) const
{
    std::vector<double> zeros;
    for (int n = 1; n <= count; ++n)
        zeros.push_back(-2.0 * n - h_);
    return zeros;
}

namespace {

    const std::vector<signed char>& mobius_table()
    {
        static std::once_flag once;
        static std::vector<signed char> mu;
        std::call_once(once, [] {
            const auto limit = static_cast<std::size_t>(mobius_sieve_limit);
            mu.assign(limit + 1, 0);
            std::vector<bool> composite(limit + 1, false);
            std::vector<std::size_t> primes;
            mu[1] = 1;
            for (std::size_t i = 2; i <= limit; ++i) {
                if (!composite[i]) {
                    primes.push_back(i);
                    mu[i] = -1;
                }
                for (std::size_t p : primes) {
                    const std::size_t ip = i * p;
                    if (ip > limit)
                        break;
                    composite[ip] = true;
                    if (i % p == 0) {
                        mu[ip] = 0;
                        break;
                    }
                    mu[ip] = static_cast<signed char>(-mu[i]);
                }
            }
        });
        return mu;
    }

} // namespace

int mobius(std::int64_t n)
{
    if (n < 1 || n > mobius_sieve_limit)
        throw Error(ErrorKind::Domain, "mobius: argument outside the sieve range");
    return mobius_table()[static_cast<std::size_t>(n)];
}

Complex inverse_zeta_mobius(Complex z, std::int64_t terms)
{
    if (terms < 1 || terms > mobius_sieve_limit)
        throw Error(ErrorKind::Domain, "inverse_zeta_mobius: term count outside the sieve range");
    const auto& mu = mobius_table();
    Complex sum = 0.0;
    for (std::int64_t n = 1; n <= terms; ++n) {
        const int m = mu[static_cast<std::size_t>(n)];
        if (m != 0)
            sum += static_cast<double>(m) * std::exp(-z * std::log(static_cast<double>(n)));
    }
    return sum;
}

ZetaBoundReport inverse_zeta_bound_check(const ZetaShift& zs, double sigma,
                                         std::span<const double> y_grid,
                                         std::int64_t mobius_terms)
{
    if (!(sigma > 0.0))
        throw Error(ErrorKind::Domain, "inverse_zeta_bound_check: sigma must be positive");
    ZetaBoundReport report;
    report.sigma = sigma;
    report.h = zs.shift();
    const double a = sigma + zs.shift();
    const double bound = a / (a - 1.0);
    const double tail = std::pow(static_cast<double>(mobius_terms), 1.0 - a) / (a - 1.0);
    for (double y : y_grid) {
        const Complex s(sigma, y);
        const Complex inverse = 1.0 / zs(s);
        const Complex series = inverse_zeta_mobius(s + zs.shift(), mobius_terms);
        ZetaBoundRow row;
        row.y = y;
        row.inverse_modulus = std::abs(inverse);
        row.bound = bound;
        row.mobius_difference = std::abs(inverse - series);
        row.mobius_tail_bound = tail;
        row.within_bound = row.inverse_modulus <= bound;
        row.mobius_consistent = row.mobius_difference <= tail + 1e-12;
        report.violations += row.within_bound ? 0 : 1;
        report.mobius_mismatches += row.mobius_consistent ? 0 : 1;
        report.rows.push_back(row);
    }
    return report;
}

} // namespace nonlocal
