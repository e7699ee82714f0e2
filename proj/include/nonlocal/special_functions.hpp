#ifndef NONLOCAL_SPECIAL_FUNCTIONS_HPP
#define NONLOCAL_SPECIAL_FUNCTIONS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "nonlocal/core.hpp"

namespace nonlocal {

/// Evaluation settings for the Euler-Maclaurin zeta evaluator.
///
/// `terms` is the minimum partial-sum length N; the evaluator raises it with
/// |z| so that the Bernoulli corrections keep decaying. `corrections` is the
/// number M of Bernoulli terms (1..10). Heights above `height_cap` still
/// evaluate but `zeta_height_exceeded` reports them.
struct ZetaSettings {
    int terms = 64;
    int corrections = 8;
    double height_cap = 1.0e3;
};

/// Log-Gamma by the Lanczos approximation (g = 7, 9 coefficients), with the
/// reflection formula for Re(z) < 1/2. Agrees with the real lgamma on the
/// positive axis and with exp(log_gamma(z)) == Gamma(z) everywhere else.
/// Throws ErrorKind::Pole at the non-positive integers.
Complex log_gamma(Complex z);

/// Gamma(z) = exp(log_gamma(z)).
Complex gamma(Complex z);

/// Riemann zeta with analytic continuation. Euler-Maclaurin for Re(z) >= 1/2,
/// the reflection functional equation below that. Throws ErrorKind::Pole at 1.
Complex zeta(Complex z, const ZetaSettings& settings = {});

/// Euler-Maclaurin summation alone, valid for Re(z) > 1 - 2M.
Complex zeta_euler_maclaurin(Complex z, const ZetaSettings& settings = {});

/// zeta(z) = 2^z pi^(z-1) sin(pi z / 2) Gamma(1-z) zeta(1-z).
Complex zeta_reflection(Complex z, const ZetaSettings& settings = {});

/// d zeta / dz by a five-point central difference of `zeta`.
Complex zeta_derivative(Complex z, const ZetaSettings& settings = {});

bool zeta_height_exceeded(Complex z, const ZetaSettings& settings = {});

/// The shifted zeta function zeta_h(s) = zeta(s + h), h > 1.
class ZetaShift {
public:
    explicit ZetaShift(double h, ZetaSettings settings = {});

    double shift() const { return h_; }
    const ZetaSettings& settings() const { return settings_; }

    /// zeta(s + h); throws ErrorKind::Pole at s = 1 - h.
    Complex operator()(Complex s) const;

    /// Trivial zeros -2n - h, n = 1..count.
    std::vector<double> trivial_zeros(int count) const;

private:
    double h_;
    ZetaSettings settings_;
};

inline Complex zeta_shift_eval(const ZetaShift& zs, Complex s) { return zs(s); }

/// Moebius function mu(n) for n <= 10^6 from a linear sieve built once per
/// process. Throws ErrorKind::Domain outside [1, 10^6].
int mobius(std::int64_t n);

inline constexpr std::int64_t mobius_sieve_limit = 1'000'000;

/// Truncated Dirichlet series sum_{n<=terms} mu(n) n^{-z} for 1/zeta(z).
Complex inverse_zeta_mobius(Complex z, std::int64_t terms);

struct ZetaBoundRow {
    double y = 0;
    double inverse_modulus = 0;   // |1/zeta_h(sigma + i y)|
    double bound = 0;             // (sigma+h)/(sigma+h-1)
    double mobius_difference = 0; // |1/zeta_h - truncated Moebius series|
    double mobius_tail_bound = 0; // sum_{n>N} n^{-(sigma+h)} bound
    bool within_bound = false;
    bool mobius_consistent = false;
};

struct ZetaBoundReport {
    double sigma = 0;
    double h = 0;
    std::vector<ZetaBoundRow> rows;
    int violations = 0;
    int mobius_mismatches = 0;
};

/// Checks |1/zeta_h(sigma + i y)| <= (sigma+h)/(sigma+h-1) on each grid point
/// and cross-checks 1/zeta_h against the truncated Moebius series.
ZetaBoundReport inverse_zeta_bound_check(const ZetaShift& zs, double sigma,
                                         std::span<const double> y_grid,
                                         std::int64_t mobius_terms = 10'000);

} // namespace nonlocal

#endif
