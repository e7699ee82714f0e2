#ifndef NONLOCAL_TEST_UTIL_HPP
#define NONLOCAL_TEST_UTIL_HPP

// Reference values computed independently of the library.

#include <cmath>
#include <complex>
#include <cstdint>

#include "nonlocal/core.hpp"

namespace test {

using nonlocal::Complex;

inline bool close(Complex a, Complex b, double tol)
{
    return std::abs(a - b) <= tol;
}

/// Dirichlet series for Re z > 1: partial sum to N plus the integral tail
/// N^{1-z}/(z-1) with the midpoint correction; error O(|z|^2 N^{-Re z - 1}).
inline Complex zeta_oracle(Complex z, int N = 20000)
{
    Complex sum = 0.0;
    for (int n = N - 1; n >= 1; --n)
        sum += std::pow(static_cast<double>(n), -z);
    const double dN = N;
    return sum + std::pow(dN, 1.0 - z) / (z - 1.0) + 0.5 * std::pow(dN, -z) + z / 12.0 * std::pow(dN, -z - 1.0);
}

/// Moebius function by trial division.
inline int mobius_oracle(std::int64_t n)
{
    int sign = 1;
    for (std::int64_t p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            n /= p;
            if (n % p == 0)
                return 0;
            sign = -sign;
        }
    }
    if (n > 1)
        sign = -sign;
    return sign;
}

/// log Gamma by upward recurrence to Re z >= 20 and Stirling with six terms.
inline Complex log_gamma_oracle(Complex z)
{
    Complex shift = 0.0;
    while (z.real() < 20.0) {
        shift += std::log(z);
        z += 1.0;
    }
    const Complex inv = 1.0 / z, inv2 = inv * inv;
    const Complex series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 * (1.0 / 1188.0)))));
    return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * nonlocal::pi) + series - shift;
}

} // namespace test

#endif
