#ifndef NONLOCAL_SERIES_HPP
#define NONLOCAL_SERIES_HPP

// Truncated power-series arithmetic on Eigen column vectors. A series of
// length n+1 stores the coefficients c_0..c_n of sum c_k s^k. All operations
// truncate to the length of their first argument.

#include <cmath>
#include <complex>

#include <Eigen/Core>

#include "nonlocal/core.hpp"

namespace nonlocal::series {

template <typename Scalar>
using Series = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
Series<Scalar> constant(Scalar c, Eigen::Index length)
{
    Series<Scalar> out = Series<Scalar>::Zero(length);
    out(0) = c;
    return out;
}

/// The series of the identity map s.
template <typename Scalar>
Series<Scalar> variable(Eigen::Index length)
{
    Series<Scalar> out = Series<Scalar>::Zero(length);
    if (length > 1)
        out(1) = Scalar(1);
    return out;
}

template <typename Derived1, typename Derived2>
auto multiply(const Eigen::MatrixBase<Derived1>& a, const Eigen::MatrixBase<Derived2>& b)
{
    using Scalar = typename Derived1::Scalar;
    const Eigen::Index n = a.size();
    Series<Scalar> out = Series<Scalar>::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (a(i) == Scalar(0))
            continue;
        for (Eigen::Index j = 0; i + j < n; ++j)
            out(i + j) += a(i) * b(j);
    }
    return out;
}

/// a / b; requires b(0) != 0.
template <typename Derived1, typename Derived2>
auto divide(const Eigen::MatrixBase<Derived1>& a, const Eigen::MatrixBase<Derived2>& b)
{
    using Scalar = typename Derived1::Scalar;
    const Eigen::Index n = a.size();
    if (std::abs(b(0)) == 0.0)
        throw Error(ErrorKind::Domain, "series division by a series with zero constant term");
    Series<Scalar> q(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        Scalar acc = a(k);
        for (Eigen::Index j = 1; j <= k; ++j)
            acc -= b(j) * q(k - j);
        q(k) = acc / b(0);
    }
    return q;
}

/// exp(a) via b' = a' b.
template <typename Derived>
auto exp(const Eigen::MatrixBase<Derived>& a)
{
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = a.size();
    Series<Scalar> b = Series<Scalar>::Zero(n);
    b(0) = std::exp(a(0));
    for (Eigen::Index k = 1; k < n; ++k) {
        Scalar acc(0);
        for (Eigen::Index j = 1; j <= k; ++j)
            acc += static_cast<double>(j) * a(j) * b(k - j);
        b(k) = acc / static_cast<double>(k);
    }
    return b;
}

template <typename Derived>
auto power(const Eigen::MatrixBase<Derived>& a, unsigned exponent)
{
    using Scalar = typename Derived::Scalar;
    Series<Scalar> result = constant<Scalar>(Scalar(1), a.size());
    Series<Scalar> base = a;
    while (exponent > 0) {
        if (exponent & 1u)
            result = multiply(result, base);
        exponent >>= 1u;
        if (exponent > 0)
            base = multiply(base, base);
    }
    return result;
}

/// Horner evaluation of the truncated series at s.
template <typename Derived, typename Point>
auto evaluate(const Eigen::MatrixBase<Derived>& c, Point s)
{
    using Scalar = decltype(typename Derived::Scalar() * s);
    Scalar acc(0);
    for (Eigen::Index k = c.size() - 1; k >= 0; --k)
        acc = acc * s + c(k);
    return acc;
}

} // namespace nonlocal::series

#endif
