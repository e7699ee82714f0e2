#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nonlocal/special_functions.hpp"
#include "test_util.hpp"

using namespace nonlocal;
using test::close;

TEST_CASE("zeta at classical points")
{
    CHECK(close(zeta(2.0), pi * pi / 6.0, 1e-13));
    CHECK(close(zeta(2.0), test::zeta_oracle(2.0), 1e-12));
    CHECK(close(zeta(0.0), -0.5, 1e-13));
    CHECK(std::abs(zeta(-2.0)) < 1e-13);
    CHECK(close(zeta(3.0), 1.2020569031595943, 1e-13));
    CHECK(close(zeta(-1.0), -1.0 / 12.0, 1e-13));
    CHECK_THROWS_AS(zeta(1.0), Error);
    try {
        zeta(1.0);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Pole);
    }
}

TEST_CASE("zeta matches the Dirichlet series off the axis")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> re(1.3, 6.0), im(-40.0, 40.0);
    for (int k = 0; k < 40; ++k) {
        const Complex z(re(rng), im(rng));
        CAPTURE(z);
        CHECK(close(zeta(z), test::zeta_oracle(z, 40000), 1e-9));
    }
}

TEST_CASE("trivial zeros")
{
    for (int n = 1; n <= 5; ++n)
        CHECK(std::abs(zeta(-2.0 * n)) < 1e-10);
    const ZetaShift z3(3.0);
    const auto zeros = z3.trivial_zeros(3);
    REQUIRE(zeros.size() == 3);
    CHECK(zeros[0] == doctest::Approx(-5.0));
    for (double x : zeros)
        CHECK(std::abs(z3(x)) < 1e-10);
}

TEST_CASE("reflection and Euler-Maclaurin agree in the left strip")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> re(-3.0, -0.5), im(-20.0, 20.0);
    for (int k = 0; k < 100; ++k) {
        const Complex z(re(rng), im(rng));
        const Complex a = zeta_euler_maclaurin(z), b = zeta_reflection(z);
        CAPTURE(z);
        CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("log gamma")
{
    CHECK(close(log_gamma(5.0), std::log(24.0), 1e-13));
    CHECK(close(log_gamma(0.5), 0.5 * std::log(pi), 1e-13));
    CHECK_THROWS_AS(log_gamma(-3.0), Error);
    CHECK_THROWS_AS(log_gamma(0.0), Error);
    for (int n = 1; n <= 15; ++n) {
        double fact = 1.0;
        for (int j = 2; j < n + 1; ++j)
            fact *= j;
        CHECK(std::exp(log_gamma(n + 1.0).real()) == doctest::Approx(fact).epsilon(1e-12));
    }
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> re(-4.5, 8.0), im(-30.0, 30.0);
    for (int k = 0; k < 60; ++k) {
        const Complex z(re(rng), im(rng));
        CAPTURE(z);
        // Compare Gamma itself so the branch of the logarithm does not matter.
        const Complex a = std::exp(log_gamma(z)), b = std::exp(test::log_gamma_oracle(z));
        CHECK(std::abs(a - b) <= 1e-11 * std::abs(b));
    }
}

TEST_CASE("zeta shift")
{
    const ZetaShift z3(3.0);
    CHECK(close(z3(0.0), test::zeta_oracle(3.0), 1e-12));
    CHECK_THROWS_AS(z3(-2.0), Error);
    const ZetaShift z2(2.0);
    const Complex v = zeta_shift_eval(z2, Complex(1.0, 10.0));
    CHECK(std::abs(v - 1.0) <= 0.2021);
    CHECK(close(v, test::zeta_oracle(Complex(3.0, 10.0), 100000), 1e-9));
    CHECK_THROWS(ZetaShift(1.0));
}

TEST_CASE("moebius sieve")
{
    for (std::int64_t n = 1; n <= 3000; ++n)
        CHECK(mobius(n) == test::mobius_oracle(n));
    CHECK(mobius(999999) == test::mobius_oracle(999999));
    CHECK_THROWS(mobius(0));
}

TEST_CASE("inverse zeta bound")
{
    std::vector<double> ys;
    for (int y = -50; y <= 50; ++y)
        ys.push_back(y);
    const auto report = inverse_zeta_bound_check(ZetaShift(3.0), 0.5, ys);
    CHECK(report.violations == 0);
    CHECK(report.mobius_mismatches == 0);
    for (const auto& row : report.rows)
        CHECK(row.bound == doctest::Approx(1.4));

    const double y0[] = {0.0};
    const auto single = inverse_zeta_bound_check(ZetaShift(2.0), 1.0, y0);
    REQUIRE(single.rows.size() == 1);
    CHECK(single.rows[0].inverse_modulus == doctest::Approx(1.0 / test::zeta_oracle(3.0).real()).epsilon(1e-10));
    CHECK(single.rows[0].inverse_modulus == doctest::Approx(0.8319).epsilon(1e-4));

    const auto empty = inverse_zeta_bound_check(ZetaShift(2.0), 1.0, {});
    CHECK(empty.rows.empty());
}

TEST_CASE("moebius series inverts zeta")
{
    for (double re : {2.5, 3.0, 4.0})
        for (double im : {0.0, 7.0, -23.0}) {
            const Complex z(re, im);
            const Complex prod = zeta(z) * inverse_zeta_mobius(z, 10000);
            // Tail of sum_{n > N} n^{-Re z}.
            const double tail = std::pow(10000.0, 1.0 - re) / (re - 1.0);
            CHECK(std::abs(prod - 1.0) <= std::abs(zeta(z)) * tail);
        }
}
