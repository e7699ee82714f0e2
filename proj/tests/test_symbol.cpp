#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nonlocal/symbol.hpp"
#include "test_util.hpp"

using namespace nonlocal;
using test::close;

TEST_CASE("parse and evaluate simple polynomial")
{
    const auto f = parse_symbol("s^2 + 1");
    CHECK(close(f(2.0), 5.0, 1e-15));
    CHECK(f.is_polynomial());
    CHECK(f.is_entire());
}

TEST_CASE("Barnaby symbol parses and evaluates")
{
    const auto f = parse_symbol("exp(2*(s^2 + 0.5*s))*(s^2 + 0.5*s - 1) + 2");
    const Complex s(0.3, -0.7);
    const Complex q = s * s + 0.5 * s;
    CHECK(close(f(s), std::exp(2.0 * q) * (q - 1.0) + 2.0, 1e-14));
    CHECK_FALSE(f.is_polynomial());
}

TEST_CASE("syntax errors carry the offset")
{
    try {
        parse_symbol("s + ");
        FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
        CHECK(e.offset() == 4);
    }
    CHECK_THROWS_AS(parse_symbol("s * (1 + s"), SyntaxError);
    CHECK_THROWS_AS(parse_symbol("s^1.5"), SyntaxError);
    CHECK_THROWS_AS(parse_symbol("sin(s)"), SyntaxError);
}

TEST_CASE("zeta shift must exceed 1")
{
    try {
        parse_symbol("zeta(s+1)");
        FAIL("expected rejection");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("shift must exceed 1") != std::string::npos);
    }
    CHECK_THROWS(parse_symbol("zeta(s+0.5)"));
}

TEST_CASE("eval examples")
{
    CHECK(close(parse_symbol("exp(s)")(Complex(0.0, pi)), -1.0, 1e-12));
    CHECK(close(parse_symbol("zeta(s+3)")(0.0), test::zeta_oracle(3.0), 1e-12));
    // zeta(s + 2) has its pole at s = -1.
    CHECK_THROWS_AS(parse_symbol("zeta(s+2)")(-1.0), Error);
    CHECK_THROWS_AS(parse_symbol("1/s")(0.0), Error);
}

TEST_CASE("print then parse round trip")
{
    const char* corpus[] = {
        "s^2 + 1",
        "exp(2*(s^2 + 0.5*s))*(s^2 + 0.5*s - 1) + 2",
        "zeta(s+3)",
        "(s+1)*(s+2)*(s+3)",
        "-s/(s + 2.5) - (1 - s)^3",
        "exp(-s)*zeta(s+2.5) + 2i*s",
        "1/(1/(s+1) + 1)",
    };
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> re(0.01, 3.0), im(-5.0, 5.0);
    for (const char* text : corpus) {
        CAPTURE(text);
        const auto a = parse_symbol(text);
        const auto b = parse_symbol(a.to_string());
        CHECK(b.to_string() == a.to_string());
        for (int k = 0; k < 100; ++k) {
            const Complex s(re(rng), im(rng));
            const Complex va = a(s), vb = b(s);
            CHECK(std::abs(va - vb) <= 1e-14 * std::max(1.0, std::abs(va)));
        }
    }
}

TEST_CASE("taylor coefficients")
{
    const auto e = taylor_coefficients(parse_symbol("exp(s)"), 4);
    const double expect[] = {1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0};
    for (int n = 0; n <= 4; ++n)
        CHECK(close(e(n), expect[n], 1e-15));

    const auto g = taylor_coefficients(parse_symbol("exp(2*(s^2))"), 4);
    CHECK(close(g(2), 2.0, 1e-15));
    CHECK(close(g(1), 0.0, 1e-15));
    CHECK(close(g(4), 2.0, 1e-14));

    // zeta(s + 3): c_0 = zeta(3), c_1 = zeta'(3) from a central difference of
    // the Dirichlet-series oracle.
    const auto z = taylor_coefficients(parse_symbol("zeta(s+3)"), 2);
    CHECK(close(z(0), test::zeta_oracle(3.0), 1e-12));
    const double h = 1e-5;
    const Complex dz = (test::zeta_oracle(3.0 + h) - test::zeta_oracle(3.0 - h)) / (2.0 * h);
    CHECK(std::abs(z(1) - dz) < 1e-7);
    CHECK(close(z(1), -0.19812624288563685, 1e-10));

    CHECK_THROWS(taylor_coefficients(parse_symbol("1/s"), 3));
    CHECK_THROWS(taylor_coefficients(parse_symbol("exp(s)"), 500));
}

TEST_CASE("taylor series reproduces the symbol")
{
    const char* entire[] = {"exp(s)", "exp(2*(s^2 + 0.5*s))*(s^2 + 0.5*s - 1) + 2", "(s+1)*(s+2)", "exp(-s)*(1+s)^3"};
    for (const char* text : entire) {
        CAPTURE(text);
        const auto f = parse_symbol(text);
        const VectorXc c = taylor_coefficients(f, 30);
        for (double r : {0.1, 0.3, 0.5})
            for (int k = 0; k < 8; ++k) {
                const Complex s = std::polar(r, 2.0 * pi * k / 8.0);
                Complex sum = 0.0, power = 1.0;
                for (int n = 0; n <= 30; ++n, power *= s)
                    sum += c(n) * power;
                CHECK(std::abs(sum - f(s)) < 1e-10);
            }
    }
}

TEST_CASE("zeta taylor radius hint")
{
    const auto f = parse_symbol("zeta(s+3)");
    REQUIRE(f.taylor_radius_hint().has_value());
    CHECK(*f.taylor_radius_hint() == doctest::Approx(2.0));
    const auto e = parse_symbol("exp(s)").taylor_radius_hint();
    CHECK((!e || std::isinf(*e)));
}

TEST_CASE("r-series with constant data")
{
    const auto f = parse_symbol("exp(s)");
    const auto d = DataSequence::finite({1.0});
    const auto r = build_r_series(f, d, 1.0);
    CHECK(r.converged);
    CHECK(close(r.value, std::exp(1.0) - 1.0, 1e-12));
    // Property: (f(s) - f(0)) / s for |s| < 1.
    const auto barnaby = parse_symbol("exp(2*(s^2 + 0.5*s))*(s^2 + 0.5*s - 1) + 2");
    for (int k = 0; k < 12; ++k) {
        const Complex s = std::polar(0.2 + 0.06 * k, 0.7 * k);
        const auto res = build_r_series(barnaby, DataSequence::finite({2.0}), s, 80);
        CHECK(res.converged);
        CHECK(close(res.value, 2.0 * (barnaby(s) - barnaby(0.0)) / s, 1e-10));
    }
}

TEST_CASE("r-series with geometric data")
{
    const auto f = parse_symbol("exp(s)");
    const auto d = DataSequence::geometric(1.0, -0.5);
    const auto r = build_r_series(f, d, 1.0);
    const double closed = (std::exp(1.0) - std::exp(-0.5)) / 1.5;
    CHECK(close(r.value, closed, 1e-10));
    CHECK(r.value.real() == doctest::Approx(1.407834).epsilon(1e-6));

    // Direct double summation as an independent check.
    const VectorXc c = taylor_coefficients(f, 60);
    Complex direct = 0.0;
    for (int n = 1; n <= 60; ++n)
        for (int j = 1; j <= n; ++j)
            direct += c(n) * std::pow(-0.5, j - 1);
    CHECK(close(r.value, direct, 1e-12));
}

TEST_CASE("r-series flags growing data")
{
    const auto f = parse_symbol("exp(s)");
    std::vector<Complex> d;
    for (int j = 0; j < 40; ++j)
        d.emplace_back(std::ldexp(1.0, j));
    const auto r = build_r_series(f, DataSequence::finite(d), 0.5);
    CHECK(r.flagged());
    CHECK_FALSE(r.data_admissible);
    CHECK_THROWS(DataSequence::geometric(1.0, 2.0));
}
