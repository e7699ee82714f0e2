#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nonlocal/oracles.hpp"
#include "test_util.hpp"

using namespace nonlocal;
using test::close;

namespace {

const char* entire_corpus[] = {
    "exp(s)",
    "exp(2*(s^2 + 0.5*s))*(s^2 + 0.5*s - 1) + 2",
    "(s+1)*(s+2)",
    "exp(-s)*(1+s)^3",
    "s^2",
};

std::vector<double> grid(double a, double b, int n)
{
    std::vector<double> t;
    for (int i = 0; i < n; ++i)
        t.push_back(a + (b - a) * i / (n - 1));
    return t;
}

} // namespace

TEST_CASE("truncated series examples")
{
    const auto half = AnalyticVectorProfile::exponential(2.0);
    CHECK(close(apply_truncated_series(parse_symbol("s^2"), half, 1.0).value, 0.25 * std::exp(-0.5), 1e-15));
    CHECK(apply_truncated_series(parse_symbol("s^2"), half, 1.0).value.real() == doctest::Approx(0.15163).epsilon(1e-4));

    const auto e = apply_truncated_series(parse_symbol("exp(s)"), half, 0.0, 40);
    CHECK(e.converged);
    CHECK(close(e.value, std::exp(-0.5), 1e-14));

    const auto z = apply_truncated_series(parse_symbol("zeta(s+3)"), half, 1.0);
    CHECK(close(z.value, test::zeta_oracle(2.5, 200000) * std::exp(-0.5), 1e-9));
    CHECK(z.value.real() == doctest::Approx(0.81367).epsilon(1e-4));
}

TEST_CASE("eigenfunction identity for entire symbols")
{
    for (const char* text : entire_corpus) {
        const auto f = parse_symbol(text);
        for (double k : {1.25, 2.0, 4.0}) {
            CAPTURE(text);
            CAPTURE(k);
            const auto phi = AnalyticVectorProfile::exponential(k);
            const Complex lambda = f(-1.0 / k);
            for (double t : grid(0.0, 10.0, 21))
                CHECK(std::abs(apply_truncated_series(f, phi, t, 60).value - lambda * std::exp(-t / k)) < 1e-8);
        }
    }
}

TEST_CASE("eigenfunction identity for shifted zeta")
{
    for (double h : {2.0, 3.0}) {
        const auto f = parse_symbol(h == 2.0 ? "zeta(s+2)" : "zeta(s+3)");
        const auto phi = AnalyticVectorProfile::exponential(2.0);
        const Complex lambda = test::zeta_oracle(h - 0.5, 400000);
        for (double t : grid(0.0, 10.0, 11)) {
            CAPTURE(h);
            CAPTURE(t);
            CHECK(std::abs(apply_truncated_series(f, phi, t, 60).value - lambda * std::exp(-0.5 * t)) < 1e-8);
        }
    }
}

TEST_CASE("exp(d/dt) is a unit shift")
{
    const auto f = parse_symbol("exp(s)");
    const auto phi = AnalyticVectorProfile::band_limited(1.5);
    for (double t : {0.0, 0.7, 3.0}) {
        const double u = 1.5 * (t + 1.0);
        CHECK(close(apply_truncated_series(f, phi, t, 80).value, std::sin(u) / u, 1e-12));
    }
}

TEST_CASE("exponential atoms")
{
    // (d/dt + 1)^2 annihilates t e^{-t}.
    const auto atom = AnalyticVectorProfile::exponential_atom(1, -1.0);
    for (double t : {0.0, 1.0, 2.5})
        CHECK(std::abs(apply_truncated_series(parse_symbol("(s+1)^2"), atom, t).value) < 1e-14);
    // f(d/dt) t e^{w t} = (f(w) t + f'(w)) e^{w t}
    const Complex w(-0.5, 2.0);
    const auto f = parse_symbol("exp(s)*(s + 3)");
    const auto a = AnalyticVectorProfile::exponential_atom(1, w);
    const auto [fw, dfw] = f.value_and_derivative(w);
    for (double t : {0.0, 0.4, 2.0})
        CHECK(close(apply_truncated_series(f, a, t, 80).value, (fw * t + dfw) * std::exp(w * t), 1e-12));
}

TEST_CASE("classical ODE reference")
{
    const auto t = grid(0.0, 10.0, 51);
    {
        const Complex init[] = {5.0};
        const auto y = classical_ode_reference(parse_symbol("s+1"), Forcing::zero(), init, t);
        for (std::size_t i = 0; i < t.size(); ++i)
            CHECK(close(y[i], 5.0 * std::exp(-t[i]), 1e-9));
    }
    {
        const Complex init[] = {1.0, 0.0};
        const auto y = classical_ode_reference(parse_symbol("s^2 + 3*s + 2"), Forcing::exp_decay(3.0), init, t);
        // Partial fractions: 5/2 e^{-t} - 2 e^{-2t} + 1/2 e^{-3t}
        for (std::size_t i = 0; i < t.size(); ++i)
            CHECK(close(y[i], 2.5 * std::exp(-t[i]) - 2.0 * std::exp(-2.0 * t[i]) + 0.5 * std::exp(-3.0 * t[i]),
                        1e-8));
    }
    {
        const auto y = classical_ode_reference(parse_symbol("2"), Forcing::exp_decay(1.0), {}, t);
        for (std::size_t i = 0; i < t.size(); ++i)
            CHECK(close(y[i], 0.5 * std::exp(-t[i]), 1e-15));
    }
    const Complex one[] = {1.0};
    CHECK_THROWS(classical_ode_reference(parse_symbol("exp(s)"), Forcing::zero(), one, t));
}

TEST_CASE("residual check")
{
    const auto t = grid(0.0, 10.0, 41);
    {
        const auto phi = AnalyticVectorProfile::exponential_atom(0, -1.0, 5.0);
        const auto r = residual_check(parse_symbol("s+1"), phi, Forcing::zero(), t);
        CHECK(r.passed);
        CHECK(r.sup < 1e-9);
    }
    {
        const auto J = Forcing::exp_decay(0.5, std::exp(-0.5));
        const auto r = residual_check(parse_symbol("exp(s)"), AnalyticVectorProfile::exponential(2.0), J, t, 40);
        CHECK(r.passed);
        CHECK(r.sup < 1e-7);
    }
    {
        // Forcing 10% too large: the residual is |dJ| at its largest, t = 0.
        const auto J = Forcing::exp_decay(0.5, 1.1 * std::exp(-0.5));
        const auto r = residual_check(parse_symbol("exp(s)"), AnalyticVectorProfile::exponential(2.0), J, t, 40);
        CHECK_FALSE(r.passed);
        CHECK(r.sup == doctest::Approx(0.1 * std::exp(-0.5)).epsilon(1e-8));
    }
    {
        // Computed solution of a classical IVP.
        const auto f = parse_symbol("s+1");
        const ClassicalIVP ivp{f, Forcing::zero(), PoleSpec({{-1.0, 1}}), {5.0}};
        const auto sol = solve_classical_ivp(ivp).first;
        const auto r = residual_check(f, sol, Forcing::zero(), t);
        CHECK(r.passed);
        CHECK(r.sup < 1e-9);
    }
}

TEST_CASE("polynomial symbols agree with the ODE reference")
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> data(-3.0, 3.0);
    const auto t = grid(0.0, 10.0, 26);
    struct Case {
        const char* f;
        PoleSpec poles;
    };
    const Case cases[] = {
        {"s+1", PoleSpec({{-1.0, 1}})},
        {"(s+1)*(s+2)", PoleSpec({{-1.0, 1}, {-2.0, 1}})},
    };
    for (const auto& c : cases) {
        const auto f = parse_symbol(c.f);
        for (int draw = 0; draw < 10; ++draw) {
            std::vector<Complex> init;
            for (int n = 0; n < c.poles.K(); ++n)
                init.emplace_back(data(rng));
            const ClassicalIVP ivp{f, Forcing::exp_decay(3.0), c.poles, init};
            const auto sol = solve_classical_ivp(ivp).first;
            const auto ref = classical_ode_reference(f, Forcing::exp_decay(3.0), init, t);
            CAPTURE(c.f);
            CAPTURE(draw);
            for (std::size_t i = 0; i < t.size(); ++i)
                CHECK(close(sol(t[i]), ref[i], 1e-6));
        }
    }
}

TEST_CASE("Minkowski bound for the truncated series")
{
    for (const char* text : entire_corpus) {
        const auto f = parse_symbol(text);
        const VectorXc c = taylor_coefficients(f, 60);
        for (double k : {1.25, 2.0, 4.0}) {
            const auto phi = AnalyticVectorProfile::exponential(k);
            double weighted = 0.0;
            for (int n = 0; n <= 60; ++n)
                weighted += std::abs(c(n)) * phi.norm_bound(n);
            const auto t = grid(0.0, 10.0, 101);
            double sup_phi = 0.0, sup_series = 0.0;
            for (double x : t) {
                sup_phi = std::max(sup_phi, std::abs(phi(x)));
                sup_series = std::max(sup_series, std::abs(apply_truncated_series(c, phi, x, 60).value));
            }
            CAPTURE(text);
            CAPTURE(k);
            CHECK(sup_series <= weighted * sup_phi * (1.0 + 1e-12));
        }
    }
}
