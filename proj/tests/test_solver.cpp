#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>

#include <Eigen/LU>

#include "nonlocal/oracles.hpp"
#include "nonlocal/solver.hpp"
#include "test_util.hpp"

using namespace nonlocal;
using test::close;

namespace {

const char* barnaby = "exp(2*(s^2 + 0.5*s))*(s^2 + 0.5*s - 1) + 2";

std::string number(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<double> grid(double a, double b, int n)
{
    std::vector<double> t;
    for (int i = 0; i < n; ++i)
        t.push_back(a + (b - a) * i / (n - 1));
    return t;
}

} // namespace

TEST_CASE("Laurent coefficients")
{
    auto g1 = [](Complex s) { return 1.0 / (s + 1.0); };
    CHECK(close(laurent_coefficients(g1, -1.0, 1, 0.5).coefficients(0), 1.0, 1e-12));

    auto g2 = [](Complex s) { return (2.0 * s + 3.0) / ((s + 1.0) * (s + 1.0)); };
    const auto a = laurent_coefficients(g2, -1.0, 2, 0.5).coefficients;
    CHECK(close(a(0), 2.0, 1e-12));
    CHECK(close(a(1), 1.0, 1e-12));

    auto g3 = [](Complex s) { return 1.0 / ((s + 1.0) * (s + 2.0)); };
    CHECK(close(laurent_coefficients(g3, -1.0, 1, 0.5).coefficients(0), 1.0, 1e-12));
    CHECK(close(laurent_coefficients(g3, -2.0, 1, 0.5).coefficients(0), -1.0, 1e-12));

    // Overstated order: the top coefficient vanishes and a warning is attached.
    const auto over = laurent_coefficients(g1, -1.0, 2, 0.5);
    CHECK(over.warning.has_value());
    // Understated order leaves a pole inside the circle.
    auto g4 = [](Complex s) { return 1.0 / std::pow(s + 1.0, 3); };
    CHECK_THROWS(laurent_coefficients(g4, -1.0, 1, 0.5));
}

TEST_CASE("pole specification checks")
{
    CHECK_THROWS(PoleSpec({{Complex(0.5, 0.0), 1}}).validate());
    CHECK_THROWS(PoleSpec({{Complex(0.0, 1.0), 1}}).validate());
    CHECK_THROWS(PoleSpec({{-1.0, 1}, {-1.0, 2}}).validate());
    CHECK_THROWS(PoleSpec({{-1.0, 0}}).validate());
    const PoleSpec ok({{-1.0, 2}, {Complex(-2.0, 1.0), 1}});
    CHECK_NOTHROW(ok.validate());
    CHECK(ok.K() == 3);
    // Radius: half the distance to the other pole, capped at |Re omega| / 2.
    CHECK(ok.laurent_radius(0) == doctest::Approx(0.5));
    CHECK(ok.laurent_radius(1) == doctest::Approx(std::sqrt(2.0) / 2.0));
}

TEST_CASE("residue sum evaluation")
{
    const PoleSpec p({{-1.0, 2}});
    ResiduePolynomials rp;
    VectorXc a(2);
    a << 1.0, 1.0;
    rp.coefficients.push_back(a);
    CHECK(close(residue_sum_eval(rp, p, 0.0), 1.0, 1e-15));
    CHECK(close(residue_sum_eval(rp, p, 1.0), 2.0 * std::exp(-1.0), 1e-15));
    // d/dt (1 + t) e^{-t} = -t e^{-t}
    CHECK(close(residue_sum_eval(rp, p, 2.0, 1), -2.0 * std::exp(-2.0), 1e-14));
    CHECK(close(residue_sum_eval({}, PoleSpec{}, 3.0), 0.0, 0.0));
}

TEST_CASE("generalized solutions")
{
    {
        const auto sol = solve_generalized(parse_symbol("1"), Forcing::exp_decay(1.0), GeneralizedIC::zero());
        for (double t : {0.1, 1.0, 5.0})
            CHECK(close(sol(t), std::exp(-t), 1e-8));
    }
    {
        // Eigenfunction e^{-t/2} of exp(d/dt).
        const auto f = parse_symbol("exp(s)");
        const double fk = std::exp(-0.5);
        const auto r = GeneralizedIC::from_symbol(parse_symbol("(exp(s) - " + number(fk) + ")/(s + 0.5)"));
        const auto sol = solve_generalized(f, Forcing::exp_decay(0.5, fk), r);
        for (double t : grid(0.0, 10.0, 21))
            CHECK(close(sol(t), std::exp(-0.5 * t), 1e-7));
    }
    {
        const auto f = parse_symbol(barnaby);
        const double f1 = f(-1.0).real();
        const auto r
            = GeneralizedIC::from_symbol(parse_symbol("(" + std::string(barnaby) + " - " + number(f1) + ")/(s + 1)"));
        // e^{-t} is an eigenfunction with eigenvalue f(-1), so J = f(-1) e^{-t}.
        const auto J = Forcing::exp_decay(1.0, f1);
        const auto sol = solve_generalized(f, J, r);
        for (double t : grid(0.0, 5.0, 11))
            CHECK(close(sol(t), std::exp(-t), 1e-7));
        // The series oracle applied to the closed-form eigenfunction.
        const auto t = grid(0.5, 5.0, 10);
        const auto res = residual_check(f, AnalyticVectorProfile::exponential(1.0), J, t, 40, 1e-7);
        CHECK(res.passed);
    }
}

TEST_CASE("generalized solve refuses a zero on the contour")
{
    // s^2 + 1 vanishes at s = +-i; shifting the contour to Re s = 0 is not
    // allowed, but sigma = 1 is fine and the line Re s = 1 has no zeros.
    const auto f = parse_symbol("(s - 1)^2 + 4");
    CHECK_THROWS(solve_generalized(f, Forcing::exp_decay(1.0), GeneralizedIC::zero(), BromwichConfig{1.0}));
}

TEST_CASE("solutions with declared poles")
{
    const PoleSpec p12({{-1.0, 1}, {-2.0, 1}});
    {
        const auto sol = solve_with_poles(parse_symbol("(s+1)*(s+2)"), Forcing::zero(),
                                          GeneralizedIC::from_symbol(parse_symbol("s + 3")), p12);
        for (double t : {0.0, 0.5, 2.0, 7.0})
            CHECK(close(sol(t), 2.0 * std::exp(-t) - std::exp(-2.0 * t), 1e-10));
        // Also a solution of phi'' + 3 phi' + 2 phi = 0 from the RK4 reference.
        const Complex init[] = {1.0, -0.0};
        const Complex ic[] = {sol(0.0), sol.derivative(1, 0.0)};
        CHECK(close(ic[0], init[0], 1e-10));
        const auto t = grid(0.0, 10.0, 11);
        const auto ref = classical_ode_reference(parse_symbol("(s+1)*(s+2)"), Forcing::zero(), ic, t);
        for (std::size_t i = 0; i < t.size(); ++i)
            CHECK(close(sol(t[i]), ref[i], 1e-8));
    }
    {
        const auto sol = solve_with_poles(parse_symbol("(s+1)^2"), Forcing::zero(),
                                          GeneralizedIC::from_symbol(parse_symbol("1")), PoleSpec({{-1.0, 2}}));
        for (double t : {0.0, 1.0, 3.0})
            CHECK(close(sol(t), t * std::exp(-t), 1e-10));
    }
    {
        // No residue part: the pole list is empty and r = 0.
        const auto sol = solve_with_poles(parse_symbol("s+1"), Forcing::exp_decay(2.0), GeneralizedIC::zero(), {});
        const Complex init[] = {0.0};
        const auto t = grid(0.0, 10.0, 21);
        const auto ref = classical_ode_reference(parse_symbol("s+1"), Forcing::exp_decay(2.0), init, t);
        for (std::size_t i = 1; i < t.size(); ++i) {
            CHECK(close(sol(t[i]), std::exp(-t[i]) - std::exp(-2.0 * t[i]), 1e-8));
            CHECK(close(sol(t[i]), ref[i], 1e-8));
        }
    }
}

TEST_CASE("IVP system assembly")
{
    {
        const ClassicalIVP ivp{parse_symbol("s+1"), Forcing::zero(), PoleSpec({{-1.0, 1}}), {5.0}};
        const Complex L[] = {0.25};
        const auto [A, b] = assemble_ivp_system(ivp, L);
        REQUIRE(A.rows() == 1);
        CHECK(close(A(0, 0), 1.0, 0.0));
        CHECK(close(b(0), 4.75, 1e-15));
    }
    {
        const ClassicalIVP ivp{parse_symbol("(s+1)^2"), Forcing::zero(), PoleSpec({{-1.0, 2}}), {1.0, 2.0}};
        const Complex L[] = {0.5, 0.25};
        const auto [A, b] = assemble_ivp_system(ivp, L);
        // phi_0 = L_0 + a_1; phi_1 = L_1 - a_1 + a_2
        CHECK(close(A(0, 0), 1.0, 1e-15));
        CHECK(close(A(0, 1), 0.0, 1e-15));
        CHECK(close(A(1, 0), -1.0, 1e-15));
        CHECK(close(A(1, 1), 1.0, 1e-15));
        CHECK(close(b(0), 0.5, 1e-15));
        CHECK(close(b(1), 1.75, 1e-15));
    }
    CHECK_THROWS(assemble_ivp_system(
        ClassicalIVP{parse_symbol("s+1"), Forcing::zero(), PoleSpec({{-1.0, 1}}), {5.0}}, std::span<const Complex>{}));
}

TEST_CASE("simple zeros give a Vandermonde system")
{
    const auto f = parse_symbol(barnaby);
    auto zeros = find_zeros(f, {-2.5, -0.01, -2.0, 2.0});
    REQUIRE(zeros.size() >= 4);
    std::vector<Pole> poles;
    for (const auto& z : zeros)
        poles.push_back({z.zero, 1});
    const ClassicalIVP ivp{f, Forcing::zero(), PoleSpec(poles), std::vector<Complex>(poles.size(), 0.0)};
    const std::vector<Complex> L(poles.size(), 0.0);
    const auto [A, b] = assemble_ivp_system(ivp, L);
    for (std::size_t i = 0; i < poles.size(); ++i)
        for (std::size_t j = 0; j < poles.size(); ++j)
            CHECK(std::abs(A(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))
                           - std::pow(poles[i].omega, static_cast<int>(j)))
                  <= 1e-12 * std::max(1.0, std::abs(std::pow(poles[i].omega, static_cast<int>(j)))));
    CHECK(std::abs(A.determinant()) > 0.0);
}

TEST_CASE("classical IVP")
{
    {
        const ClassicalIVP ivp{parse_symbol("s+1"), Forcing::zero(), PoleSpec({{-1.0, 1}}), {5.0}};
        const auto [sol, r0] = solve_classical_ivp(ivp);
        for (double t : {0.0, 1.0, 4.0})
            CHECK(close(sol(t), 5.0 * std::exp(-t), 1e-10));
        CHECK(close(r0.r(Complex(0.7, 3.0)), 5.0, 1e-9));
        CHECK(r0.provenance == GeneralizedIC::Provenance::ConstructedFromIVP);
    }
    {
        const auto f = parse_symbol("(s+1)*(s+2)");
        const std::vector<Complex> init = {1.0, 0.0};
        const ClassicalIVP ivp{f, Forcing::exp_decay(3.0), PoleSpec({{-1.0, 1}, {-2.0, 1}}), init};
        const auto [sol, r0] = solve_classical_ivp(ivp);
        const auto t = grid(0.0, 10.0, 101);
        const auto ref = classical_ode_reference(f, Forcing::exp_decay(3.0), init, t);
        for (std::size_t i = 0; i < t.size(); ++i)
            CHECK(close(sol(t[i]), ref[i], 1e-6));
        REQUIRE(sol.diagnostics.condition_number.has_value());
        CHECK(*sol.diagnostics.condition_number < 1e3);
        for (double e : sol.diagnostics.initial_value_errors)
            CHECK(e < 1e-6);
        // phi'' = e^{-3t} - 3 phi' - 2 phi at 0 is 1 - 0 - 2 = -1.
        REQUIRE(sol.diagnostics.predicted_next_derivative.has_value());
        CHECK(close(*sol.diagnostics.predicted_next_derivative, -1.0, 1e-6));
    }
}

TEST_CASE("Barnaby IVP with poles at zeros of the symbol")
{
    const auto f = parse_symbol(barnaby);
    auto zeros = find_zeros(f, {-4.0, -0.01, -3.0, 3.0});
    std::sort(zeros.begin(), zeros.end(),
              [](const ZeroInfo& a, const ZeroInfo& b) { return std::abs(a.zero) < std::abs(b.zero); });
    REQUIRE(zeros.size() >= 2);
    const ClassicalIVP ivp{f, Forcing::zero(), PoleSpec({{zeros[0].zero, 1}, {zeros[1].zero, 1}}), {1.0, 0.0}};
    const auto [sol, r0] = solve_classical_ivp(ivp);
    CHECK(close(sol(0.0), 1.0, 1e-8));
    CHECK(close(sol.derivative(1, 0.0), 0.0, 1e-8));
    const auto t = grid(0.5, 5.0, 19);
    const auto res = residual_check(f, sol, Forcing::zero(), t, 40, 1e-4);
    CHECK(res.passed);
    CHECK(res.sup < 1e-4);
}

TEST_CASE("solution is linear in the forcing")
{
    const auto f = parse_symbol("(s+1)*(s+2)");
    const auto a = solve_generalized(f, Forcing::exp_decay(3.0), GeneralizedIC::zero());
    const auto b = solve_generalized(f, Forcing::exp_decay(3.0, 2.0), GeneralizedIC::zero());
    for (double t : grid(0.0, 10.0, 41))
        CHECK(close(b(t), 2.0 * a(t), 1e-8));
}

TEST_CASE("non-generic pole configuration is refused")
{
    const ClassicalIVP ivp{parse_symbol("(s+1)^3"), Forcing::exp_decay(3.0),
                           PoleSpec({{-1.0, 1}, {Complex(-1.0 - 1e-11, 0.0), 1}}), {1.0, 0.0}};
    try {
        solve_classical_ivp(ivp);
        FAIL("expected refusal");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Singular);
        CHECK(std::string(e.what()).find("non-generic") != std::string::npos);
    }
}

TEST_CASE("IVP needs matching initial data and enough smoothness")
{
    const ClassicalIVP short_data{parse_symbol("(s+1)*(s+2)"), Forcing::zero(), PoleSpec({{-1.0, 1}, {-2.0, 1}}),
                                  {1.0}};
    CHECK_THROWS(solve_classical_ivp(short_data));
    // L(J)/f = (1 - e^{-s})/(s (s+1)) decays like 1/y: M = 0 < K - 1.
    const ClassicalIVP rough{parse_symbol("(s+1)*(s+2)*(s+3)"), Forcing::indicator(0.0, 1.0),
                             PoleSpec({{-1.0, 1}, {-2.0, 1}, {-3.0, 1}}), {1.0, 0.0, 0.0}};
    try {
        solve_classical_ivp(rough);
        FAIL("expected refusal");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Hypothesis);
    }
}

TEST_CASE("zeros of symbols")
{
    {
        auto z = find_zeros(parse_symbol("s^2 + 3*s + 2"), {-3.0, 0.0, -1.0, 1.0});
        REQUIRE(z.size() == 2);
        std::sort(z.begin(), z.end(), [](auto& a, auto& b) { return a.zero.real() > b.zero.real(); });
        CHECK(close(z[0].zero, -1.0, 1e-10));
        CHECK(close(z[1].zero, -2.0, 1e-10));
        CHECK(z[0].multiplicity == 1);
    }
    {
        const auto z = find_zeros(parse_symbol("(s+1)^2"), {-3.0, 0.0, -1.0, 1.0});
        REQUIRE(z.size() == 1);
        CHECK(z[0].multiplicity == 2);
        CHECK(close(z[0].zero, -1.0, 1e-6));
    }
    {
        const auto z = find_zeros(parse_symbol("zeta(s+3)"), {-6.0, -4.0, -1.0, 1.0});
        REQUIRE(z.size() == 1);
        CHECK(close(z[0].zero, -5.0, 1e-8));
    }
    // A zero on the boundary asks for a different rectangle.
    CHECK_THROWS(find_zeros(parse_symbol("s + 1"), {-1.0, 0.0, -1.0, 1.0}));
    CHECK_THROWS(find_zeros(parse_symbol(barnaby), {-4.0, -0.01, -3.0, 3.0}, 3));
}

TEST_CASE("one-sided derivative")
{
    auto phi = [](double t) { return Complex(std::exp(-2.0 * t)); };
    CHECK(close(one_sided_derivative(phi, 0), 1.0, 1e-12));
    CHECK(close(one_sided_derivative(phi, 1), -2.0, 1e-7));
    CHECK(close(one_sided_derivative(phi, 2), 4.0, 1e-5));
}
