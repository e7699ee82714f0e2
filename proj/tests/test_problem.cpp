#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "nonlocal/problem.hpp"
#include "test_util.hpp"

using namespace nonlocal;
using test::close;

namespace {

ErrorKind kind_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Domain;
}

const char* ivp_text = R"(# comment line
mode = classical-ivp
symbol = (s+1)*(s+2)
forcing = exp(-3*t)   # trailing comment
t_end = 5
n_points = 11

[poles]
-1 0 1
-2 0 1

[initial]
1
0
)";

} // namespace

TEST_CASE("parse a classical IVP config")
{
    const auto cfg = parse_config(ivp_text);
    CHECK(cfg.mode == Mode::ClassicalIVP);
    CHECK(cfg.symbol == "(s+1)*(s+2)");
    REQUIRE(cfg.forcing.has_value());
    CHECK(*cfg.forcing == "exp(-3*t)");
    REQUIRE(cfg.poles.size() == 2);
    CHECK(close(cfg.poles[1].omega, -2.0, 0.0));
    CHECK(cfg.poles[1].order == 1);
    REQUIRE(cfg.initial.size() == 2);
    const auto g = cfg.grid();
    REQUIRE(g.size() == 11);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == doctest::Approx(5.0));
}

TEST_CASE("config errors")
{
    CHECK(kind_of([] { parse_config("symbol = s\n"); }) == ErrorKind::Config);
    CHECK(kind_of([] { parse_config("mode = sideways\nsymbol = s\n"); }) == ErrorKind::Config);
    CHECK(kind_of([] { parse_config("mode = generalized\nwat = 3\n"); }) == ErrorKind::Config);
    CHECK(kind_of([] { parse_config("mode = generalized\nsymbol = s\n[poles]\n-1 zero 1\n"); }) == ErrorKind::Config);
    CHECK(kind_of([] { parse_config("mode = generalized\nsymbol = s\nn_points = 0\n").validate(); })
          == ErrorKind::Config);
    CHECK(kind_of([] { parse_config("mode = generalized\nsymbol = s\nt_start = -1\n").validate(); })
          == ErrorKind::Config);
    CHECK(kind_of([] { load_config("/nonexistent/problem.cfg"); }) == ErrorKind::Io);
    // Parse errors in the symbol surface when the problem is built.
    CHECK(kind_of([] { build_problem(parse_config("mode = generalized\nsymbol = s +\nforcing = exp(-t)\n")); })
          == ErrorKind::Syntax);
}

TEST_CASE("mode-specific requirements")
{
    auto ivp = parse_config(ivp_text);
    ivp.initial.pop_back();
    // The count is checked against K by the solver, so diagnose can report it.
    CHECK(kind_of([&] { run_problem(ivp); }) == ErrorKind::Dimension);

    auto no_initial = parse_config(ivp_text);
    no_initial.initial.clear();
    no_initial.has_initial = false;
    CHECK(kind_of([&] { build_problem(no_initial); }) == ErrorKind::Config);

    CHECK(kind_of([] {
              build_problem(parse_config("mode = poles-given\nsymbol = s+1\nforcing_builtin = zero\n[poles]\n-1 0 1\n"));
          })
          == ErrorKind::Config);
    CHECK(kind_of([] {
              build_problem(parse_config("mode = generalized\nsymbol = s+1\nforcing_builtin = zero\n[poles]\n-1 0 1\n"));
          })
          == ErrorKind::Config);
}

TEST_CASE("forcing builtins and r data")
{
    const auto p = build_problem(parse_config("mode = generalized\nsymbol = exp(s)\n"
                                              "forcing_builtin = t_power_exp 1 2 3\nr_data = geometric 1 -0.5\n"));
    CHECK(close(p.J(1.5), 3.0 * 1.5 * std::exp(-3.0), 1e-15));
    REQUIRE(p.r.has_value());
    // d_0 (f(s) - f(rho)) / (s - rho) at s = 1, rho = -1/2
    CHECK(close(p.r->r(1.0), (std::exp(1.0) - std::exp(-0.5)) / 1.5, 1e-10));

    const auto q = build_problem(parse_config("mode = generalized\nsymbol = s+1\nforcing_builtin = indicator 0 2\n"));
    CHECK(close(q.J(1.0), 1.0, 0.0));
    CHECK(close(q.J(3.0), 0.0, 0.0));
    CHECK_THROWS(build_problem(parse_config("mode = generalized\nsymbol = s+1\nforcing_builtin = sawtooth 1\n")));
}

TEST_CASE("grid override")
{
    auto cfg = parse_config(ivp_text);
    apply_grid_override(cfg, "1:3:5");
    const auto g = cfg.grid();
    REQUIRE(g.size() == 5);
    CHECK(g[0] == 1.0);
    CHECK(g[2] == doctest::Approx(2.0));
    CHECK_THROWS(apply_grid_override(cfg, "1:3"));
    CHECK_THROWS(apply_grid_override(cfg, "a:b:c"));
}

TEST_CASE("run a classical IVP end to end")
{
    const auto result = run_problem(parse_config(ivp_text));
    std::istringstream csv(result.csv);
    std::string header;
    std::getline(csv, header);
    CHECK(header == "t,phi_re,phi_im,bromwich_re,bromwich_im,residue_re,residue_im");
    int rows = 0;
    for (std::string line; std::getline(csv, line);)
        rows += line.empty() ? 0 : 1;
    CHECK(rows == 11);
    for (const char* field : {"mode", "smoothness_order", "condition_number", "initial_value_error[0]",
                              "residual_sup", "residual_passed", "hardy_bounded"}) {
        CAPTURE(field);
        CHECK(result.report.find(field) != std::string::npos);
    }
    CHECK(close(result.solution(0.0), 1.0, 1e-8));
}

TEST_CASE("diagnose tables")
{
    const auto pass = diagnose(parse_config("mode = diagnose\nsymbol = zeta(s+3)\nforcing_builtin = exp_decay 1\n"));
    CHECK(std::all_of(pass.begin(), pass.end(), [](const DiagnoseRow& r) { return r.pass; }));
    const auto table = format_diagnose_table(pass);
    CHECK(table.find("PASS") != std::string::npos);
    CHECK(table.find("FAIL") == std::string::npos);

    const auto fail = diagnose(parse_config("mode = diagnose\nsymbol = 1/(s)\nforcing_builtin = exp_decay 1\n"));
    CHECK(std::any_of(fail.begin(), fail.end(), [](const DiagnoseRow& r) { return !r.pass; }));
}

TEST_CASE("exit codes")
{
    CHECK(exit_code(ErrorKind::Syntax) == 1);
    CHECK(exit_code(ErrorKind::Config) == 1);
    CHECK(exit_code(ErrorKind::Io) == 1);
    CHECK(exit_code(ErrorKind::Dimension) == 1);
    for (auto k : {ErrorKind::Hypothesis, ErrorKind::Pole, ErrorKind::Singular, ErrorKind::Convergence,
                   ErrorKind::Domain})
        CHECK(exit_code(k) == 2);
}
