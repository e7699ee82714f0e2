#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nonlocal/problem.hpp"

using namespace nonlocal;

namespace {

struct Overrides {
    std::optional<double> sigma, ymax, tol;
    std::optional<std::string> grid, csv, report;
};

void apply(ProblemConfig& cfg, const Overrides& o)
{
    if (o.sigma)
        cfg.bromwich.sigma = *o.sigma;
    if (o.ymax)
        cfg.bromwich.y_max = *o.ymax;
    if (o.tol)
        cfg.bromwich.quad_tol = *o.tol;
    if (o.grid)
        apply_grid_override(cfg, *o.grid);
    if (o.csv)
        cfg.csv = *o.csv;
    if (o.report)
        cfg.report = *o.report;
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text) || !out.flush())
        throw Error(ErrorKind::Io, "cannot write " + path);
}

int report_error(const Error& e)
{
    const int code = exit_code(e.kind());
    if (code == 2)
        std::cerr << "hypothesis failed (" << to_string(e.kind()) << "): " << e.what() << "\n";
    else
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return code;
}

int run_diagnose(const ProblemConfig& cfg)
{
    const auto rows = diagnose(cfg);
    std::cout << format_diagnose_table(rows);
    for (const auto& r : rows)
        if (!r.pass)
            return 2;
    return 0;
}

int run_solve(const ProblemConfig& cfg)
{
    if (cfg.mode == Mode::Diagnose)
        return run_diagnose(cfg);
    const RunResult result = run_problem(cfg);
    if (cfg.csv)
        write_file(*cfg.csv, result.csv);
    else
        std::cout << result.csv;
    if (cfg.report)
        write_file(*cfg.report, result.report);
    else
        (cfg.csv ? std::cout : std::cerr) << result.report;
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Solver for linear nonlocal equations f(d/dt) phi = J on t >= 0"};
    app.require_subcommand(1);

    Overrides o;
    std::string config_path;
    auto add_overrides = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "Problem config file")->required();
        sub->add_option("--sigma", o.sigma, "Bromwich abscissa");
        sub->add_option("--ymax", o.ymax, "Bromwich truncation half-width");
        sub->add_option("--tol", o.tol, "Quadrature tolerance");
        sub->add_option("--grid", o.grid, "Output grid t0:t1:n");
    };
    CLI::App* solve = app.add_subcommand("solve", "Solve and write the CSV and the report");
    add_overrides(solve);
    solve->add_option("--csv", o.csv, "CSV output path (default: config value, else stdout)");
    solve->add_option("--report", o.report, "Report output path");
    CLI::App* diag = app.add_subcommand("diagnose", "Check the hypotheses without solving");
    add_overrides(diag);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        ProblemConfig cfg = load_config(config_path);
        apply(cfg, o);
        cfg.validate();
        return solve->parsed() ? run_solve(cfg) : run_diagnose(cfg);
    } catch (const Error& e) {
        return report_error(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
