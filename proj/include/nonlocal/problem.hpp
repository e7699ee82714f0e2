#ifndef NONLOCAL_PROBLEM_HPP
#define NONLOCAL_PROBLEM_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nonlocal/core.hpp"
#include "nonlocal/solver.hpp"

namespace nonlocal {

enum class Mode { Generalized, ClassicalIVP, PolesGiven, Diagnose };

const char* to_string(Mode mode);

/// Problem description read from a config file:
///
///   mode = classical-ivp
///   symbol = (s+1)*(s+2)
///   forcing = exp(-3*t)          # or: forcing_builtin = exp_decay 3
///   t_start = 0
///   t_end = 10
///   n_points = 101
///   [poles]
///   -1 0 1                       # re im order
///   [initial]
///   1                            # re [im]
///
/// Lines containing '=' are always key-value pairs, so keys may follow a
/// section. '#' starts a comment.
struct ProblemConfig {
    Mode mode = Mode::Generalized;
    std::string symbol;
    std::optional<std::string> forcing;         // expression in t
    std::optional<std::string> forcing_builtin; // "exp_decay rate [amp]", "t_power_exp m rate [amp]", "indicator a b", "zero"
    std::optional<std::string> r;               // expression in s
    std::optional<std::string> r_data;          // "geometric first ratio" or "finite d0 d1 ..."
    int r_terms = 60;
    std::vector<Pole> poles;
    bool has_poles = false;
    std::vector<Complex> initial;
    bool has_initial = false;
    BromwichConfig bromwich;
    double t_start = 0.0;
    double t_end = 10.0;
    int n_points = 101;
    int residual_terms = 40;
    int residual_points = 11;
    std::optional<std::string> csv;    // output paths; relative to the working directory
    std::optional<std::string> report;

    /// Grid checks and Bromwich settings; throws ErrorKind::Config.
    void validate() const;
    std::vector<double> grid() const;
};

/// Throws ErrorKind::Config (with line number) on malformed input.
ProblemConfig parse_config(std::string_view text);
/// Throws ErrorKind::Io when the file cannot be read.
ProblemConfig load_config(const std::filesystem::path& path);

/// "t0:t1:n"
void apply_grid_override(ProblemConfig& cfg, std::string_view spec);

/// Parsed objects of a config.
struct Problem {
    AnalyticSymbol f;
    Forcing J;
    std::optional<GeneralizedIC> r;
    PoleSpec poles;
    std::vector<Complex> initial;
};

/// Parses symbol, forcing and r; checks mode-specific required fields.
Problem build_problem(const ProblemConfig& cfg);

struct RunResult {
    Solution solution;
    std::string csv;
    std::string report;
};

/// Solves in the configured mode (Diagnose is rejected here) and formats the
/// CSV and the text report.
RunResult run_problem(const ProblemConfig& cfg);

struct DiagnoseRow {
    std::string check;
    bool pass = false;
    std::string detail;
};

/// Hypothesis checks only, no solve. Parse and config errors propagate.
std::vector<DiagnoseRow> diagnose(const ProblemConfig& cfg);
std::string format_diagnose_table(const std::vector<DiagnoseRow>& rows);

/// 0 ok, 1 for syntax / config / I/O / dimension errors, 2 otherwise.
int exit_code(ErrorKind kind);

/// `t,phi_re,phi_im,bromwich_re,bromwich_im,residue_re,residue_im` with
/// values in %.16e.
std::string format_solution_csv(const Solution& sol, const std::vector<double>& grid);

} // namespace nonlocal

#endif
