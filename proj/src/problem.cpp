#include "nonlocal/problem.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/SVD>

#include "nonlocal/oracles.hpp"

namespace nonlocal {

namespace {

    std::string_view trim(std::string_view s)
    {
        const auto first = s.find_first_not_of(" \t\r");
        if (first == std::string_view::npos)
            return {};
        const auto last = s.find_last_not_of(" \t\r");
        return s.substr(first, last - first + 1);
    }

    std::vector<std::string_view> words(std::string_view s)
    {
        std::vector<std::string_view> out;
        std::size_t i = 0;
        while (i < s.size()) {
            while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == ','))
                ++i;
            std::size_t j = i;
            while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != ',')
                ++j;
            if (j > i)
                out.push_back(s.substr(i, j - i));
            i = j;
        }
        return out;
    }

    Error config_error(int line, const std::string& message)
    {
        if (line <= 0)
            return Error(ErrorKind::Config, message);
        return Error(ErrorKind::Config, "line " + std::to_string(line) + ": " + message);
    }

    double to_double(std::string_view w, int line, std::string_view what)
    {
        double v = 0.0;
        // from_chars rejects a leading '+'.
        if (!w.empty() && w.front() == '+')
            w.remove_prefix(1);
        const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
        if (ec != std::errc() || ptr != w.data() + w.size() || !std::isfinite(v))
            throw config_error(line, "invalid number '" + std::string(w) + "' for " + std::string(what));
        return v;
    }

    int to_int(std::string_view w, int line, std::string_view what)
    {
        int v = 0;
        const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
        if (ec != std::errc() || ptr != w.data() + w.size())
            throw config_error(line, "invalid integer '" + std::string(w) + "' for " + std::string(what));
        return v;
    }

    Mode parse_mode(std::string_view v, int line)
    {
        if (v == "generalized")
            return Mode::Generalized;
        if (v == "classical-ivp")
            return Mode::ClassicalIVP;
        if (v == "poles-given")
            return Mode::PolesGiven;
        if (v == "diagnose")
            return Mode::Diagnose;
        throw config_error(line, "unknown mode '" + std::string(v)
                                     + "' (expected generalized, classical-ivp, poles-given or diagnose)");
    }

    std::string num(double v)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6e", v);
        return buf;
    }

    std::string num(Complex v)
    {
        return num(v.real()) + " " + num(v.imag());
    }

    Forcing build_forcing(const ProblemConfig& cfg)
    {
        if (cfg.forcing && cfg.forcing_builtin)
            throw Error(ErrorKind::Config, "give either forcing or forcing_builtin, not both");
        if (cfg.forcing)
            return Forcing::from_text(*cfg.forcing);
        if (!cfg.forcing_builtin)
            return Forcing::zero();
        const auto w = words(*cfg.forcing_builtin);
        if (w.empty())
            throw Error(ErrorKind::Config, "forcing_builtin is empty");
        auto arg = [&](std::size_t i) { return to_double(w[i], 0, "forcing_builtin"); };
        auto arity = [&](std::size_t lo, std::size_t hi) {
            if (w.size() - 1 < lo || w.size() - 1 > hi)
                throw Error(ErrorKind::Config, "forcing_builtin " + std::string(w[0]) + ": wrong number of parameters");
        };
        if (w[0] == "zero") {
            arity(0, 0);
            return Forcing::zero();
        }
        if (w[0] == "exp_decay") {
            arity(1, 2);
            return Forcing::exp_decay(arg(1), w.size() > 2 ? arg(2) : 1.0);
        }
        if (w[0] == "t_power_exp") {
            arity(2, 3);
            const int m = to_int(w[1], 0, "t_power_exp power");
            if (m < 0)
                throw Error(ErrorKind::Config, "t_power_exp power must be non-negative");
            return Forcing::t_power_exp(static_cast<unsigned>(m), arg(2), w.size() > 3 ? arg(3) : 1.0);
        }
        if (w[0] == "indicator") {
            arity(2, 2);
            return Forcing::indicator(arg(1), arg(2));
        }
        throw Error(ErrorKind::Config, "unknown forcing_builtin '" + std::string(w[0])
                                           + "' (expected exp_decay, t_power_exp, indicator or zero)");
    }

    std::optional<GeneralizedIC> build_r(const ProblemConfig& cfg, const AnalyticSymbol& f)
    {
        if (cfg.r && cfg.r_data)
            throw Error(ErrorKind::Config, "give either r or r_data, not both");
        if (cfg.r)
            return GeneralizedIC::from_symbol(parse_symbol(*cfg.r));
        if (!cfg.r_data)
            return std::nullopt;
        const auto w = words(*cfg.r_data);
        if (w.empty())
            throw Error(ErrorKind::Config, "r_data is empty");
        if (w[0] == "geometric") {
            if (w.size() != 3)
                throw Error(ErrorKind::Config, "r_data geometric needs: first ratio");
            const double first = to_double(w[1], 0, "r_data"), ratio = to_double(w[2], 0, "r_data");
            if (!(std::abs(ratio) < 1.0))
                throw Error(ErrorKind::Hypothesis, "r_data: geometric ratio must satisfy |ratio| < 1");
            return GeneralizedIC::from_data(f, DataSequence::geometric(first, ratio), cfg.r_terms);
        }
        if (w[0] == "finite") {
            std::vector<Complex> d;
            for (std::size_t i = 1; i < w.size(); ++i)
                d.emplace_back(to_double(w[i], 0, "r_data"));
            return GeneralizedIC::from_data(f, DataSequence::finite(std::move(d)), cfg.r_terms);
        }
        throw Error(ErrorKind::Config, "r_data must start with 'geometric' or 'finite'");
    }

    // Transform whose inversion is the Bromwich part in the configured mode.
    ComplexFunction bromwich_transform(const Problem& p, Mode mode)
    {
        const ComplexFunction LJ = laplace_function(p.J);
        const AnalyticSymbol f = p.f;
        if (mode == Mode::Generalized && p.r) {
            const ComplexFunction r = p.r->r;
            return [LJ, r, f](Complex s) { return (LJ(s) + r(s)) / f(s); };
        }
        return [LJ, f](Complex s) { return LJ(s) / f(s); };
    }

    std::vector<double> subsample(const std::vector<double>& grid, int count)
    {
        if (count <= 0 || grid.empty())
            return {};
        if (static_cast<int>(grid.size()) <= count)
            return grid;
        if (count == 1)
            return {grid.front()};
        std::vector<double> out;
        for (int i = 0; i < count; ++i) {
            const auto idx = static_cast<std::size_t>(std::llround(
                static_cast<double>(i) * static_cast<double>(grid.size() - 1) / (count - 1)));
            out.push_back(grid[idx]);
        }
        return out;
    }

    int residual_order(const AnalyticSymbol& f, int requested)
    {
        if (!f.is_polynomial())
            return requested;
        const VectorXc c = taylor_coefficients(f, 32);
        int m = 0;
        for (int k = 0; k < c.size(); ++k)
            if (c(k) != Complex(0.0))
                m = k;
        return std::min(m, requested);
    }

    // Rectangles are offset slightly so that zeros on the imaginary axis or
    // at integers do not land on an edge.
    const Rectangle right_half_box{-0.0371, 20.3, -20.17, 20.29};
    const Rectangle right_half_open_box{0.0137, 4.3, -4.17, 4.29};

} // namespace

const char* to_string(Mode mode)
{
    switch (mode) {
    case Mode::Generalized: return "generalized";
    case Mode::ClassicalIVP: return "classical-ivp";
    case Mode::PolesGiven: return "poles-given";
    case Mode::Diagnose: return "diagnose";
    }
    return "?";
}

void ProblemConfig::validate() const
{
    if (symbol.empty())
        throw Error(ErrorKind::Config, "missing required field 'symbol'");
    if (!(t_start >= 0.0))
        throw Error(ErrorKind::Config, "t_start must be >= 0");
    if (n_points < 1)
        throw Error(ErrorKind::Config, "n_points must be at least 1");
    if (n_points > 1 && !(t_end > t_start))
        throw Error(ErrorKind::Config, "t_end must exceed t_start");
    if (residual_terms < 0 || residual_points < 0)
        throw Error(ErrorKind::Config, "residual_terms and residual_points must be non-negative");
    try {
        bromwich.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::Config, e.what());
    }
}

std::vector<double> ProblemConfig::grid() const
{
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n_points));
    if (n_points == 1) {
        out.push_back(t_start);
        return out;
    }
    for (int i = 0; i < n_points; ++i)
        out.push_back(t_start + (t_end - t_start) * i / (n_points - 1));
    return out;
}

ProblemConfig parse_config(std::string_view text)
{
    ProblemConfig cfg;
    enum class Section { None, Poles, Initial } section = Section::None;
    bool have_mode = false;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;

        if (line.front() == '[') {
            if (line == "[poles]") {
                section = Section::Poles;
                cfg.has_poles = true;
            } else if (line == "[initial]") {
                section = Section::Initial;
                cfg.has_initial = true;
            } else {
                throw config_error(line_no, "unknown section " + std::string(line));
            }
            continue;
        }

        if (const auto eq = line.find('='); eq != std::string_view::npos) {
            const std::string key(trim(line.substr(0, eq)));
            const std::string_view value = trim(line.substr(eq + 1));
            if (value.empty())
                throw config_error(line_no, "empty value for '" + key + "'");
            if (key == "mode") {
                cfg.mode = parse_mode(value, line_no);
                have_mode = true;
            } else if (key == "symbol") {
                cfg.symbol = value;
            } else if (key == "forcing") {
                cfg.forcing = std::string(value);
            } else if (key == "forcing_builtin") {
                cfg.forcing_builtin = std::string(value);
            } else if (key == "r") {
                cfg.r = std::string(value);
            } else if (key == "r_data") {
                cfg.r_data = std::string(value);
            } else if (key == "r_terms") {
                cfg.r_terms = to_int(value, line_no, key);
            } else if (key == "sigma") {
                cfg.bromwich.sigma = to_double(value, line_no, key);
            } else if (key == "y_max") {
                cfg.bromwich.y_max = to_double(value, line_no, key);
            } else if (key == "tol") {
                cfg.bromwich.quad_tol = to_double(value, line_no, key);
            } else if (key == "max_subdivisions") {
                cfg.bromwich.max_subdivisions = to_int(value, line_no, key);
            } else if (key == "t_start") {
                cfg.t_start = to_double(value, line_no, key);
            } else if (key == "t_end") {
                cfg.t_end = to_double(value, line_no, key);
            } else if (key == "n_points") {
                cfg.n_points = to_int(value, line_no, key);
            } else if (key == "grid") {
                apply_grid_override(cfg, value);
            } else if (key == "residual_terms") {
                cfg.residual_terms = to_int(value, line_no, key);
            } else if (key == "residual_points") {
                cfg.residual_points = to_int(value, line_no, key);
            } else if (key == "csv") {
                cfg.csv = std::string(value);
            } else if (key == "report") {
                cfg.report = std::string(value);
            } else {
                throw config_error(line_no, "unknown key '" + key + "'");
            }
            continue;
        }

        const auto w = words(line);
        switch (section) {
        case Section::Poles: {
            if (w.size() != 3)
                throw config_error(line_no, "pole lines are 're im order'");
            const int order = to_int(w[2], line_no, "pole order");
            if (order < 1)
                throw config_error(line_no, "pole order must be a positive integer");
            cfg.poles.push_back({Complex(to_double(w[0], line_no, "pole"), to_double(w[1], line_no, "pole")), order});
            break;
        }
        case Section::Initial:
            if (w.empty() || w.size() > 2)
                throw config_error(line_no, "initial value lines are 're [im]'");
            cfg.initial.emplace_back(to_double(w[0], line_no, "initial value"),
                                     w.size() > 1 ? to_double(w[1], line_no, "initial value") : 0.0);
            break;
        case Section::None:
            throw config_error(line_no, "expected 'key = value'");
        }
    }
    if (!have_mode)
        throw config_error(0, "missing required field 'mode'");
    return cfg;
}

ProblemConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::Io, "cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void apply_grid_override(ProblemConfig& cfg, std::string_view spec)
{
    const auto a = spec.find(':');
    const auto b = a == std::string_view::npos ? a : spec.find(':', a + 1);
    if (b == std::string_view::npos)
        throw Error(ErrorKind::Config, "grid must be t0:t1:n");
    cfg.t_start = to_double(trim(spec.substr(0, a)), 0, "grid");
    cfg.t_end = to_double(trim(spec.substr(a + 1, b - a - 1)), 0, "grid");
    cfg.n_points = to_int(trim(spec.substr(b + 1)), 0, "grid");
}

Problem build_problem(const ProblemConfig& cfg)
{
    cfg.validate();
    Problem p;
    p.f = parse_symbol(cfg.symbol);
    p.J = build_forcing(cfg);
    p.r = build_r(cfg, p.f);
    p.poles = PoleSpec(cfg.poles);
    p.initial = cfg.initial;
    switch (cfg.mode) {
    case Mode::ClassicalIVP:
        if (!cfg.has_poles || cfg.poles.empty())
            throw Error(ErrorKind::Config, "classical-ivp mode requires a [poles] section");
        if (!cfg.has_initial || cfg.initial.empty())
            throw Error(ErrorKind::Config, "classical-ivp mode requires an [initial] section (initial values)");
        if (cfg.r || cfg.r_data)
            throw Error(ErrorKind::Config, "classical-ivp mode constructs r itself; remove r / r_data");
        break;
    case Mode::PolesGiven:
        if (!cfg.has_poles || cfg.poles.empty())
            throw Error(ErrorKind::Config, "poles-given mode requires a [poles] section");
        if (!p.r)
            throw Error(ErrorKind::Config, "poles-given mode requires r or r_data");
        break;
    case Mode::Generalized:
        if (cfg.has_poles || cfg.has_initial)
            throw Error(ErrorKind::Config, "generalized mode takes no [poles] or [initial] section");
        break;
    case Mode::Diagnose:
        break;
    }
    return p;
}

std::string format_solution_csv(const Solution& sol, const std::vector<double>& grid)
{
    std::string out = "t,phi_re,phi_im,bromwich_re,bromwich_im,residue_re,residue_im\n";
    char buf[256];
    for (double t : grid) {
        const Complex b = sol.bromwich_part(t);
        const Complex r = sol.residue_part(t);
        const Complex phi = b + r;
        std::snprintf(buf, sizeof buf, "%.16e,%.16e,%.16e,%.16e,%.16e,%.16e,%.16e\n", t, phi.real(), phi.imag(),
                      b.real(), b.imag(), r.real(), r.imag());
        out += buf;
    }
    return out;
}

RunResult run_problem(const ProblemConfig& cfg)
{
    if (cfg.mode == Mode::Diagnose)
        throw Error(ErrorKind::Config, "mode = diagnose: use the diagnose command");
    const Problem p = build_problem(cfg);
    const BromwichConfig& bc = cfg.bromwich;

    RunResult out;
    std::optional<GeneralizedIC> constructed;
    switch (cfg.mode) {
    case Mode::Generalized:
        out.solution = solve_generalized(p.f, p.J, p.r ? *p.r : GeneralizedIC::zero(), bc);
        break;
    case Mode::PolesGiven:
        out.solution = solve_with_poles(p.f, p.J, *p.r, p.poles, bc);
        break;
    case Mode::ClassicalIVP: {
        auto [sol, r0] = solve_classical_ivp(ClassicalIVP{p.f, p.J, p.poles, p.initial}, bc);
        out.solution = std::move(sol);
        constructed = std::move(r0);
        break;
    }
    case Mode::Diagnose:
        break;
    }
    const Solution& sol = out.solution;
    const std::vector<double> grid = cfg.grid();
    out.csv = format_solution_csv(sol, grid);

    Diagnostics diag = sol.diagnostics;
    std::ostringstream rep;
    rep << "mode: " << to_string(cfg.mode) << "\n";
    rep << "symbol: " << p.f.to_string() << "\n";
    rep << "forcing: " << p.J.description << "\n";
    if (constructed)
        rep << "r0: " << constructed->description << "\n";
    rep << "sigma: " << num(bc.sigma) << "\n";
    rep << "y_max: " << num(bc.y_max) << "\n";
    rep << "tol: " << num(bc.quad_tol) << "\n";

    if (diag.hardy) {
        rep << "hardy_p: 2\n";
        for (std::size_t i = 0; i < diag.hardy->x_grid.size(); ++i)
            rep << "hardy_mu[x=" << diag.hardy->x_grid[i] << "]: " << num(diag.hardy->norms[i].value) << "\n";
        rep << "hardy_sup: " << num(diag.hardy->supremum) << "\n";
        rep << "hardy_bounded: " << (diag.hardy->bounded ? "yes" : "no") << "\n";
    }
    if (!diag.smoothness && sol.inverter() && !sol.inverter()->identically_zero()) {
        const BromwichInverter& inv = *sol.inverter();
        diag.smoothness = smoothness_order([&inv](Complex s) { return inv.transform(s); }, bc.sigma,
                                           cfg.residual_terms, bc.y_max);
    }
    if (diag.smoothness) {
        rep << "smoothness_order: " << diag.smoothness->order << "\n";
        rep << "smoothness_alpha: " << num(diag.smoothness->alpha) << "\n";
        rep << "smoothness_entire_decay: " << (diag.smoothness->entire_decay ? "yes" : "no") << "\n";
    } else {
        rep << "smoothness_order: none (no Bromwich part)\n";
    }
    if (diag.decay && diag.decay->ok)
        rep << "decay_q: " << num(diag.decay->q) << "\n";
    rep << "condition_number: " << (diag.condition_number ? num(*diag.condition_number) : std::string("n/a")) << "\n";
    for (std::size_t n = 0; n < diag.initial_value_errors.size(); ++n)
        rep << "initial_value_error[" << n << "]: " << num(diag.initial_value_errors[n]) << "\n";
    if (diag.predicted_next_derivative)
        rep << "predicted_next_derivative: " << num(*diag.predicted_next_derivative) << "\n";
    if (diag.jacobian_deviation)
        rep << "jacobian_deviation: " << num(*diag.jacobian_deviation) << "\n";

    const auto residual_grid = subsample(grid, cfg.residual_points);
    if (!residual_grid.empty()) {
        const int N = residual_order(p.f, cfg.residual_terms);
        const auto res = residual_check(p.f, sol, p.J, residual_grid, N);
        rep << "residual_points: " << residual_grid.size() << "\n";
        rep << "residual_terms: " << res.terms << "\n";
        if (res.bromwich_order >= 0)
            rep << "residual_bromwich_order: " << res.bromwich_order << "\n";
        rep << "residual_sup: " << num(res.sup) << "\n";
        rep << "residual_passed: " << (res.passed ? "yes" : "no") << "\n";
        for (const auto& w : res.warnings)
            diag.warnings.push_back("residual: " + w);
    }
    for (const auto& w : diag.warnings)
        rep << "warning: " << w << "\n";
    out.report = rep.str();
    return out;
}

std::vector<DiagnoseRow> diagnose(const ProblemConfig& cfg)
{
    const Problem p = build_problem(cfg);
    const BromwichConfig& bc = cfg.bromwich;
    std::vector<DiagnoseRow> rows;
    auto row = [&](std::string check, bool pass, std::string detail) {
        rows.push_back({std::move(check), pass, std::move(detail)});
    };
    // Treat the config's mode, or the shape of the data for mode = diagnose.
    Mode mode = cfg.mode;
    if (mode == Mode::Diagnose)
        mode = cfg.has_initial ? Mode::ClassicalIVP : cfg.has_poles ? Mode::PolesGiven : Mode::Generalized;

    // Analyticity of f on Re(s) > 0: zeta shifts are checked by the parser,
    // division nodes by locating zeros of their denominators.
    {
        bool ok = true;
        std::string detail = "no denominator zeros with Re(s) >= 0";
        if (p.f.analyticity_abscissa() > 0.0) {
            ok = false;
            detail = "declared analytic only for Re(s) > " + num(p.f.analyticity_abscissa());
        }
        for (const auto& den : p.f.denominators()) {
            if (!ok)
                break;
            try {
                for (const auto& z : find_zeros(AnalyticSymbol(den), right_half_box))
                    if (z.zero.real() > -1e-8) {
                        ok = false;
                        detail = "denominator vanishes at s = " + num(z.zero);
                        break;
                    }
            } catch (const Error& e) {
                ok = false;
                detail = std::string("denominator zeros not certified: ") + e.what();
            }
        }
        row("analyticity of f on Re(s) > 0", ok, detail);
    }

    // f must not vanish on the contour.
    {
        double smallest = std::numeric_limits<double>::infinity(), largest = 0.0;
        bool finite = true;
        for (int j = 0; j <= 2000; ++j) {
            const double y = -bc.y_max + bc.y_max * j / 1000.0;
            try {
                const double m = std::abs(p.f(Complex(bc.sigma, y)));
                smallest = std::min(smallest, m);
                largest = std::max(largest, m);
            } catch (const Error&) {
                finite = false;
            }
        }
        const bool ok = finite && smallest > 1e-12 * std::max(1.0, largest);
        row("f nonzero on Re(s) = sigma", ok, "min |f| = " + num(smallest));
    }

    {
        ForcingCheck fc;
        try {
            fc = verify_forcing(p.J);
        } catch (const Error& e) {
            fc.ok = false;
            fc.message = e.what();
        }
        row("forcing Laplace-transformable", fc.ok,
            fc.ok ? "tail " + num(fc.tail_estimate) : fc.message);
    }

    if (mode == Mode::ClassicalIVP || mode == Mode::PolesGiven) {
        try {
            p.poles.validate();
            row("poles valid (Re < 0, pairwise distinct)", true, "K = " + std::to_string(p.poles.K()));
        } catch (const Error& e) {
            row("poles valid (Re < 0, pairwise distinct)", false, e.what());
        }
    }

    const ComplexFunction F = bromwich_transform(p, mode);
    const bool trivial = p.J.identically_zero && !(mode == Mode::Generalized && p.r);
    bool hardy_ok = true;
    if (trivial) {
        row("Hardy H^2 of Bromwich transform", true, "transform is zero");
    } else {
        try {
            const auto h = hardy_membership(F, 2.0, standard_hardy_grid(), bc.y_max);
            hardy_ok = h.bounded;
            std::string detail = "sup mu_2 = " + num(h.supremum) + " over x in {0.01, 0.1, 1, 10}";
            if (!h.bounded)
                detail = h.reason;
            row("Hardy H^2 of Bromwich transform", h.bounded, detail);
        } catch (const Error& e) {
            hardy_ok = false;
            row("Hardy H^2 of Bromwich transform", false, e.what());
        }
    }

    // Zeros of f in the right half-plane must be cancelled in the transform.
    if (!trivial) {
        bool ok = true;
        std::string detail = "no zeros of f in the sampled right half-plane box";
        try {
            const auto zeros = find_zeros(p.f, right_half_open_box);
            for (const auto& z : zeros) {
                double near = 0.0, far = 0.0;
                for (int k = 0; k < 8; ++k) {
                    const Complex u = std::polar(1.0, 2.0 * pi * (k + 0.5) / 8.0);
                    near = std::max(near, std::abs(F(z.zero + 1e-4 * u)));
                    far = std::max(far, std::abs(F(z.zero + 1e-1 * u)));
                }
                if (!(near <= 1e2 * far)) {
                    ok = false;
                    detail = "transform has a pole at the zero s = " + num(z.zero) + " of f";
                    break;
                }
            }
            if (ok && !zeros.empty())
                detail = std::to_string(zeros.size()) + " zero(s) of f in Re(s) > 0, all removable";
        } catch (const Error& e) {
            ok = false;
            detail = std::string("zeros of f not certified: ") + e.what();
        }
        row("transform analytic on Re(s) > 0", ok, detail);
    }

    std::optional<int> M;
    if (!trivial && hardy_ok) {
        const int K = mode == Mode::ClassicalIVP ? p.poles.K() : 0;
        try {
            const auto order = smoothness_order(F, bc.sigma, std::max(K + 2, 8), bc.y_max);
            M = order.order;
            std::string detail = "M = " + std::to_string(order.order) + ", alpha = " + num(order.alpha);
            if (!order.fit_ok)
                detail += " (" + order.warning + ")";
            if (mode == Mode::ClassicalIVP) {
                const bool ok = order.order >= K - 1;
                row("smoothness order M >= K - 1", ok, detail + ", K = " + std::to_string(K));
            } else {
                row("smoothness order", order.fit_ok, detail);
            }
        } catch (const Error& e) {
            row("smoothness order", false, e.what());
        }
    }

    if (p.r) {
        const ComplexFunction r = p.r->r;
        const AnalyticSymbol f = p.f;
        const auto fit = decay_fit([r, f](Complex s) { return r(s) / f(s); });
        row("decay of r/f at infinity", fit.ok && fit.q > 0.0,
            fit.ok ? "|r/f| ~ C |s|^-q, q = " + num(fit.q) : fit.note);
    }

    if (mode == Mode::ClassicalIVP) {
        const int K = p.poles.K();
        const bool count_ok = static_cast<int>(p.initial.size()) == K;
        row("initial value count equals K", count_ok,
            std::to_string(p.initial.size()) + " given, K = " + std::to_string(K));
        bool poles_ok = true;
        try {
            p.poles.validate();
        } catch (const Error&) {
            poles_ok = false;
        }
        if (count_ok && poles_ok && hardy_ok && (trivial || (M && *M >= K - 1))) {
            try {
                std::vector<Complex> Ln(static_cast<std::size_t>(K), Complex(0.0));
                if (!trivial) {
                    std::vector<int> ns(static_cast<std::size_t>(K));
                    for (int n = 0; n < K; ++n)
                        ns[static_cast<std::size_t>(n)] = n;
                    Ln = compute_Ln(F, ns, bc);
                }
                const auto [A, b] = assemble_ivp_system(ClassicalIVP{p.f, p.J, p.poles, p.initial}, Ln);
                Eigen::JacobiSVD<MatrixXc> svd(A);
                const auto& sv = svd.singularValues();
                const double cond = sv(K - 1) > 0.0 ? sv(0) / sv(K - 1) : std::numeric_limits<double>::infinity();
                row("pole system condition number < 1e10", cond < max_condition_number, "cond = " + num(cond));
            } catch (const Error& e) {
                row("pole system condition number < 1e10", false, e.what());
            }
        }
    }
    return rows;
}

std::string format_diagnose_table(const std::vector<DiagnoseRow>& rows)
{
    std::size_t width = 5;
    for (const auto& r : rows)
        width = std::max(width, r.check.size());
    std::ostringstream os;
    for (const auto& r : rows) {
        os << (r.pass ? "PASS  " : "FAIL  ") << r.check << std::string(width - r.check.size() + 2, ' ')
           << r.detail << "\n";
    }
    return os.str();
}

int exit_code(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Syntax:
    case ErrorKind::Config:
    case ErrorKind::Io:
    case ErrorKind::Dimension:
        return 1;
    default:
        return 2;
    }
}

} // namespace nonlocal
