#ifndef NONLOCAL_SYMBOL_HPP
#define NONLOCAL_SYMBOL_HPP

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nonlocal/core.hpp"
#include "nonlocal/special_functions.hpp"

namespace nonlocal {

enum class NodeKind { Constant, Variable, Add, Subtract, Multiply, Divide, Negate, Power, Exp, ZetaShift };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// Immutable expression-tree node. `value` is used by Constant, `exponent` by
/// Power, `shift` by ZetaShift (whose argument is always variable + shift).
struct Node {
    NodeKind kind = NodeKind::Constant;
    Complex value{};
    unsigned exponent = 0;
    double shift = 0.0;
    NodePtr lhs;
    NodePtr rhs;
};

namespace expr {
    NodePtr constant(Complex c);
    NodePtr variable();
    NodePtr add(NodePtr a, NodePtr b);
    NodePtr subtract(NodePtr a, NodePtr b);
    NodePtr multiply(NodePtr a, NodePtr b);
    NodePtr divide(NodePtr a, NodePtr b);
    NodePtr negate(NodePtr a);
    NodePtr power(NodePtr base, unsigned exponent);
    NodePtr exp(NodePtr a);
    NodePtr zeta_shift(double h);
} // namespace expr

/// Parses the infix grammar
///
///   expr   := term (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := '-' unary | '+' unary | power
///   power  := atom ('^' integer)?
///   atom   := number | 'i' | 'pi' | <variable> | '(' expr ')'
///           | 'exp' '(' expr ')' | 'zeta' '(' <variable> '+' real ')'
///
/// with a configurable variable name. Numbers may carry an 'i' suffix (2.5i).
/// Throws SyntaxError with the offending offset; a zeta shift <= 1 is
/// rejected with "shift must exceed 1".
NodePtr parse_expression(std::string_view text, std::string_view variable = "s");

/// Prints a tree in the same grammar; parse(print(tree)) evaluates identically.
std::string print_expression(const NodePtr& node, std::string_view variable = "s");

/// Value of the tree at a point. Throws ErrorKind::Domain / Pole where a node
/// is undefined (division by zero, zeta pole).
Complex evaluate(const Node& node, Complex s);

/// Value and first derivative (forward-mode differentiation).
std::pair<Complex, Complex> evaluate_with_derivative(const Node& node, Complex s);

/// Analytic symbol f(s): an expression tree in the variable s plus its declared
/// analyticity half-plane Re(s) > analyticity_abscissa and, when known, the
/// radius of convergence of its Taylor series at 0.
class AnalyticSymbol {
public:
    static constexpr int default_series_cap = 128;

    AnalyticSymbol() = default;
    explicit AnalyticSymbol(NodePtr root);

    static AnalyticSymbol parse(std::string_view text) { return AnalyticSymbol(parse_expression(text, "s")); }

    const NodePtr& root() const { return root_; }
    double analyticity_abscissa() const { return abscissa_; }
    std::optional<double> taylor_radius_hint() const { return radius_; }
    void set_taylor_radius_hint(std::optional<double> r) { radius_ = r; }

    bool is_entire() const { return entire_; }
    bool contains_zeta() const { return has_zeta_; }
    bool contains_division() const { return has_division_; }
    /// True when the tree is built only from constants, s, +, -, * and ^.
    bool is_polynomial() const { return polynomial_; }

    Complex operator()(Complex s) const { return evaluate(*root_, s); }
    std::pair<Complex, Complex> value_and_derivative(Complex s) const
    {
        return evaluate_with_derivative(*root_, s);
    }

    std::string to_string() const { return print_expression(root_, "s"); }

    /// Denominator subtrees of every division node.
    std::vector<NodePtr> denominators() const;

private:
    NodePtr root_;
    double abscissa_ = 0.0;
    std::optional<double> radius_;
    bool entire_ = true;
    bool has_zeta_ = false;
    bool has_division_ = false;
    bool polynomial_ = true;
};

inline AnalyticSymbol parse_symbol(std::string_view text) { return AnalyticSymbol::parse(text); }

inline Complex eval_symbol(const AnalyticSymbol& f, Complex s) { return f(s); }

/// Taylor coefficients c_0..c_{n_max} of f at 0, c_n = f^{(n)}(0)/n!, by exact
/// power-series arithmetic on the tree; zeta-shift nodes use trapezoidal
/// Cauchy quadrature (256 nodes, radius 0.5 min(1, h-1)).
VectorXc taylor_coefficients(const AnalyticSymbol& f, int n_max,
                             int series_cap = AnalyticSymbol::default_series_cap);

/// Taylor coefficients of zeta(s + h) at 0 by Cauchy quadrature.
VectorXc zeta_shift_taylor(double h, int n_max, int nodes = 256);

/// Data sequence d_0, d_1, ... for the r-series: either a finite list (zero
/// beyond its end) or a geometric sequence d_j = first * ratio^j, |ratio| < 1.
class DataSequence {
public:
    static DataSequence finite(std::vector<Complex> values);
    static DataSequence geometric(Complex first, Complex ratio);

    Complex operator[](std::size_t j) const;
    bool is_geometric() const { return ratio_.has_value(); }
    std::optional<Complex> ratio() const { return ratio_; }
    const std::vector<Complex>& values() const { return values_; }

    /// Root-test estimate of limsup |d_j|^{1/j}: the radius R outside which
    /// sum_j d_{j-1} s^{-j} converges.
    double growth_radius() const;

private:
    std::vector<Complex> values_;
    std::optional<Complex> ratio_;
};

struct RSeriesResult {
    Complex value{};
    int terms = 0;
    bool converged = false;       // three successive partial sums agree to 1e-12 relative
    bool data_admissible = false; // growth radius of d below 1
    double data_radius = 0.0;

    bool flagged() const { return !converged || !data_admissible; }
};

/// Truncated r-series sum_{n=1}^{n_trunc} sum_{j=1}^{n} c_n d_{j-1} s^{n-j}.
RSeriesResult build_r_series(const AnalyticSymbol& f, const DataSequence& d, Complex s, int n_trunc = 60);

/// Same with precomputed Taylor coefficients (length >= n_trunc + 1).
RSeriesResult build_r_series(const VectorXc& taylor, const DataSequence& d, Complex s, int n_trunc);

} // namespace nonlocal

#endif
