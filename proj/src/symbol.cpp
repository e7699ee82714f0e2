#include "nonlocal/symbol.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "nonlocal/series.hpp"

namespace nonlocal {

namespace expr {

    namespace {
        NodePtr make(NodeKind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr)
        {
            auto node = std::make_shared<Node>();
            node->kind = kind;
            node->lhs = std::move(lhs);
            node->rhs = std::move(rhs);
            return node;
        }
    } // namespace

    NodePtr constant(Complex c)
    {
        auto node = std::make_shared<Node>();
        node->kind = NodeKind::Constant;
        node->value = c;
        return node;
    }

    NodePtr variable() { return make(NodeKind::Variable); }
    NodePtr add(NodePtr a, NodePtr b) { return make(NodeKind::Add, std::move(a), std::move(b)); }
    NodePtr subtract(NodePtr a, NodePtr b) { return make(NodeKind::Subtract, std::move(a), std::move(b)); }
    NodePtr multiply(NodePtr a, NodePtr b) { return make(NodeKind::Multiply, std::move(a), std::move(b)); }
    NodePtr divide(NodePtr a, NodePtr b) { return make(NodeKind::Divide, std::move(a), std::move(b)); }
    NodePtr negate(NodePtr a) { return make(NodeKind::Negate, std::move(a)); }
    NodePtr exp(NodePtr a) { return make(NodeKind::Exp, std::move(a)); }

    NodePtr power(NodePtr base, unsigned exponent)
    {
        auto node = std::make_shared<Node>();
        node->kind = NodeKind::Power;
        node->exponent = exponent;
        node->lhs = std::move(base);
        return node;
    }

    NodePtr zeta_shift(double h)
    {
        if (!(h > 1.0))
            throw Error(ErrorKind::Domain, "zeta shift must exceed 1");
        auto node = std::make_shared<Node>();
        node->kind = NodeKind::ZetaShift;
        node->shift = h;
        return node;
    }

} // namespace expr

// ---------------------------------------------------------------------------
// Parser

namespace {

    class Parser {
    public:
        Parser(std::string_view text, std::string_view variable)
            : text_(text), variable_(variable) { }

        NodePtr parse()
        {
            NodePtr node = expression();
            skip_space();
            if (pos_ != text_.size())
                throw SyntaxError(pos_, "unexpected character '" + std::string(1, text_[pos_]) + "'");
            return node;
        }

    private:
        std::string_view text_;
        std::string_view variable_;
        std::size_t pos_ = 0;

        void skip_space()
        {
            while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
        }

        bool accept(char c)
        {
            skip_space();
            if (pos_ < text_.size() && text_[pos_] == c) {
                ++pos_;
                return true;
            }
            return false;
        }

        void expect(char c)
        {
            skip_space();
            if (pos_ >= text_.size())
                throw SyntaxError(pos_, std::string("expected '") + c + "' but reached end of input");
            if (text_[pos_] != c)
                throw SyntaxError(pos_, std::string("expected '") + c + "'");
            ++pos_;
        }

        NodePtr expression()
        {
            NodePtr lhs = term();
            for (;;) {
                if (accept('+'))
                    lhs = expr::add(lhs, term());
                else if (accept('-'))
                    lhs = expr::subtract(lhs, term());
                else
                    return lhs;
            }
        }

        NodePtr term()
        {
            NodePtr lhs = unary();
            for (;;) {
                if (accept('*'))
                    lhs = expr::multiply(lhs, unary());
                else if (accept('/'))
                    lhs = expr::divide(lhs, unary());
                else
                    return lhs;
            }
        }

        NodePtr unary()
        {
            if (accept('-'))
                return expr::negate(unary());
            if (accept('+'))
                return unary();
            return power();
        }

        NodePtr power()
        {
            NodePtr base = atom();
            if (!accept('^'))
                return base;
            skip_space();
            const std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
            if (start == pos_)
                throw SyntaxError(start, "exponent must be a non-negative integer literal");
            unsigned exponent = 0;
            auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, exponent);
            if (ec != std::errc() || exponent > 4096)
                throw SyntaxError(start, "exponent out of range");
            (void)ptr;
            return expr::power(base, exponent);
        }

        std::string identifier()
        {
            const std::size_t start = pos_;
            while (pos_ < text_.size()
                   && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            return std::string(text_.substr(start, pos_ - start));
        }

        NodePtr number()
        {
            const std::size_t start = pos_;
            auto digits = [&] {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            };
            digits();
            if (pos_ < text_.size() && text_[pos_] == '.') {
                ++pos_;
                digits();
            }
            if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
                std::size_t save = pos_;
                ++pos_;
                if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-'))
                    ++pos_;
                if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    digits();
                else
                    pos_ = save;
            }
            const std::string literal(text_.substr(start, pos_ - start));
            if (literal == ".")
                throw SyntaxError(start, "malformed number");
            double value = 0.0;
            try {
                value = std::stod(literal);
            } catch (const std::exception&) {
                throw SyntaxError(start, "malformed number");
            }
            // Imaginary suffix, as in 2.5i, unless it starts a longer identifier.
            if (pos_ < text_.size() && text_[pos_] == 'i'
                && (pos_ + 1 >= text_.size()
                    || !(std::isalnum(static_cast<unsigned char>(text_[pos_ + 1])) || text_[pos_ + 1] == '_'))) {
                ++pos_;
                return expr::constant(Complex(0.0, value));
            }
            return expr::constant(value);
        }

        NodePtr atom()
        {
            skip_space();
            if (pos_ >= text_.size())
                throw SyntaxError(pos_, "unexpected end of input");
            const char c = text_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
                return number();
            if (c == '(') {
                ++pos_;
                NodePtr inner = expression();
                expect(')');
                return inner;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                const std::size_t start = pos_;
                const std::string name = identifier();
                if (name == variable_)
                    return expr::variable();
                if (name == "i")
                    return expr::constant(I);
                if (name == "pi")
                    return expr::constant(pi);
                if (name == "exp") {
                    expect('(');
                    NodePtr arg = expression();
                    expect(')');
                    return expr::exp(arg);
                }
                if (name == "zeta") {
                    expect('(');
                    skip_space();
                    const std::size_t arg_start = pos_;
                    NodePtr arg = expression();
                    expect(')');
                    return zeta_node(arg, arg_start);
                }
                throw SyntaxError(start, "unknown identifier '" + name + "'");
            }
            throw SyntaxError(pos_, "unexpected character '" + std::string(1, c) + "'");
        }

        // zeta(...) accepts only an argument of the form variable + real shift.
        NodePtr zeta_node(const NodePtr& arg, std::size_t offset)
        {
            Complex g0, g1, gi, gz;
            try {
                g0 = evaluate(*arg, 0.0);
                g1 = evaluate(*arg, 1.0);
                gi = evaluate(*arg, I);
                gz = evaluate(*arg, Complex(2.0, 3.0));
            } catch (const Error&) {
                throw SyntaxError(offset, "zeta argument must have the form " + std::string(variable_) + " + h");
            }
            const double tol = 1e-12 * (1.0 + std::abs(g0));
            const bool affine = std::abs(g1 - g0 - 1.0) < tol && std::abs(gi - g0 - I) < tol
                && std::abs(gz - g0 - Complex(2.0, 3.0)) < tol && std::abs(g0.imag()) < tol;
            if (!affine)
                throw SyntaxError(offset, "zeta argument must have the form " + std::string(variable_) + " + h");
            if (!(g0.real() > 1.0))
                throw SyntaxError(offset, "zeta shift must exceed 1");
            return expr::zeta_shift(g0.real());
        }
    };

    // ---------------------------------------------------------------------------
    // Printer

    int precedence(const Node& node)
    {
        switch (node.kind) {
        case NodeKind::Add:
        case NodeKind::Subtract: return 1;
        case NodeKind::Multiply:
        case NodeKind::Divide: return 2;
        case NodeKind::Negate: return 3;
        case NodeKind::Power: return 4;
        case NodeKind::Constant:
            // Negative or complex constants print with a sign, so treat them as sums.
            return (node.value.imag() != 0.0 || std::signbit(node.value.real())) ? 1 : 5;
        default: return 5;
        }
    }

    std::string format_double(double x)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        std::string s(buf);
        if (s.find_first_of(".eEn") == std::string::npos)
            s += ".0";
        return s;
    }

    std::string format_constant(Complex c)
    {
        if (c.imag() == 0.0)
            return format_double(c.real());
        if (c.real() == 0.0)
            return format_double(c.imag()) + "i";
        std::string im = format_double(std::abs(c.imag())) + "i";
        return format_double(c.real()) + (std::signbit(c.imag()) ? "-" : "+") + im;
    }

    void print(const Node& node, std::string_view var, std::string& out)
    {
        auto child = [&](const NodePtr& n, int min_prec) {
            const bool paren = precedence(*n) < min_prec;
            if (paren)
                out += '(';
            print(*n, var, out);
            if (paren)
                out += ')';
        };
        switch (node.kind) {
        case NodeKind::Constant: out += format_constant(node.value); break;
        case NodeKind::Variable: out += var; break;
        case NodeKind::Add:
            child(node.lhs, 1);
            out += " + ";
            child(node.rhs, 2);
            break;
        case NodeKind::Subtract:
            child(node.lhs, 1);
            out += " - ";
            child(node.rhs, 2);
            break;
        case NodeKind::Multiply:
            child(node.lhs, 2);
            out += "*";
            child(node.rhs, 3);
            break;
        case NodeKind::Divide:
            child(node.lhs, 2);
            out += "/";
            child(node.rhs, 3);
            break;
        case NodeKind::Negate:
            out += "-";
            child(node.lhs, 4);
            break;
        case NodeKind::Power:
            child(node.lhs, 5);
            out += "^" + std::to_string(node.exponent);
            break;
        case NodeKind::Exp:
            out += "exp(";
            print(*node.lhs, var, out);
            out += ")";
            break;
        case NodeKind::ZetaShift:
            out += "zeta(";
            out += var;
            out += " + " + format_double(node.shift) + ")";
            break;
        }
    }

    template <typename T>
    T integer_power(T base, unsigned exponent)
    {
        T result(1.0);
        while (exponent > 0) {
            if (exponent & 1u)
                result *= base;
            exponent >>= 1u;
            if (exponent > 0)
                base *= base;
        }
        return result;
    }

    struct Dual {
        Complex value;
        Complex slope;
    };

    Dual evaluate_dual(const Node& node, Complex s)
    {
        switch (node.kind) {
        case NodeKind::Constant: return {node.value, 0.0};
        case NodeKind::Variable: return {s, 1.0};
        case NodeKind::Add: {
            const Dual a = evaluate_dual(*node.lhs, s), b = evaluate_dual(*node.rhs, s);
            return {a.value + b.value, a.slope + b.slope};
        }
        case NodeKind::Subtract: {
            const Dual a = evaluate_dual(*node.lhs, s), b = evaluate_dual(*node.rhs, s);
            return {a.value - b.value, a.slope - b.slope};
        }
        case NodeKind::Multiply: {
            const Dual a = evaluate_dual(*node.lhs, s), b = evaluate_dual(*node.rhs, s);
            return {a.value * b.value, a.slope * b.value + a.value * b.slope};
        }
        case NodeKind::Divide: {
            const Dual a = evaluate_dual(*node.lhs, s), b = evaluate_dual(*node.rhs, s);
            if (b.value == Complex(0.0))
                throw Error(ErrorKind::Domain, "division by zero");
            const Complex q = a.value / b.value;
            return {q, (a.slope - q * b.slope) / b.value};
        }
        case NodeKind::Negate: {
            const Dual a = evaluate_dual(*node.lhs, s);
            return {-a.value, -a.slope};
        }
        case NodeKind::Power: {
            const Dual a = evaluate_dual(*node.lhs, s);
            if (node.exponent == 0)
                return {1.0, 0.0};
            const Complex lower = integer_power(a.value, node.exponent - 1);
            return {lower * a.value, static_cast<double>(node.exponent) * lower * a.slope};
        }
        case NodeKind::Exp: {
            const Dual a = evaluate_dual(*node.lhs, s);
            const Complex e = std::exp(a.value);
            return {e, e * a.slope};
        }
        case NodeKind::ZetaShift: {
            const Complex z = s + node.shift;
            if (z == Complex(1.0, 0.0))
                throw Error(ErrorKind::Pole, "zeta pole at s = " + format_double(1.0 - node.shift));
            return {zeta(z), zeta_derivative(z)};
        }
        }
        return {0.0, 0.0};
    }

    void walk(const NodePtr& node, const std::function<void(const Node&)>& visit)
    {
        if (!node)
            return;
        visit(*node);
        walk(node->lhs, visit);
        walk(node->rhs, visit);
    }

    using Series = series::Series<Complex>;

    Series taylor(const Node& node, Eigen::Index length)
    {
        switch (node.kind) {
        case NodeKind::Constant: return series::constant(node.value, length);
        case NodeKind::Variable: return series::variable<Complex>(length);
        case NodeKind::Add: return taylor(*node.lhs, length) + taylor(*node.rhs, length);
        case NodeKind::Subtract: return taylor(*node.lhs, length) - taylor(*node.rhs, length);
        case NodeKind::Multiply: return series::multiply(taylor(*node.lhs, length), taylor(*node.rhs, length));
        case NodeKind::Divide: {
            const Series den = taylor(*node.rhs, length);
            if (std::abs(den(0)) == 0.0)
                throw Error(ErrorKind::Domain,
                            "taylor: division node whose denominator series has zero constant term");
            return series::divide(taylor(*node.lhs, length), den);
        }
        case NodeKind::Negate: return -taylor(*node.lhs, length);
        case NodeKind::Power: return series::power(taylor(*node.lhs, length), node.exponent);
        case NodeKind::Exp: return series::exp(taylor(*node.lhs, length));
        case NodeKind::ZetaShift: return zeta_shift_taylor(node.shift, static_cast<int>(length) - 1);
        }
        return Series::Zero(length);
    }

} // namespace

NodePtr parse_expression(std::string_view text, std::string_view variable)
{
    return Parser(text, variable).parse();
}

std::string print_expression(const NodePtr& node, std::string_view variable)
{
    std::string out;
    print(*node, variable, out);
    return out;
}

Complex evaluate(const Node& node, Complex s)
{
    switch (node.kind) {
    case NodeKind::Constant: return node.value;
    case NodeKind::Variable: return s;
    case NodeKind::Add: return evaluate(*node.lhs, s) + evaluate(*node.rhs, s);
    case NodeKind::Subtract: return evaluate(*node.lhs, s) - evaluate(*node.rhs, s);
    case NodeKind::Multiply: return evaluate(*node.lhs, s) * evaluate(*node.rhs, s);
    case NodeKind::Divide: {
        const Complex den = evaluate(*node.rhs, s);
        if (den == Complex(0.0))
            throw Error(ErrorKind::Domain, "division by zero");
        return evaluate(*node.lhs, s) / den;
    }
    case NodeKind::Negate: return -evaluate(*node.lhs, s);
    case NodeKind::Power: return integer_power(evaluate(*node.lhs, s), node.exponent);
    case NodeKind::Exp: return std::exp(evaluate(*node.lhs, s));
    case NodeKind::ZetaShift: {
        const Complex z = s + node.shift;
        if (z == Complex(1.0, 0.0))
            throw Error(ErrorKind::Pole, "zeta pole at s = " + format_double(1.0 - node.shift));
        return zeta(z);
    }
    }
    return 0.0;
}

std::pair<Complex, Complex> evaluate_with_derivative(const Node& node, Complex s)
{
    const Dual d = evaluate_dual(node, s);
    return {d.value, d.slope};
}

AnalyticSymbol::AnalyticSymbol(NodePtr root)
    : root_(std::move(root))
{
    if (!root_)
        throw Error(ErrorKind::Domain, "empty symbol");
    double min_zeta_radius = std::numeric_limits<double>::infinity();
    double zeta_abscissa = -std::numeric_limits<double>::infinity();
    walk(root_, [&](const Node& n) {
        switch (n.kind) {
        case NodeKind::ZetaShift:
            has_zeta_ = true;
            entire_ = false;
            polynomial_ = false;
            min_zeta_radius = std::min(min_zeta_radius, n.shift - 1.0);
            zeta_abscissa = std::max(zeta_abscissa, 1.0 - n.shift);
            break;
        case NodeKind::Divide:
            has_division_ = true;
            entire_ = false;
            polynomial_ = false;
            break;
        case NodeKind::Exp: polynomial_ = false; break;
        default: break;
        }
    });
    if (has_division_) {
        // Denominator zeros are not known statically: declared analytic on the
        // right half-plane, verified by the diagnostics.
        abscissa_ = 0.0;
        radius_.reset();
    } else {
        abscissa_ = has_zeta_ ? zeta_abscissa : -std::numeric_limits<double>::infinity();
        radius_ = min_zeta_radius;
    }
}

std::vector<NodePtr> AnalyticSymbol::denominators() const
{
    std::vector<NodePtr> out;
    std::function<void(const NodePtr&)> rec = [&](const NodePtr& n) {
        if (!n)
            return;
        if (n->kind == NodeKind::Divide)
            out.push_back(n->rhs);
        rec(n->lhs);
        rec(n->rhs);
    };
    rec(root_);
    return out;
}

VectorXc zeta_shift_taylor(double h, int n_max, int nodes)
{
    if (!(h > 1.0))
        throw Error(ErrorKind::Domain, "zeta shift must exceed 1");
    const double radius = 0.5 * std::min(1.0, h - 1.0);
    std::vector<Complex> values(static_cast<std::size_t>(nodes));
    for (int j = 0; j < nodes; ++j) {
        const Complex w = std::polar(1.0, 2.0 * pi * j / nodes);
        values[static_cast<std::size_t>(j)] = zeta(h + radius * w);
    }
    VectorXc c(n_max + 1);
    for (int n = 0; n <= n_max; ++n) {
        Complex acc = 0.0;
        for (int j = 0; j < nodes; ++j)
            acc += values[static_cast<std::size_t>(j)] * std::polar(1.0, -2.0 * pi * static_cast<double>(j) * n / nodes);
        c(n) = acc / (static_cast<double>(nodes) * std::pow(radius, n));
    }
    return c;
}

VectorXc taylor_coefficients(const AnalyticSymbol& f, int n_max, int series_cap)
{
    if (n_max < 0)
        throw Error(ErrorKind::Domain, "taylor: negative order");
    if (n_max > series_cap)
        throw Error(ErrorKind::Domain, "taylor: requested order " + std::to_string(n_max)
                                           + " exceeds the series cap " + std::to_string(series_cap));
    return taylor(*f.root(), n_max + 1);
}

DataSequence DataSequence::finite(std::vector<Complex> values)
{
    DataSequence d;
    d.values_ = std::move(values);
    return d;
}

DataSequence DataSequence::geometric(Complex first, Complex ratio)
{
    if (!(std::abs(ratio) < 1.0))
        throw Error(ErrorKind::Domain, "geometric data sequence requires |ratio| < 1");
    DataSequence d;
    d.values_ = {first};
    d.ratio_ = ratio;
    return d;
}

Complex DataSequence::operator[](std::size_t j) const
{
    if (ratio_)
        return values_.front() * std::pow(*ratio_, static_cast<double>(j));
    return j < values_.size() ? values_[j] : Complex(0.0);
}

double DataSequence::growth_radius() const
{
    if (ratio_)
        return std::abs(*ratio_);
    // A finite list stands for the leading terms of a sequence; estimate the
    // root-test limit from its second half.
    const std::size_t n = values_.size();
    double radius = 0.0;
    for (std::size_t j = std::max<std::size_t>(1, n / 2); j < n; ++j) {
        const double m = std::abs(values_[j]);
        if (m > 0.0)
            radius = std::max(radius, std::pow(m, 1.0 / static_cast<double>(j)));
    }
    return radius;
}

RSeriesResult build_r_series(const VectorXc& taylor, const DataSequence& d, Complex s, int n_trunc)
{
    if (n_trunc < 1)
        throw Error(ErrorKind::Domain, "r-series: truncation order must be positive");
    if (taylor.size() < n_trunc + 1)
        throw Error(ErrorKind::Dimension, "r-series: not enough Taylor coefficients");
    RSeriesResult result;
    result.data_radius = d.growth_radius();
    result.data_admissible = result.data_radius < 1.0;

    Complex inner = 0.0; // sum_{j=1}^{n} d_{j-1} s^{n-j}
    Complex sum = 0.0;
    int quiet = 0;
    for (int n = 1; n <= n_trunc; ++n) {
        inner = s * inner + d[static_cast<std::size_t>(n - 1)];
        const Complex previous = sum;
        sum += taylor(n) * inner;
        result.terms = n;
        const double scale = std::max(std::abs(sum), std::numeric_limits<double>::min());
        quiet = (std::abs(sum - previous) <= 1e-12 * scale) ? quiet + 1 : 0;
        if (quiet >= 2 && n >= 3) {
            result.converged = true;
            break;
        }
    }
    result.value = sum;
    return result;
}

RSeriesResult build_r_series(const AnalyticSymbol& f, const DataSequence& d, Complex s, int n_trunc)
{
    if (auto radius = f.taylor_radius_hint(); radius && !(std::abs(s) < *radius))
        throw Error(ErrorKind::Domain, "r-series: |s| must lie inside the Taylor radius of f");
    return build_r_series(taylor_coefficients(f, n_trunc), d, s, n_trunc);
}

} // namespace nonlocal
