#ifndef NONLOCAL_CORE_HPP
#define NONLOCAL_CORE_HPP

#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace nonlocal {

using Complex = std::complex<double>;
using ComplexFunction = std::function<Complex(Complex)>;
using TimeFunction = std::function<Complex(double)>;

using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;

inline constexpr double pi = std::numbers::pi;
inline constexpr Complex I{0.0, 1.0};

enum class ErrorKind {
    Syntax,
    Domain,
    Pole,
    Convergence,
    Hypothesis,
    Singular,
    Dimension,
    Config,
    Io,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library. `kind()` tells callers (the CLI in
/// particular) which class of failure happened; the message carries detail.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) { }

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

/// Syntax error raised by the expression parser; `offset()` is the 0-based
/// character offset into the input text.
class SyntaxError : public Error {
public:
    SyntaxError(std::size_t offset, const std::string& message)
        : Error(ErrorKind::Syntax, message + " at offset " + std::to_string(offset)),
          offset_(offset) { }

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

} // namespace nonlocal

#endif
