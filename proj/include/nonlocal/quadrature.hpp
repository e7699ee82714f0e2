#ifndef NONLOCAL_QUADRATURE_HPP
#define NONLOCAL_QUADRATURE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include "nonlocal/core.hpp"

namespace nonlocal::quad {

/// 21-point Gauss-Kronrod rule on [-1, 1]: abscissae x_0 > ... > x_10 = 0
/// (odd indices are the embedded 10-point Gauss nodes).
struct GaussKronrod21 {
    static const std::array<double, 11> nodes;
    static const std::array<double, 11> kronrod_weights;
    static const std::array<double, 5> gauss_weights; // for nodes 1, 3, 5, 7, 9
};

template <typename Value>
struct PanelEstimate {
    Value value{};
    double error = 0.0;
    double absolute = 0.0; // integral of |f| over the panel
};

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(Complex z) { return std::abs(z); }

/// QUADPACK-style error estimate from |K21 - G10| and the integral of |f - mean|.
double scaled_error(double raw, double resasc, double resabs);

/// One GK21 panel on [a, b] from 21 precomputed samples, ordered as
/// f(c - h x_0), ..., f(c - h x_9), f(c), f(c + h x_9), ..., f(c + h x_0).
template <typename Value>
PanelEstimate<Value> gk21_from_samples(std::span<const Value, 21> f, double a, double b)
{
    const double half = 0.5 * (b - a);
    const auto& wk = GaussKronrod21::kronrod_weights;
    const auto& wg = GaussKronrod21::gauss_weights;
    Value kronrod = wk[10] * f[10];
    Value gauss{};
    double resabs = wk[10] * magnitude(f[10]);
    for (int j = 0; j < 10; ++j) {
        const Value pair = f[j] + f[20 - j];
        kronrod += wk[j] * pair;
        resabs += wk[j] * (magnitude(f[j]) + magnitude(f[20 - j]));
        if (j % 2 == 1)
            gauss += wg[j / 2] * pair;
    }
    const Value mean = kronrod * 0.5;
    double resasc = wk[10] * magnitude(f[10] - mean);
    for (int j = 0; j < 10; ++j)
        resasc += wk[j] * (magnitude(f[j] - mean) + magnitude(f[20 - j] - mean));
    PanelEstimate<Value> out;
    out.value = kronrod * half;
    out.error = scaled_error(magnitude((kronrod - gauss) * half), resasc * std::abs(half),
                             resabs * std::abs(half));
    out.absolute = resabs * std::abs(half);
    return out;
}

/// Abscissae of the GK21 rule on [a, b] in the order expected by gk21_from_samples.
std::array<double, 21> gk21_abscissae(double a, double b);

template <typename Function>
auto gk21(const Function& f, double a, double b)
{
    using Value = decltype(f(a));
    const auto x = gk21_abscissae(a, b);
    std::array<Value, 21> samples;
    for (int j = 0; j < 21; ++j)
        samples[j] = f(x[j]);
    return gk21_from_samples<Value>(std::span<const Value, 21>(samples), a, b);
}

template <typename Value>
struct Result {
    Value value{};
    double error = 0.0;
    int intervals = 0;
    bool converged = false;
};

/// Globally adaptive GK21 on [a, b]: bisects the panel with the largest error
/// until the total error is below max(abs_tol, rel_tol |I|) or `max_intervals`
/// panels exist.
template <typename Function>
auto integrate(const Function& f, double a, double b, double abs_tol, double rel_tol = 0.0,
               int max_intervals = 2000)
{
    using Value = decltype(f(a));
    struct Panel {
        double a, b;
        PanelEstimate<Value> est;
        bool operator<(const Panel& other) const { return est.error < other.est.error; }
    };
    std::priority_queue<Panel> heap;
    Panel first{a, b, gk21(f, a, b)};
    Value total = first.est.value;
    double error = first.est.error;
    heap.push(first);
    Result<Value> out;
    while (true) {
        const double target = std::max(abs_tol, rel_tol * magnitude(total));
        if (error <= target) {
            out.converged = true;
            break;
        }
        if (static_cast<int>(heap.size()) >= max_intervals)
            break;
        Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) { // interval exhausted at machine precision
            heap.push(worst);
            break;
        }
        Panel left{worst.a, mid, gk21(f, worst.a, mid)};
        Panel right{mid, worst.b, gk21(f, mid, worst.b)};
        total += left.est.value + right.est.value - worst.est.value;
        error += left.est.error + right.est.error - worst.est.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to avoid drift from the incremental updates.
    Value sum{};
    double err = 0.0;
    out.intervals = static_cast<int>(heap.size());
    while (!heap.empty()) {
        sum += heap.top().est.value;
        err += heap.top().est.error;
        heap.pop();
    }
    out.value = sum;
    out.error = err;
    return out;
}

/// Integral over [a, inf) by the substitution y = a + (1 - u) / u, u in (0, 1].
template <typename Function>
auto integrate_to_infinity(const Function& f, double a, double abs_tol, double rel_tol = 0.0,
                           int max_intervals = 2000)
{
    using Value = decltype(f(a));
    auto mapped = [&](double u) -> Value {
        if (u <= 0.0)
            return Value{};
        const double y = a + (1.0 - u) / u;
        return f(y) * (1.0 / (u * u));
    };
    return integrate(mapped, 0.0, 1.0, abs_tol, rel_tol, max_intervals);
}

/// Wynn epsilon extrapolation of a sequence of partial sums. Returns the best
/// estimate of the limit and an error estimate from the last two
/// extrapolations.
template <typename Value>
PanelEstimate<Value> wynn_epsilon(std::span<const Value> partial_sums)
{
    PanelEstimate<Value> out;
    const std::size_t n = partial_sums.size();
    if (n == 0)
        return out;
    if (n < 3) {
        out.value = partial_sums.back();
        out.error = n == 2 ? magnitude(partial_sums[1] - partial_sums[0])
                           : std::numeric_limits<double>::infinity();
        return out;
    }
    // Columns of the epsilon table: eps_{-1} = 0, eps_0 = S. Even columns hold
    // extrapolations; pick the one whose last two entries agree best.
    std::vector<Value> previous(n + 1, Value{});
    std::vector<Value> current(partial_sums.begin(), partial_sums.end());
    out.value = current.back();
    out.error = magnitude(current[n - 1] - current[n - 2]);
    for (std::size_t k = 1; current.size() > 1; ++k) {
        std::vector<Value> next(current.size() - 1);
        bool ok = true;
        for (std::size_t i = 0; i + 1 < current.size(); ++i) {
            const Value diff = current[i + 1] - current[i];
            if (magnitude(diff) < 1e-300) {
                ok = false;
                break;
            }
            next[i] = previous[i + 1] + Value(1.0) / diff;
        }
        if (!ok)
            break;
        previous = std::move(current);
        current = std::move(next);
        if (k % 2 == 0 && current.size() >= 2) {
            const double err = magnitude(current.back() - current[current.size() - 2]);
            if (err < out.error) {
                out.value = current.back();
                out.error = err;
            }
        }
    }
    return out;
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

} // namespace nonlocal::quad

#endif
