#include <algorithm>
#include <cmath>
#include <functional>

#include "nonlocal/quadrature.hpp"
#include "nonlocal/solver.hpp"

namespace nonlocal {

namespace {

    struct Finder {
        const AnalyticSymbol& f;
        int max_zeros;
        double size = 1.0; // |f| <= 1e-9 |f'| size on a boundary counts as a zero there
        std::vector<ZeroInfo> found;

        Complex value(Complex z) const
        {
            const Complex v = f(z);
            if (!is_finite(v))
                throw Error(ErrorKind::Domain, "find_zeros: f is not finite inside the rectangle");
            return v;
        }

        // Boundary sample; a zero within about 1e-9 of the cell size is fatal.
        Complex boundary_value(Complex z) const
        {
            const auto [v, dv] = f.value_and_derivative(z);
            if (!is_finite(v))
                throw Error(ErrorKind::Domain, "find_zeros: f is not finite inside the rectangle");
            if (std::abs(v) <= 1e-9 * std::abs(dv) * size || v == Complex(0.0))
                throw Error(ErrorKind::Domain,
                            "find_zeros: zero on or near the rectangle boundary; perturb the rectangle");
            return v;
        }

        double arg_change(Complex za, Complex fa, Complex zb, Complex fb, int depth) const
        {
            const double d = std::arg(fb / fa);
            if (std::abs(d) < 0.5 || depth > 40)
                return d;
            const Complex zm = 0.5 * (za + zb);
            const Complex fm = boundary_value(zm);
            return arg_change(za, fa, zm, fm, depth + 1) + arg_change(zm, fm, zb, fb, depth + 1);
        }

        // Winding number of f around the rectangle boundary.
        int winding(const Rectangle& r) const
        {
            const std::array<Complex, 5> corners = {
                Complex(r.re_min, r.im_min), Complex(r.re_max, r.im_min), Complex(r.re_max, r.im_max),
                Complex(r.re_min, r.im_max), Complex(r.re_min, r.im_min)};
            constexpr int steps = 32;
            double total = 0.0;
            for (int e = 0; e < 4; ++e) {
                Complex za = corners[e];
                Complex fa = boundary_value(za);
                for (int k = 1; k <= steps; ++k) {
                    const Complex zb = corners[e] + (corners[e + 1] - corners[e]) * (k / double(steps));
                        const Complex fb = boundary_value(zb);
                    total += arg_change(za, fa, zb, fb, 0);
                    za = zb;
                    fa = fb;
                }
            }
            const double w = total / (2.0 * pi);
            if (std::abs(w - std::round(w)) > 0.1)
                throw Error(ErrorKind::Domain,
                            "find_zeros: non-integer winding number; perturb the rectangle");
            return static_cast<int>(std::lround(w));
        }

        // (1/2 pi i) oint z^k f'/f dz over the rectangle boundary, k = 1, 2.
        std::pair<Complex, Complex> power_sums(const Rectangle& r) const
        {
            const std::array<Complex, 5> corners = {
                Complex(r.re_min, r.im_min), Complex(r.re_max, r.im_min), Complex(r.re_max, r.im_max),
                Complex(r.re_min, r.im_max), Complex(r.re_min, r.im_min)};
            Complex s1 = 0.0, s2 = 0.0;
            for (int e = 0; e < 4; ++e) {
                const Complex a = corners[e], d = corners[e + 1] - corners[e];
                auto integrand = [&](double u) {
                    const Complex z = a + u * d;
                    const auto [v, dv] = f.value_and_derivative(z);
                    return Eigen::Vector2cd(z * dv / v * d, z * z * dv / v * d);
                };
                // Integrate both moments on a shared panel set.
                auto first = [&](double u) { return integrand(u)(0); };
                auto second = [&](double u) { return integrand(u)(1); };
                s1 += quad::integrate(first, 0.0, 1.0, 1e-12, 1e-12, 400).value;
                s2 += quad::integrate(second, 0.0, 1.0, 1e-12, 1e-12, 400).value;
            }
            const Complex norm = 2.0 * pi * I;
            return {s1 / norm, s2 / norm};
        }

        // Centroid (1/(2 pi i m)) oint z f'/f dz on a circle, and its winding.
        std::pair<Complex, int> circle_centroid(Complex c, double radius) const
        {
            constexpr int nodes = 512;
            Complex s0 = 0.0, s1 = 0.0;
            for (int j = 0; j < nodes; ++j) {
                const Complex u = std::polar(radius, 2.0 * pi * j / nodes);
                const auto [v, dv] = f.value_and_derivative(c + u);
                // dz = i u dtheta; (1/2 pi i) * (2 pi / nodes) * i u = u / nodes
                s0 += dv / v * u;
                s1 += (c + u) * dv / v * u;
            }
            s0 /= double(nodes);
            s1 /= double(nodes);
            const int m = static_cast<int>(std::lround(s0.real()));
            return {m > 0 ? s1 / double(m) : c, m};
        }

        Complex newton(Complex z, const Rectangle& r) const
        {
            const double slack = 0.1 * std::max(r.re_max - r.re_min, r.im_max - r.im_min);
            for (int it = 0; it < 60; ++it) {
                const auto [v, dv] = f.value_and_derivative(z);
                if (v == Complex(0.0))
                    return z;
                if (dv == Complex(0.0))
                    break;
                const Complex step = v / dv;
                z -= step;
                if (z.real() < r.re_min - slack || z.real() > r.re_max + slack
                    || z.imag() < r.im_min - slack || z.imag() > r.im_max + slack)
                    throw Error(ErrorKind::Convergence, "find_zeros: Newton left the cell");
                if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(z)))
                    break;
            }
            return z;
        }

        void add(Complex z, int m)
        {
            found.push_back({z, m});
            int total = 0;
            for (const auto& zi : found)
                total += zi.multiplicity;
            if (total > max_zeros)
                throw Error(ErrorKind::Domain, "find_zeros: zero count exceeds the cap");
        }

        void resolve_single(const Rectangle& r)
        {
            const auto [s1, s2] = power_sums(r);
            (void)s2;
            Complex z = s1;
            try {
                z = newton(s1, r);
            } catch (const Error&) {
                z = newton(Complex(0.5 * (r.re_min + r.re_max), 0.5 * (r.im_min + r.im_max)), r);
            }
            add(z, 1);
        }

        void search(const Rectangle& r, int count, int depth)
        {
            if (count <= 0)
                return;
            if (count == 1) {
                resolve_single(r);
                return;
            }
            const double width = r.re_max - r.re_min, height = r.im_max - r.im_min;
            // A cluster whose power sums satisfy s2 = m c^2 is one zero of multiplicity m.
            const auto [s1, s2] = power_sums(r);
            const Complex c = s1 / double(count);
            const double spread = std::abs(s2 / double(count) - c * c);
            const double size = std::max(width, height);
            if (spread < 1e-6 * size * size || depth > 48) {
                double radius = 0.25 * std::min(width, height);
                auto [centre, m] = circle_centroid(c, radius);
                if (m == count) {
                    // Tighten once around the centroid for accuracy.
                    auto [refined, m2] = circle_centroid(centre, 0.5 * radius);
                    add(m2 == count ? refined : centre, count);
                    return;
                }
            }
            for (double frac : {0.5, 0.4637, 0.5371, 0.4211, 0.5789}) {
                Rectangle a = r, b = r;
                if (width >= height) {
                    const double cut = r.re_min + frac * width;
                    a.re_max = cut;
                    b.re_min = cut;
                } else {
                    const double cut = r.im_min + frac * height;
                    a.im_max = cut;
                    b.im_min = cut;
                }
                int ca = 0, cb = 0;
                try {
                    ca = winding(a);
                    cb = winding(b);
                } catch (const Error&) {
                    continue;
                }
                if (ca + cb != count)
                    continue;
                search(a, ca, depth + 1);
                search(b, cb, depth + 1);
                return;
            }
            throw Error(ErrorKind::Convergence, "find_zeros: could not separate the zeros in a cell");
        }
    };

} // namespace

std::vector<ZeroInfo> find_zeros(const AnalyticSymbol& f, const Rectangle& rect, int max_zeros)
{
    if (!(rect.re_max > rect.re_min && rect.im_max > rect.im_min))
        throw Error(ErrorKind::Domain, "find_zeros: empty rectangle");
    Finder finder{f, max_zeros, std::max(rect.re_max - rect.re_min, rect.im_max - rect.im_min), {}};
    const int count = finder.winding(rect);
    if (count > max_zeros)
        throw Error(ErrorKind::Domain, "find_zeros: zero count exceeds the cap");
    finder.search(rect, count, 0);
    std::sort(finder.found.begin(), finder.found.end(), [](const ZeroInfo& a, const ZeroInfo& b) {
        return a.zero.real() != b.zero.real() ? a.zero.real() > b.zero.real() : a.zero.imag() < b.zero.imag();
    });
    return finder.found;
}

} // namespace nonlocal
