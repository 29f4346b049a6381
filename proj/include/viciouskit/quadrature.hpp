#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace viciouskit::quadrature {

struct Rule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// Gauss-Legendre nodes by Newton iteration on P_n.
inline Rule make_gauss_legendre(std::size_t n) {
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    return r;
}

inline const Rule& gauss_legendre_32() {
    static const Rule rule = make_gauss_legendre(32);
    return rule;
}

template <typename F>
double gauss_legendre_panel(F&& f, double a, double b, const Rule& rule) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(c + h * rule.nodes[i]);
    return s * h;
}

namespace detail {
template <typename F>
double adaptive_gl(F& f, double a, double b, double whole, double tol, int depth, const Rule& rule) {
    const double m = 0.5 * (a + b);
    const double left = gauss_legendre_panel(f, a, m, rule);
    const double right = gauss_legendre_panel(f, m, b, rule);
    const double sum = left + right;
    if (depth <= 0 || std::abs(sum - whole) <= tol) return sum;
    return adaptive_gl(f, a, m, left, 0.5 * tol, depth - 1, rule) +
           adaptive_gl(f, m, b, right, 0.5 * tol, depth - 1, rule);
}
}  // namespace detail

// Composite 32-point Gauss-Legendre with bisection until halves agree to `tol`.
template <typename F>
double integrate_gauss_legendre(F&& f, double a, double b, double tol = 1e-12, int max_depth = 30) {
    if (a == b) return 0.0;
    const Rule& rule = gauss_legendre_32();
    const double whole = gauss_legendre_panel(f, a, b, rule);
    return detail::adaptive_gl(f, a, b, whole, tol, max_depth, rule);
}

// Tensor 32x32 Gauss-Legendre on [x0,x1] x [y0,y1] with dyadic (quad-tree)
// subdivision until the four-child sum agrees with the parent to `tol`.
template <typename F>
double integrate_rectangle(F&& f, double x0, double x1, double y0, double y1, double tol = 1e-11,
                           int max_depth = 12) {
    const Rule& rule = gauss_legendre_32();
    auto panel = [&](double a0, double a1, double b0, double b1) {
        const double cx = 0.5 * (a0 + a1), hx = 0.5 * (a1 - a0);
        const double cy = 0.5 * (b0 + b1), hy = 0.5 * (b1 - b0);
        double s = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double x = cx + hx * rule.nodes[i];
            double row = 0.0;
            for (std::size_t j = 0; j < rule.nodes.size(); ++j) row += rule.weights[j] * f(x, cy + hy * rule.nodes[j]);
            s += rule.weights[i] * row;
        }
        return s * hx * hy;
    };
    std::function<double(double, double, double, double, double, double, int)> refine =
        [&](double a0, double a1, double b0, double b1, double whole, double t, int depth) -> double {
        const double am = 0.5 * (a0 + a1), bm = 0.5 * (b0 + b1);
        const double q[4] = {panel(a0, am, b0, bm), panel(am, a1, b0, bm), panel(a0, am, bm, b1),
                             panel(am, a1, bm, b1)};
        const double sum = q[0] + q[1] + q[2] + q[3];
        if (depth <= 0 || std::abs(sum - whole) <= t) return sum;
        const double tq = 0.25 * t;
        return refine(a0, am, b0, bm, q[0], tq, depth - 1) + refine(am, a1, b0, bm, q[1], tq, depth - 1) +
               refine(a0, am, bm, b1, q[2], tq, depth - 1) + refine(am, a1, bm, b1, q[3], tq, depth - 1);
    };
    if (x0 == x1 || y0 == y1) return 0.0;
    const double whole = panel(x0, x1, y0, y1);
    return refine(x0, x1, y0, y1, whole, tol, max_depth);
}

// Double-exponential (tanh-sinh) rule on a finite interval. Refines the step
// until successive levels agree to max(rel_tol * |I|, abs_tol). Endpoint
// singularities are tolerated (the integrand is never evaluated at a or b).
template <typename F>
double tanh_sinh(F&& f, double a, double b, double rel_tol = 1e-10, double abs_tol = 1e-300,
                 int max_level = 9) {
    if (a == b) return 0.0;
    if (b < a) return -tanh_sinh(f, b, a, rel_tol, abs_tol, max_level);
    constexpr double kHalfPi = std::numbers::pi / 2;
    constexpr double kTMax = 3.15;
    const double c = 0.5 * (a + b), d = 0.5 * (b - a);

    // Weighted sample at abscissa parameter t; points are written as distances
    // from the nearer endpoint to keep resolution near a and b.
    auto term = [&](double t) -> double {
        const double u = kHalfPi * std::sinh(t);
        const double ch = std::cosh(u);
        const double w = d * kHalfPi * std::cosh(t) / (ch * ch);
        const double delta = d * 2.0 / (1.0 + std::exp(2.0 * std::abs(u)));  // d * (1 - tanh|u|)
        double x = t >= 0 ? b - delta : a + delta;
        if (x <= a || x >= b) return 0.0;
        if (w == 0.0) return 0.0;
        return w * f(x);
    };

    double h = 1.0;
    double sum = term(0.0);
    for (double t = h; t <= kTMax; t += h) sum += term(t) + term(-t);
    double estimate = sum * h;
    for (int level = 1; level <= max_level; ++level) {
        h *= 0.5;
        double add = 0.0;
        for (double t = h; t <= kTMax; t += 2 * h) add += term(t) + term(-t);
        sum += add;
        const double next = sum * h;
        const double diff = std::abs(next - estimate);
        estimate = next;
        if (level >= 3 && diff <= std::max(rel_tol * std::abs(next), abs_tol)) break;
    }
    return estimate;
}

// Integral over the ordered region lower <= y_1 < y_2 < ... < y_n <= upper,
// as nested tanh-sinh integrals (the integrand is smooth inside the chamber;
// kinks and zeros sit on its faces, which tanh-sinh never samples).
// `abs_tol` stops refinement of inner integrals that are negligible on the
// scale of the whole; without it rounding noise in tiny tails keeps them
// refining to the maximum level.
template <typename F>
double integrate_chamber(F&& f, std::size_t n, double lower, double upper, double rel_tol = 1e-10,
                         double abs_tol = 1e-300) {
    if (n == 0) return f(std::span<const double>{});
    std::vector<double> y(n);
    std::function<double(std::size_t, double)> level = [&](std::size_t i, double lo) -> double {
        return tanh_sinh(
            [&](double v) {
                y[i] = v;
                if (i + 1 == n) return f(std::span<const double>(y));
                return level(i + 1, v);
            },
            lo, upper, rel_tol, abs_tol);
    };
    return level(0, lower);
}

}  // namespace viciouskit::quadrature
