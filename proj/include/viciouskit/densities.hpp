#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "viciouskit/linalg.hpp"
#include "viciouskit/quadrature.hpp"
#include "viciouskit/special_functions.hpp"

namespace viciouskit {

// Point of the Weyl chamber x_1 < ... < x_N (with the wall also 0 <= x_1).
class ChamberPoint {
public:
    ChamberPoint() = default;
    ChamberPoint(std::vector<double> coords, bool wall) : coords_(std::move(coords)), wall_(wall) {
        if (coords_.empty()) throw std::invalid_argument("ChamberPoint: needs at least one coordinate");
        for (std::size_t i = 0; i < coords_.size(); ++i) {
            if (!std::isfinite(coords_[i])) throw std::invalid_argument("ChamberPoint: coordinates must be finite");
            if (i > 0 && !(coords_[i] > coords_[i - 1]))
                throw std::invalid_argument("ChamberPoint: coordinates must be strictly increasing");
        }
        if (wall_ && coords_[0] < 0) throw std::invalid_argument("ChamberPoint: wall point requires coords[0] >= 0");
    }

    std::size_t size() const { return coords_.size(); }
    bool wall() const { return wall_; }
    double operator[](std::size_t i) const { return coords_[i]; }
    std::span<const double> coords() const { return coords_; }

    // Distance to the boundary of the chamber.
    double boundary_distance() const {
        double d = wall_ ? coords_[0] : std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < coords_.size(); ++i) d = std::min(d, coords_[i] - coords_[i - 1]);
        return d;
    }

private:
    std::vector<double> coords_;
    bool wall_ = false;
};

// Marker for the degenerate start where all walkers sit at the origin.
struct OriginStart {};
inline constexpr OriginStart origin{};

struct ModelSpec {
    int n = 1;
    double horizon = std::numeric_limits<double>::infinity();  // infinite selects the p-family
    bool wall = false;

    bool finite_horizon() const { return std::isfinite(horizon); }

    void validate() const {
        if (n < 1) throw std::invalid_argument("ModelSpec: walker count must be >= 1");
        if (!(horizon > 0)) throw std::invalid_argument("ModelSpec: horizon must be positive or infinite");
    }

    static ModelSpec finite(int n, double horizon, bool wall) { return {n, horizon, wall}; }
    static ModelSpec infinite(int n, bool wall) { return {n, std::numeric_limits<double>::infinity(), wall}; }
};

namespace detail {

inline void check_dims(std::span<const double> a, std::span<const double> b, const char* who) {
    if (a.size() != b.size()) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

inline double squared_norm(std::span<const double> y) {
    double s = 0;
    for (double v : y) s += v * v;
    return s;
}

inline bool in_open_chamber(std::span<const double> x, bool wall) {
    if (wall && !(x[0] > 0)) return false;
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1])) return false;
    return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Karlin-McGregor determinant of heat kernels
// ---------------------------------------------------------------------------

inline SignedLog log_km_density(double t, std::span<const double> x, std::span<const double> y, bool wall) {
    if (!(t > 0)) throw std::invalid_argument("km_density: elapsed time must be positive");
    detail::check_dims(x, y, "km_density");
    const std::size_t n = x.size();
    const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * t);
    Matrix logs(n, n), signs(n, n, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double d = y[j] - x[i];
            double l = log_norm - d * d / (2.0 * t);
            if (wall) {
                // phi(y - x) - phi(y + x) = phi(y - x) (1 - exp(-2 x y / t))
                const double r = -std::expm1(-2.0 * x[i] * y[j] / t);
                if (r <= 0) {
                    signs(i, j) = r == 0 ? 0.0 : -1.0;
                    l += r == 0 ? 0.0 : std::log(-r);
                } else {
                    l += std::log(r);
                }
            }
            logs(i, j) = l;
        }
    return log_determinant_from_logs(logs, signs);
}

inline double km_density(double t, const ChamberPoint& x, const ChamberPoint& y) {
    if (x.wall() != y.wall()) throw std::invalid_argument("km_density: wall flags differ");
    return log_km_density(t, x.coords(), y.coords(), x.wall()).value();
}

// ---------------------------------------------------------------------------
// Survival probability as a Pfaffian
// ---------------------------------------------------------------------------

inline SkewMatrix survival_matrix(double t, std::span<const double> x, bool wall) {
    const std::size_t n = x.size();
    const std::size_t dim = n + n % 2;
    SkewMatrix f(dim);
    if (!wall) {
        const double s = 2.0 * std::sqrt(t);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) f.set(i, j, psi((x[j] - x[i]) / s));
        if (n % 2 == 1)
            for (std::size_t i = 0; i < n; ++i) f.set(i, n, 1.0);
    } else {
        const double s = std::sqrt(2.0 * t);
        std::vector<double> u(n);
        for (std::size_t i = 0; i < n; ++i) u[i] = x[i] / s;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) f.set(i, j, psi_hat(u[i], u[j]));
        if (n % 2 == 1)
            for (std::size_t i = 0; i < n; ++i) f.set(i, n, psi(u[i]));
    }
    return f;
}

// log N_N(t, x); t == 0 gives 1 (empty interval).
inline SignedLog log_survival(double t, std::span<const double> x, bool wall) {
    if (t < 0) throw std::invalid_argument("survival: time must be nonnegative");
    if (x.empty()) throw std::invalid_argument("survival: empty configuration");
    if (!detail::in_open_chamber(x, wall)) return {};
    if (t == 0) return {1, 0.0};
    SignedLog p = log_pfaffian(survival_matrix(t, x, wall));
    if (p.sign <= 0) return {};  // cancellation right at the boundary
    return p;
}

inline double survival(double t, const ChamberPoint& x) {
    if (!(t > 0)) throw std::invalid_argument("survival: time must be positive");
    return std::min(1.0, log_survival(t, x.coords(), x.wall()).value());
}

// ---------------------------------------------------------------------------
// Transition densities
// ---------------------------------------------------------------------------

namespace detail {

inline void check_times(double s, double t, const char* who) {
    if (!(s >= 0) || !(t > s)) throw std::invalid_argument(std::string(who) + ": requires 0 <= s < t");
}

inline double log_h(std::span<const double> y, bool wall) {
    return wall ? log_abs_h_hat_poly(y) : log_abs_h_poly(y);
}

}  // namespace detail

// log g_N^T(0, 0, t, y) (or its wall analogue)
inline double log_g_density_origin(const ModelSpec& spec, double t, std::span<const double> y) {
    spec.validate();
    if (!spec.finite_horizon()) throw std::invalid_argument("g_density: needs a finite horizon");
    if (!(t > 0) || t > spec.horizon) throw std::invalid_argument("g_density: requires 0 < t <= T");
    if (y.size() != static_cast<std::size_t>(spec.n)) throw std::invalid_argument("g_density: dimension mismatch");
    if (!detail::in_open_chamber(y, spec.wall)) return -std::numeric_limits<double>::infinity();
    const double n = spec.n, big_t = spec.horizon;
    const ModelConstants k = constants(spec.n);
    const SignedLog surv = log_survival(big_t - t, y, spec.wall);
    if (surv.sign == 0) return -std::numeric_limits<double>::infinity();
    const double gauss = -detail::squared_norm(y) / (2.0 * t) + detail::log_h(y, spec.wall) + surv.log_abs;
    if (!spec.wall)
        return k.log_c + n * (n - 1) / 4.0 * std::log(big_t) - n * n / 2.0 * std::log(t) + gauss;
    return k.log_c_hat + n * n / 2.0 * std::log(big_t) - n * (2 * n + 1) / 2.0 * std::log(t) + gauss;
}

// log p_N(0, 0, t, y) (or its wall analogue)
inline double log_p_density_origin(const ModelSpec& spec, double t, std::span<const double> y) {
    spec.validate();
    if (!(t > 0)) throw std::invalid_argument("p_density: requires t > 0");
    if (y.size() != static_cast<std::size_t>(spec.n)) throw std::invalid_argument("p_density: dimension mismatch");
    if (!detail::in_open_chamber(y, spec.wall)) return -std::numeric_limits<double>::infinity();
    const double n = spec.n;
    const ModelConstants k = constants(spec.n);
    const double gauss = -detail::squared_norm(y) / (2.0 * t) + 2.0 * detail::log_h(y, spec.wall);
    if (!spec.wall) return k.log_c_prime - n * n / 2.0 * std::log(t) + gauss;
    return k.log_c_hat_prime - n * (2 * n + 1) / 2.0 * std::log(t) + gauss;
}

inline double log_g_density(const ModelSpec& spec, double s, std::span<const double> x, double t,
                            std::span<const double> y) {
    spec.validate();
    if (!spec.finite_horizon()) throw std::invalid_argument("g_density: needs a finite horizon");
    detail::check_times(s, t, "g_density");
    if (t > spec.horizon) throw std::invalid_argument("g_density: requires t <= T");
    detail::check_dims(x, y, "g_density");
    if (x.size() != static_cast<std::size_t>(spec.n)) throw std::invalid_argument("g_density: dimension mismatch");
    if (!detail::in_open_chamber(x, spec.wall)) throw std::invalid_argument("g_density: start must be interior");
    if (!detail::in_open_chamber(y, spec.wall)) return -std::numeric_limits<double>::infinity();
    const SignedLog f = log_km_density(t - s, x, y, spec.wall);
    const SignedLog num = log_survival(spec.horizon - t, y, spec.wall);
    const SignedLog den = log_survival(spec.horizon - s, x, spec.wall);
    if (f.sign <= 0 || num.sign == 0) return -std::numeric_limits<double>::infinity();
    return f.log_abs + num.log_abs - den.log_abs;
}

inline double log_p_density(const ModelSpec& spec, double s, std::span<const double> x, double t,
                            std::span<const double> y) {
    spec.validate();
    detail::check_times(s, t, "p_density");
    detail::check_dims(x, y, "p_density");
    if (x.size() != static_cast<std::size_t>(spec.n)) throw std::invalid_argument("p_density: dimension mismatch");
    if (!detail::in_open_chamber(x, spec.wall)) throw std::invalid_argument("p_density: start must be interior");
    if (!detail::in_open_chamber(y, spec.wall)) return -std::numeric_limits<double>::infinity();
    const SignedLog f = log_km_density(t - s, x, y, spec.wall);
    if (f.sign <= 0) return -std::numeric_limits<double>::infinity();
    return f.log_abs + detail::log_h(y, spec.wall) - detail::log_h(x, spec.wall);
}

inline double g_density(const ModelSpec& spec, OriginStart, double t, const ChamberPoint& y) {
    return std::exp(log_g_density_origin(spec, t, y.coords()));
}

inline double g_density(const ModelSpec& spec, double s, OriginStart, double t, const ChamberPoint& y) {
    if (s != 0) throw std::invalid_argument("g_density: origin start requires s = 0");
    return g_density(spec, origin, t, y);
}

inline double g_density(const ModelSpec& spec, double s, const ChamberPoint& x, double t, const ChamberPoint& y) {
    return std::exp(log_g_density(spec, s, x.coords(), t, y.coords()));
}

inline double p_density(const ModelSpec& spec, OriginStart, double t, const ChamberPoint& y) {
    return std::exp(log_p_density_origin(spec, t, y.coords()));
}

inline double p_density(const ModelSpec& spec, double s, OriginStart, double t, const ChamberPoint& y) {
    if (s != 0) throw std::invalid_argument("p_density: origin start requires s = 0");
    return p_density(spec, origin, t, y);
}

inline double p_density(const ModelSpec& spec, double s, const ChamberPoint& x, double t, const ChamberPoint& y) {
    return std::exp(log_p_density(spec, s, x.coords(), t, y.coords()));
}

// g-family for a finite horizon, p-family otherwise.
inline double log_transition_density_origin(const ModelSpec& spec, double t, std::span<const double> y) {
    return spec.finite_horizon() ? log_g_density_origin(spec, t, y) : log_p_density_origin(spec, t, y);
}

inline double transition_density(const ModelSpec& spec, OriginStart, double t, const ChamberPoint& y) {
    return std::exp(log_transition_density_origin(spec, t, y.coords()));
}

inline double transition_density(const ModelSpec& spec, double s, const ChamberPoint& x, double t,
                                 const ChamberPoint& y) {
    return spec.finite_horizon() ? g_density(spec, s, x, t, y) : p_density(spec, s, x, t, y);
}

// ---------------------------------------------------------------------------
// Drift
// ---------------------------------------------------------------------------

// Closed-form drift of the T = infinity family, the gradient of log h.
inline std::vector<double> dyson_drift(std::span<const double> x, bool wall) {
    const std::size_t n = x.size();
    std::vector<double> b(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (wall) b[i] += 1.0 / x[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            b[i] += 1.0 / (x[i] - x[j]);
            if (wall) b[i] += 1.0 / (x[i] + x[j]);
        }
    }
    return b;
}

// Gradient of log N(tau, x) by central differences with step h and one
// Richardson extrapolation. No boundary check.
inline std::vector<double> survival_log_gradient(double tau, std::span<const double> x, bool wall, double h) {
    const std::size_t n = x.size();
    std::vector<double> z(x.begin(), x.end()), grad(n);
    auto f = [&](std::size_t i, double dx) {
        z[i] = x[i] + dx;
        const SignedLog v = log_survival(tau, z, wall);
        z[i] = x[i];
        if (v.sign <= 0) throw std::domain_error("drift: survival probability vanished inside the stencil");
        return v.log_abs;
    };
    for (std::size_t i = 0; i < n; ++i) {
        const double d1 = (f(i, h) - f(i, -h)) / (2 * h);
        const double d2 = (f(i, h / 2) - f(i, -h / 2)) / h;
        grad[i] = (4 * d2 - d1) / 3;
    }
    return grad;
}

inline double default_fd_step(std::span<const double> x) { return 1e-5 * (1.0 + std::sqrt(detail::squared_norm(x))); }

// b_i(t, x): gradient of log N(T - t, x) for a finite horizon, the Dyson
// (or wall) drift for an infinite one.
inline std::vector<double> drift(const ModelSpec& spec, double t, const ChamberPoint& x) {
    spec.validate();
    if (x.size() != static_cast<std::size_t>(spec.n) || x.wall() != spec.wall)
        throw std::invalid_argument("drift: point does not match the model");
    if (!spec.finite_horizon()) return dyson_drift(x.coords(), spec.wall);
    if (!(t < spec.horizon)) throw std::invalid_argument("drift: requires t < T");
    if (spec.n == 1 && !spec.wall) return {0.0};
    const double h = default_fd_step(x.coords());
    if (x.boundary_distance() < 10 * h)
        throw std::domain_error("drift: point within 10*h of the chamber boundary; use a smaller step or reject the move");
    return survival_log_gradient(spec.horizon - t, x.coords(), spec.wall, h);
}

// ---------------------------------------------------------------------------
// Identities
// ---------------------------------------------------------------------------

struct ImhofResult {
    double log_lhs = 0;
    double log_rhs = 0;
    double residual = 0;  // |LHS - RHS| / RHS
};

// Compares prod_k g(t_{k-1}, y_{k-1}, t_k, y_k) with
// c_bar T^{N(N-1)/4} prod_k p(...) / h(y_l) (wall: c_tilde T^{N^2/2} / h_hat),
// starting from the origin at t_0 = 0 and ending at t_l = T.
inline ImhofResult imhof_check(const ModelSpec& spec, std::span<const double> times,
                               const std::vector<ChamberPoint>& points) {
    spec.validate();
    if (!spec.finite_horizon()) throw std::invalid_argument("imhof_check: needs a finite horizon");
    if (times.size() != points.size() + 1 || points.empty())
        throw std::invalid_argument("imhof_check: expected times t_0..t_l and points y_1..y_l");
    if (times.front() != 0.0) throw std::invalid_argument("imhof_check: time grid must start at 0");
    if (std::abs(times.back() - spec.horizon) > 1e-14 * spec.horizon)
        throw std::invalid_argument("imhof_check: time grid must end at T");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1])) throw std::invalid_argument("imhof_check: times must be strictly increasing");
    for (const auto& p : points)
        if (p.size() != static_cast<std::size_t>(spec.n) || p.wall() != spec.wall)
            throw std::invalid_argument("imhof_check: point does not match the model");

    ModelSpec at_horizon = spec;
    at_horizon.horizon = times.back();
    ImhofResult r;
    r.log_lhs = log_g_density_origin(at_horizon, times[1], points[0].coords());
    r.log_rhs = log_p_density_origin(spec, times[1], points[0].coords());
    for (std::size_t k = 1; k < points.size(); ++k) {
        r.log_lhs += log_g_density(at_horizon, times[k], points[k - 1].coords(), times[k + 1], points[k].coords());
        r.log_rhs += log_p_density(spec, times[k], points[k - 1].coords(), times[k + 1], points[k].coords());
    }
    const double n = spec.n, big_t = at_horizon.horizon;
    const ModelConstants c = constants(spec.n);
    const auto& last = points.back().coords();
    if (!spec.wall)
        r.log_rhs += std::log(c.c_bar) + n * (n - 1) / 4.0 * std::log(big_t) - log_abs_h_poly(last);
    else
        r.log_rhs += std::log(c.c_tilde) + n * n / 2.0 * std::log(big_t) - log_abs_h_hat_poly(last);
    r.residual = std::abs(std::expm1(r.log_lhs - r.log_rhs));
    return r;
}

struct AsymptoticRatio {
    double exact = 0;
    double predicted = 0;
    double ratio = 0;
};

// N(t, x) against h_N(x / sqrt t) / c_bar_N (wall: h_hat_N / c_tilde_N).
inline AsymptoticRatio survival_asymptotics(double t, const ChamberPoint& x) {
    const std::size_t n = x.size();
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = x[i] / std::sqrt(t);
    const ModelConstants c = constants(static_cast<int>(n));
    AsymptoticRatio r;
    r.exact = survival(t, x);
    r.predicted = x.wall() ? h_hat_poly(z) / c.c_tilde : h_poly(z) / c.c_bar;
    r.ratio = r.exact / r.predicted;
    return r;
}

enum class DeBruijnKernel { gaussian, wall_gaussian };

struct DeBruijnResult {
    double integral = 0;  // chamber integral of det z(x_i, y_j)
    double pfaffian = 0;  // Pf of the I_z matrix
    double residual = 0;  // relative
};

// Kernels z(x, y) = e^{-(y-x)^2}/sqrt(pi) and its image difference; their
// integrals are Psi((x_j - x_i)/sqrt 2) and Psi_hat(x_i, x_j).
inline DeBruijnResult de_bruijn_check(std::size_t n, DeBruijnKernel kernel, const ChamberPoint& x,
                                      double rel_tol = 1e-10) {
    if (n < 1 || n > 3) throw std::invalid_argument("de_bruijn_check: supports 1 <= N <= 3");
    if (x.size() != n) throw std::invalid_argument("de_bruijn_check: dimension mismatch");
    const bool wall = kernel == DeBruijnKernel::wall_gaussian;
    if (wall && x[0] < 0) throw std::invalid_argument("de_bruijn_check: wall kernel needs x_1 >= 0");
    constexpr double t = 0.5;  // heat kernel at t = 1/2 is e^{-(y-x)^2}/sqrt(pi)
    const double reach = 8.0;  // e^{-64} is far below the tolerance
    const double lo = wall ? 0.0 : x[0] - reach, hi = x[n - 1] + reach;
    auto integrand = [&](std::span<const double> y) {
        const SignedLog d = log_km_density(t, x.coords(), y, wall);
        return d.value();
    };
    DeBruijnResult r;
    r.pfaffian = log_survival(t, x.coords(), wall).value();
    r.integral = quadrature::integrate_chamber(integrand, n, lo, hi, rel_tol, 1e-3 * rel_tol * std::abs(r.pfaffian));
    r.residual = std::abs(r.integral - r.pfaffian) / std::abs(r.pfaffian);
    return r;
}

}  // namespace viciouskit
