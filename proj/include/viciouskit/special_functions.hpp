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

namespace viciouskit {

// ---------------------------------------------------------------------------
// Gamma function. Integer and half-integer arguments are exact products; the
// rest goes to the C library.
// ---------------------------------------------------------------------------

inline bool is_half_integer(double x) { return std::floor(x) != x && std::floor(2 * x) == 2 * x; }

inline double log_gamma(double x) {
    if (x <= 0) throw std::domain_error("log_gamma: argument must be positive");
    if (x == std::floor(x) && x < 1e6) {
        double s = 0.0;
        for (double k = 2; k < x; k += 1) s += std::log(k);
        return s;
    }
    if (is_half_integer(x) && x < 1e6) {
        // Gamma(k + 1/2) = sqrt(pi) * prod_{i=1..k} (i - 1/2)
        double s = 0.5 * std::log(std::numbers::pi);
        for (double v = 0.5; v < x; v += 1) s += std::log(v);
        return s;
    }
    return std::lgamma(x);
}

inline double gamma_fn(double x) {
    if (x > 0 && (x == std::floor(x) || is_half_integer(x)) && x < 170) {
        double p = is_half_integer(x) ? std::sqrt(std::numbers::pi) : 1.0;
        for (double v = is_half_integer(x) ? 0.5 : 1.0; v < x; v += 1) p *= v;
        return p;
    }
    return std::tgamma(x);
}

// ---------------------------------------------------------------------------
// Psi and Psi-hat kernels of the survival Pfaffians.
// ---------------------------------------------------------------------------

// (2 / sqrt(pi)) * integral_0^u exp(-v^2) dv
inline double psi(double u) { return std::erf(u); }

// Two-rectangle Gaussian integral of the wall survival kernel:
//
//   (2/pi) [ int_0^u1 dv1 int_{u1-u2}^{u2-u1} dv2 e^{-Q}
//          - int_u1^u2 dv1 int_{u2-u1}^{u1+u2} dv2 e^{-Q} ],  Q = v1^2 + (v1-v2)^2.
//
// Both rectangles have area 2 u1 (u2 - u1), so for u2 < 1 e^{-Q} is replaced
// by expm1(-Q); the result is unchanged but stays relatively accurate when the
// two terms nearly cancel (small arguments, value ~ u^4).
inline double psi_hat(double u1, double u2) {
    if (!(u1 >= 0.0) || !(u2 >= 0.0)) throw std::invalid_argument("psi_hat: arguments must be nonnegative");
    if (u1 > u2) throw std::invalid_argument("psi_hat: requires u1 <= u2");
    if (u1 == 0.0 || u1 == u2) return 0.0;
    if (u2 >= 1.0) {
        // No cancellation to guard against: integrate e^{-Q} over v2 in closed
        // form, int_c^d e^{-(v1-v2)^2} dv2 = (sqrt(pi)/2)(erf(d-v1) - erf(c-v1)).
        auto inner = [](double c, double d) {
            return [c, d](double v1) { return std::exp(-v1 * v1) * (std::erf(d - v1) - std::erf(c - v1)); };
        };
        const double a = quadrature::integrate_gauss_legendre(inner(u1 - u2, u2 - u1), 0.0, u1, 1e-14);
        const double b = quadrature::integrate_gauss_legendre(inner(u2 - u1, u1 + u2), u1, u2, 1e-14);
        return (a - b) / std::sqrt(std::numbers::pi);
    }
    auto integrand = [](double v1, double v2) {
        const double d = v1 - v2;
        return std::expm1(-(v1 * v1 + d * d));
    };
    const double a = quadrature::integrate_rectangle(integrand, 0.0, u1, u1 - u2, u2 - u1, 1e-13);
    const double b = quadrature::integrate_rectangle(integrand, u1, u2, u2 - u1, u1 + u2, 1e-13);
    return (2.0 / std::numbers::pi) * (a - b);
}

// ---------------------------------------------------------------------------
// Vandermonde-type products
// ---------------------------------------------------------------------------

// prod_{i<j} (x_j - x_i)
inline double h_poly(std::span<const double> x) {
    double p = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) p *= x[j] - x[i];
    return p;
}

// prod_{i<j} (x_j^2 - x_i^2) * prod_i x_i
inline double h_hat_poly(std::span<const double> x) {
    double p = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        p *= x[i];
        for (std::size_t j = i + 1; j < x.size(); ++j) p *= x[j] * x[j] - x[i] * x[i];
    }
    return p;
}

// log |h_N(x)|, used where the product under- or overflows.
inline double log_abs_h_poly(std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) s += std::log(std::abs(x[j] - x[i]));
    return s;
}

inline double log_abs_h_hat_poly(std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += std::log(std::abs(x[i]));
        for (std::size_t j = i + 1; j < x.size(); ++j) s += std::log(std::abs(x[j] * x[j] - x[i] * x[i]));
    }
    return s;
}

// ---------------------------------------------------------------------------
// Partitions and characters
// ---------------------------------------------------------------------------

class Partition {
public:
    explicit Partition(std::vector<int> parts) : parts_(std::move(parts)) {
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            if (parts_[i] < 0) throw std::invalid_argument("Partition: parts must be nonnegative");
            if (i + 1 < parts_.size() && parts_[i] < parts_[i + 1])
                throw std::invalid_argument("Partition: parts must be nonincreasing");
        }
    }

    std::size_t length() const { return parts_.size(); }
    int operator[](std::size_t i) const { return parts_[i]; }
    const std::vector<int>& parts() const { return parts_; }
    int weight() const {
        int s = 0;
        for (int p : parts_) s += p;
        return s;
    }

private:
    std::vector<int> parts_;
};

// xi_j(u) = u_{N-j+1}/2 - (N-j) for an even lattice start u (half-lattice
// coordinates), and the wall variant xi-hat_j = u_{N-j+1}/2 - (N-j+1).
inline Partition partition_from_start(std::span<const long long> half_positions, bool wall) {
    const std::size_t n = half_positions.size();
    std::vector<int> parts(n);
    for (std::size_t j = 0; j < n; ++j)
        parts[j] = static_cast<int>(half_positions[n - 1 - j] - static_cast<long long>(n - 1 - j) - (wall ? 1 : 0));
    return Partition(std::move(parts));
}

namespace detail {

// Complete homogeneous symmetric polynomials h_0..h_K of the given variables.
// h_k(z_1..z_n) is the divided difference of x^{k+n-1} on the nodes z, and
// the update below is the divided-difference table built one node at a time,
// so coincident nodes need no special handling.
inline std::vector<double> complete_homogeneous(std::span<const double> z, int max_degree) {
    std::vector<double> h(static_cast<std::size_t>(max_degree) + 1, 0.0);
    h[0] = 1.0;
    for (double x : z)
        for (int k = 1; k <= max_degree; ++k) h[k] += x * h[k - 1];
    return h;
}

inline void check_positive(std::span<const double> z, const char* who) {
    for (double v : z)
        if (!(v > 0.0)) throw std::invalid_argument(std::string(who) + ": arguments must be positive");
}

inline void check_length(const Partition& lambda, std::span<const double> z, const char* who) {
    if (lambda.length() != z.size())
        throw std::invalid_argument(std::string(who) + ": partition length must equal number of variables");
}

}  // namespace detail

// Jacobi-Trudi form det(h_{lambda_i - i + j}); division free.
inline double schur_jacobi_trudi(const Partition& lambda, std::span<const double> z) {
    detail::check_length(lambda, z, "schur");
    const std::size_t n = z.size();
    if (n == 0) return 1.0;
    const int kmax = lambda[0] + static_cast<int>(n);
    const auto h = detail::complete_homogeneous(z, kmax);
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const int k = lambda[i] - static_cast<int>(i) + static_cast<int>(j);
            m(i, j) = (k < 0 || k > kmax) ? 0.0 : h[static_cast<std::size_t>(k)];
        }
    return determinant(m);
}

// Bialternant det(z_i^{lambda_j+N-j}) / det(z_i^{N-j}); near coincident
// arguments (min gap < 1e-6 max|z|) the divided-difference form is used.
inline double schur(const Partition& lambda, std::span<const double> z) {
    detail::check_length(lambda, z, "schur");
    detail::check_positive(z, "schur");
    const std::size_t n = z.size();
    if (n == 0) return 1.0;
    double zmax = 0.0, gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        zmax = std::max(zmax, z[i]);
        for (std::size_t j = i + 1; j < n; ++j) gap = std::min(gap, std::abs(z[i] - z[j]));
    }
    if (gap < 1e-6 * zmax) return schur_jacobi_trudi(lambda, z);

    Matrix logs(n, n), signs(n, n, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            logs(i, j) = static_cast<double>(lambda[j] + static_cast<int>(n - 1 - j)) * std::log(z[i]);
    const SignedLog num = log_determinant_from_logs(logs, signs);
    // det(z_i^{N-j}) = prod_{i<j} (z_i - z_j)
    int sign = 1;
    double log_den = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = z[i] - z[j];
            if (d < 0) sign = -sign;
            log_den += std::log(std::abs(d));
        }
    if (num.sign == 0) return 0.0;
    return num.sign * sign * std::exp(num.log_abs - log_den);
}

// s_lambda(1,...,1) = prod_{i<j} (lambda_i - lambda_j + j - i) / (j - i)
inline double schur_at_ones(const Partition& lambda) {
    double p = 1.0;
    const std::size_t n = lambda.length();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            p *= static_cast<double>(lambda[i] - lambda[j] + static_cast<int>(j - i)) / static_cast<double>(j - i);
    return p;
}

// Koike-Terada form 1/2 det(h_{l_i-i+j} + h_{l_i-i-j+2}) in the 2N variables
// z_1..z_N, 1/z_1..1/z_N.
inline double sp_character_jacobi_trudi(const Partition& lambda, std::span<const double> z) {
    detail::check_length(lambda, z, "sp_character");
    const std::size_t n = z.size();
    if (n == 0) return 1.0;
    std::vector<double> zz(z.begin(), z.end());
    for (double v : z) zz.push_back(1.0 / v);
    const int kmax = lambda[0] + 2 * static_cast<int>(n) + 2;
    const auto h = detail::complete_homogeneous(zz, kmax);
    auto hk = [&](int k) { return (k < 0 || k > kmax) ? 0.0 : h[static_cast<std::size_t>(k)]; };
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const int li = lambda[i], ii = static_cast<int>(i), jj = static_cast<int>(j);
            m(i, j) = hk(li - ii + jj) + hk(li - ii - jj);
        }
    return 0.5 * determinant(m);
}

// det(z_i^{l_j} - z_i^{-l_j}) / det(z_i^{m_j} - z_i^{-m_j}),
// l_j = lambda_j + N - j + 1, m_j = N - j + 1.
inline double sp_character(const Partition& lambda, std::span<const double> z) {
    detail::check_length(lambda, z, "sp_character");
    detail::check_positive(z, "sp_character");
    const std::size_t n = z.size();
    if (n == 0) return 1.0;
    double scale = 1.0, gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        scale = std::max({scale, z[i], 1.0 / z[i]});
        gap = std::min(gap, std::abs(z[i] - 1.0 / z[i]));
        for (std::size_t j = i + 1; j < n; ++j)
            gap = std::min({gap, std::abs(z[i] - z[j]), std::abs(z[i] - 1.0 / z[j])});
    }
    if (gap < 1e-6 * scale) return sp_character_jacobi_trudi(lambda, z);

    Matrix num(n, n), den(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lz = std::log(z[i]);
        for (std::size_t j = 0; j < n; ++j) {
            const double l = lambda[j] + static_cast<double>(n - j);
            const double m = static_cast<double>(n - j);
            num(i, j) = 2.0 * std::sinh(l * lz);
            den(i, j) = 2.0 * std::sinh(m * lz);
        }
    }
    const SignedLog a = log_determinant(num), b = log_determinant(den);
    if (a.sign == 0) return 0.0;
    return a.sign * b.sign * std::exp(a.log_abs - b.log_abs);
}

// Principal specialization
// sp_lambda(1,...,1) = prod_{i<j} (l_j^2 - l_i^2)/(m_j^2 - m_i^2) * prod_j l_j / m_j.
inline double sp_character_at_ones(const Partition& lambda) {
    const std::size_t n = lambda.length();
    std::vector<double> l(n), m(n);
    for (std::size_t j = 0; j < n; ++j) {
        l[j] = lambda[j] + static_cast<double>(n - j);
        m[j] = static_cast<double>(n - j);
    }
    double p = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
        p *= l[j] / m[j];
        for (std::size_t i = 0; i < j; ++i) p *= (l[j] * l[j] - l[i] * l[i]) / (m[j] * m[j] - m[i] * m[i]);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Model constants
// ---------------------------------------------------------------------------

struct ModelConstants {
    int n = 0;
    double c = 0;            // 2^{-N/2} / prod Gamma(j/2)
    double c_prime = 0;      // (2 pi)^{-N/2} / prod Gamma(j)
    double c_bar = 0;        // c / c_prime
    double c_hat = 0;        // 1 / prod Gamma(j)
    double c_hat_prime = 0;  // (2/pi)^{N/2} / prod Gamma(2j)
    double c_tilde = 0;      // c_hat / c_hat_prime
    // log versions, finite for all N where the plain ones may overflow
    double log_c = 0, log_c_prime = 0, log_c_hat = 0, log_c_hat_prime = 0;
};

inline ModelConstants constants(int n) {
    if (n < 1) throw std::invalid_argument("constants: walker count must be >= 1");
    const double nn = n;
    double sum_half = 0, sum_int = 0, sum_double = 0;
    for (int j = 1; j <= n; ++j) {
        sum_half += log_gamma(j / 2.0);
        sum_int += log_gamma(j);
        sum_double += log_gamma(2.0 * j);
    }
    ModelConstants k;
    k.n = n;
    k.log_c = -0.5 * nn * std::log(2.0) - sum_half;
    k.log_c_prime = -0.5 * nn * std::log(2.0 * std::numbers::pi) - sum_int;
    k.log_c_hat = -sum_int;
    k.log_c_hat_prime = 0.5 * nn * std::log(2.0 / std::numbers::pi) - sum_double;
    k.c = std::exp(k.log_c);
    k.c_prime = std::exp(k.log_c_prime);
    k.c_hat = std::exp(k.log_c_hat);
    k.c_hat_prime = std::exp(k.log_c_hat_prime);
    k.c_bar = std::exp(k.log_c - k.log_c_prime);
    k.c_tilde = std::exp(k.log_c_hat - k.log_c_hat_prime);
    return k;
}

// ---------------------------------------------------------------------------
// Mehta integrals
// ---------------------------------------------------------------------------

enum class MehtaWeight {
    plain,             // int e^{-a|u|^2} prod |u_j - u_i|^{2 gamma}
    squared_diff_abs,  // int e^{-|u|^2/2} prod |u_j^2 - u_i^2|^{2 gamma} prod |u_j|^{2a - 1}
};

// Closed-form right-hand sides.
inline double mehta_integral(int n, double gamma, double a, MehtaWeight weight) {
    if (n < 1) throw std::invalid_argument("mehta_integral: N must be >= 1");
    if (!(gamma > 0) || !(a > 0)) throw std::invalid_argument("mehta_integral: requires gamma > 0 and a > 0");
    const double nn = n;
    double lg = 0.0;
    if (weight == MehtaWeight::plain) {
        lg = 0.5 * nn * std::log(2.0 * std::numbers::pi) - 0.5 * nn * (gamma * (nn - 1) + 1) * std::log(2.0 * a);
        for (int i = 1; i <= n; ++i) lg += log_gamma(1 + i * gamma) - log_gamma(1 + gamma);
    } else {
        lg = (a * nn + gamma * nn * (nn - 1)) * std::log(2.0);
        for (int j = 1; j <= n; ++j)
            lg += log_gamma(1 + j * gamma) + log_gamma(a + gamma * (j - 1)) - log_gamma(1 + gamma);
    }
    return std::exp(lg);
}

// Left-hand sides by nested quadrature over the ordered chamber, using the
// permutation (and, for the second weight, sign-flip) symmetry. N <= 3.
inline double mehta_integral_quadrature(int n, double gamma, double a, MehtaWeight weight,
                                        double rel_tol = 1e-11) {
    if (n < 1 || n > 3) throw std::invalid_argument("mehta_integral_quadrature: supports 1 <= N <= 3");
    if (!(gamma > 0) || !(a > 0)) throw std::invalid_argument("mehta_integral_quadrature: requires gamma > 0 and a > 0");
    double factorial = 1;
    for (int k = 2; k <= n; ++k) factorial *= k;
    if (weight == MehtaWeight::plain) {
        const double radius = std::sqrt((45.0 + 2.0 * gamma * n * n) / a);
        auto f = [&](std::span<const double> u) {
            double s = 0, p = 1;
            for (std::size_t i = 0; i < u.size(); ++i) {
                s += u[i] * u[i];
                for (std::size_t j = i + 1; j < u.size(); ++j) p *= std::pow(u[j] - u[i], 2 * gamma);
            }
            return std::exp(-a * s) * p;
        };
        return factorial * quadrature::integrate_chamber(f, static_cast<std::size_t>(n), -radius, radius, rel_tol, 1e-15);
    }
    const double radius = std::sqrt(2.0 * (45.0 + 2.0 * gamma * n * n + 2.0 * a * n));
    auto f = [&](std::span<const double> u) {
        double s = 0, p = 1;
        for (std::size_t i = 0; i < u.size(); ++i) {
            s += u[i] * u[i];
            p *= std::pow(u[i], 2 * a - 1);
            for (std::size_t j = i + 1; j < u.size(); ++j) p *= std::pow(u[j] * u[j] - u[i] * u[i], 2 * gamma);
        }
        return std::exp(-0.5 * s) * p;
    };
    return std::ldexp(factorial, n) * quadrature::integrate_chamber(f, static_cast<std::size_t>(n), 0.0, radius, rel_tol, 1e-15);
}

}  // namespace viciouskit
