#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "viciouskit/linalg.hpp"
#include "viciouskit/special_functions.hpp"

namespace viciouskit {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Walker configuration on the integer lattice.
//
// Starting configurations must be even, strictly increasing and (with the
// wall) nonnegative. Endpoints are built with `endpoint`, which accepts any
// integers: an infeasible endpoint simply has count zero.
class LatticeConfig {
public:
    LatticeConfig() = default;
    LatticeConfig(std::vector<long long> positions, bool wall) : positions_(std::move(positions)), wall_(wall) {
        for (std::size_t i = 0; i < positions_.size(); ++i) {
            if (positions_[i] % 2 != 0) throw std::invalid_argument("LatticeConfig: positions must be even");
            if (i > 0 && positions_[i] <= positions_[i - 1])
                throw std::invalid_argument("LatticeConfig: positions must be strictly increasing");
        }
        if (wall_ && !positions_.empty() && positions_[0] < 0)
            throw std::invalid_argument("LatticeConfig: wall configuration requires positions[0] >= 0");
    }

    static LatticeConfig endpoint(std::vector<long long> positions, bool wall) {
        LatticeConfig c;
        c.positions_ = std::move(positions);
        c.wall_ = wall;
        return c;
    }

    // Evenly spaced start 0, 2, 4, ...
    static LatticeConfig packed(std::size_t n, bool wall) {
        std::vector<long long> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = 2 * static_cast<long long>(i);
        return LatticeConfig(std::move(p), wall);
    }

    std::size_t size() const { return positions_.size(); }
    bool wall() const { return wall_; }
    long long operator[](std::size_t i) const { return positions_[i]; }
    const std::vector<long long>& positions() const { return positions_; }

    // True when the configuration lies in the (wall) chamber.
    bool in_chamber() const {
        for (std::size_t i = 1; i < positions_.size(); ++i)
            if (positions_[i] <= positions_[i - 1]) return false;
        return !(wall_ && !positions_.empty() && positions_[0] < 0);
    }

private:
    std::vector<long long> positions_;
    bool wall_ = false;
};

struct WalkCount {
    BigInt value;
    long long steps = 0;
    std::size_t n_walkers = 0;

    std::string str() const { return value.str(); }
};

namespace detail {

inline void check_pair(long long m, const LatticeConfig& u, const LatticeConfig& v) {
    if (m < 0) throw std::invalid_argument("count_paths: number of steps must be nonnegative");
    if (u.size() != v.size()) throw std::invalid_argument("count_paths: start and end lengths differ");
    if (u.wall() != v.wall()) throw std::invalid_argument("count_paths: wall flags differ");
}

// Row m of Pascal's triangle.
inline std::vector<BigInt> binomial_row(long long m) {
    std::vector<BigInt> row(static_cast<std::size_t>(m) + 1);
    row[0] = 1;
    for (long long k = 1; k <= m; ++k) row[k] = row[k - 1] * (m - k + 1) / k;
    return row;
}

inline BigInt binom_from_row(const std::vector<BigInt>& row, long long m, long long k) {
    if (k < 0 || k > m) return 0;
    return row[static_cast<std::size_t>(k)];
}

// Number of single-walker paths of m steps from a to b (staying >= 0 with the wall).
inline BigInt single_paths(const std::vector<BigInt>& row, long long m, long long a, long long b, bool wall) {
    const long long d = m + a - b;
    if (d % 2 != 0) return 0;
    BigInt c = binom_from_row(row, m, d / 2);
    if (wall) c -= binom_from_row(row, m, (m + a + b) / 2 + 1);
    return c;
}

// Fraction-free Gaussian elimination; exact determinant of an integer matrix.
inline BigInt bareiss_determinant(std::vector<std::vector<BigInt>> a) {
    const std::size_t n = a.size();
    if (n == 0) return 1;
    int sign = 1;
    BigInt prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (a[k][k] == 0) {
            std::size_t p = k + 1;
            while (p < n && a[p][k] == 0) ++p;
            if (p == n) return 0;
            std::swap(a[p], a[k]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        }
        prev = a[k][k];
    }
    return sign * a[n - 1][n - 1];
}

inline BigInt count_with_row(const std::vector<BigInt>& row, long long m, const LatticeConfig& u,
                             const LatticeConfig& v) {
    const std::size_t n = u.size();
    if (!v.in_chamber()) return 0;
    std::vector<std::vector<BigInt>> a(n, std::vector<BigInt>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i][j] = single_paths(row, m, u[j], v[i], u.wall());
    return bareiss_determinant(std::move(a));
}

// Calls f(v) for every strictly increasing endpoint reachable from u in m
// steps with the right parity, in lexicographic order.
template <typename F>
void for_each_endpoint(long long m, const LatticeConfig& u, F&& f) {
    const std::size_t n = u.size();
    std::vector<long long> v(n);
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == n) {
            f(LatticeConfig::endpoint(v, u.wall()));
            return;
        }
        long long lo = u[i] - m;
        if (i > 0) lo = std::max(lo, v[i - 1] + 2);  // same parity as the previous coordinate
        if (u.wall()) lo = std::max(lo, (u[i] + m) % 2 == 0 ? 0LL : 1LL);
        for (long long x = lo; x <= u[i] + m; x += 2) {
            v[i] = x;
            rec(i + 1);
        }
    };
    rec(0);
}

}  // namespace detail

// Number of N-tuples of nonintersecting m-step lattice paths from u to v.
inline WalkCount count_paths(long long m, const LatticeConfig& u, const LatticeConfig& v) {
    detail::check_pair(m, u, v);
    const auto row = detail::binomial_row(m);
    return {detail::count_with_row(row, m, u, v), m, u.size()};
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

// count / 2^{mN}, exact and reduced.
inline Rational walk_probability(long long m, const LatticeConfig& u, const LatticeConfig& v) {
    const WalkCount c = count_paths(m, u, v);
    return Rational(c.value, BigInt(1) << static_cast<unsigned>(m * static_cast<long long>(u.size())));
}

// Total number of nonintersecting m-step path tuples starting at u.
inline BigInt survival_count(long long m, const LatticeConfig& u) {
    if (m < 0) throw std::invalid_argument("survival_probability: number of steps must be nonnegative");
    const auto row = detail::binomial_row(m);
    BigInt total = 0;
    detail::for_each_endpoint(m, u, [&](const LatticeConfig& v) { total += detail::count_with_row(row, m, u, v); });
    return total;
}

inline Rational survival_probability(long long m, const LatticeConfig& u) {
    return Rational(survival_count(m, u), BigInt(1) << static_cast<unsigned>(m * static_cast<long long>(u.size())));
}

// Brute-force dynamic program over joint configurations; independent of the
// determinant route. Element j holds the counts of every endpoint reachable
// in j steps, j = 0..m.
inline std::vector<std::map<std::vector<long long>, BigInt>> oracle_count_dp_layers(long long m,
                                                                                     const LatticeConfig& u) {
    const std::size_t n = u.size();
    if (n > 4 || m > 12) throw std::invalid_argument("oracle_count_dp: instance too large (needs N <= 4, m <= 12)");
    if (m < 0) throw std::invalid_argument("oracle_count_dp: number of steps must be nonnegative");
    std::vector<std::map<std::vector<long long>, BigInt>> layers{{{u.positions(), BigInt(1)}}};
    for (long long step = 0; step < m; ++step) {
        std::map<std::vector<long long>, BigInt> next;
        for (const auto& [pos, count] : layers.back()) {
            for (unsigned mask = 0; mask < (1u << n); ++mask) {
                std::vector<long long> q(pos);
                for (std::size_t i = 0; i < n; ++i) q[i] += (mask >> i) & 1u ? 1 : -1;
                bool ok = !(u.wall() && n > 0 && q[0] < 0);
                for (std::size_t i = 1; ok && i < n; ++i) ok = q[i] > q[i - 1];
                if (ok) next[q] += count;
            }
        }
        layers.push_back(std::move(next));
    }
    return layers;
}

inline std::map<std::vector<long long>, BigInt> oracle_count_dp(long long m, const LatticeConfig& u) {
    return std::move(oracle_count_dp_layers(m, u).back());
}

inline WalkCount oracle_count_dp(long long m, const LatticeConfig& u, const LatticeConfig& v) {
    detail::check_pair(m, u, v);
    const auto all = oracle_count_dp(m, u);
    const auto it = all.find(v.positions());
    return {it == all.end() ? BigInt(0) : it->second, m, u.size()};
}

// phi_L(x) = 2 floor(L x / 2)
inline long long lattice_floor(double scale, double x) { return 2 * static_cast<long long>(std::floor(scale * x / 2.0)); }

struct ScaledSurvival {
    long long steps = 0;
    double exact = 0;       // survival probability at m = phi_{L^2}(t)
    double predicted = 0;   // h_N(u/(L sqrt t))/c_bar_N or the wall analogue
    double ratio = 0;       // exact / predicted
    bool exact_arithmetic = true;
    std::optional<Rational> exact_rational;
    std::string advisory;
};

// Work estimate used to decide between exact and floating evaluation.
inline double survival_work_estimate(long long m, const LatticeConfig& u) {
    const double n = static_cast<double>(u.size());
    double configs = 1;
    for (std::size_t i = 0; i < u.size(); ++i) configs *= static_cast<double>(m + 1);
    double fact = 1;
    for (std::size_t k = 2; k <= u.size(); ++k) fact *= static_cast<double>(k);
    // ordered endpoints, N^3 bignum operations each, word count ~ m/64
    return configs / fact * n * n * n * (1.0 + static_cast<double>(m) / 64.0);
}

// h_N(u/(L sqrt t))/c_bar_N, or h_hat_N/c_tilde_N with the wall.
inline double asymptotic_survival(double scale, double t, const LatticeConfig& u) {
    const std::size_t n = u.size();
    if (n == 0) return 1.0;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(u[i]) / (scale * std::sqrt(t));
    const ModelConstants k = constants(static_cast<int>(n));
    return u.wall() ? h_hat_poly(x) / k.c_tilde : h_poly(x) / k.c_bar;
}

inline ScaledSurvival scaled_survival(double scale, double t, const LatticeConfig& u, double exact_budget = 5e9) {
    if (!(scale >= 1.0)) throw std::invalid_argument("scaled_survival: scale L must be >= 1");
    if (!(t > 0.0)) throw std::invalid_argument("scaled_survival: time must be positive");
    ScaledSurvival out;
    out.steps = lattice_floor(scale * scale, t);
    const long long m = out.steps;
    const std::size_t n = u.size();

    out.predicted = asymptotic_survival(scale, t, u);

    if (survival_work_estimate(m, u) <= exact_budget) {
        out.exact_rational = survival_probability(m, u);
        out.exact = to_double(*out.exact_rational);
    } else {
        // Floating determinants of single-walker transition probabilities.
        out.exact_arithmetic = false;
        auto log_binom = [m](long long j) {
            return std::lgamma(m + 1.0) - std::lgamma(j + 1.0) - std::lgamma(m - j + 1.0);
        };
        auto prob = [&](long long a, long long b) {
            const long long d = m + a - b;
            if (d % 2 != 0) return 0.0;
            const long long j = d / 2;
            double p = (j < 0 || j > m) ? 0.0 : std::exp(log_binom(j) - m * std::log(2.0));
            if (u.wall()) {
                const long long j2 = (m + a + b) / 2 + 1;
                if (j2 >= 0 && j2 <= m) p -= std::exp(log_binom(j2) - m * std::log(2.0));
            }
            return p;
        };
        double total = 0, worst = 1;
        detail::for_each_endpoint(m, u, [&](const LatticeConfig& v) {
            Matrix a(n, n);
            double scale_prod = 1;
            for (std::size_t i = 0; i < n; ++i) {
                double row_max = 0;
                for (std::size_t j = 0; j < n; ++j) {
                    a(i, j) = prob(u[j], v[i]);
                    row_max = std::max(row_max, std::abs(a(i, j)));
                }
                scale_prod *= row_max;
            }
            const double d = determinant(a);
            total += d;
            if (d > 0 && scale_prod > 0) worst = std::max(worst, scale_prod / d);
        });
        out.exact = total;
        out.advisory = "floating-point determinants used (exact budget exceeded); worst row-scale/determinant ratio " +
                       std::to_string(worst) + (worst > 1e8 ? " - result may be inaccurate" : "");
    }
    out.ratio = out.exact / out.predicted;
    return out;
}

}  // namespace viciouskit
