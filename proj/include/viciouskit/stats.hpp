#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "viciouskit/quadrature.hpp"

namespace viciouskit {

struct Histogram {
    std::vector<double> edges;        // strictly ascending, bins + 1 entries
    std::vector<std::size_t> counts;  // one per bin
    std::size_t total = 0;
};

// Equal-width bins over [min, max] of the values; a degenerate range gets a
// unit-width window around the common value.
inline Histogram make_histogram(std::span<const double> values, std::size_t bins) {
    if (values.empty()) throw std::invalid_argument("histogram: no values");
    if (bins == 0) throw std::invalid_argument("histogram: need at least one bin");
    auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    double lo = *mn, hi = *mx;
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    h.counts.assign(bins, 0);
    for (double v : values) {
        auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
        ++h.counts[std::min(b, bins - 1)];
    }
    h.total = values.size();
    return h;
}

struct StatReport {
    std::string test_name;
    double statistic = 0;
    double critical_value = 0;
    std::size_t n_samples = 0;
    bool pass = false;
    std::map<std::string, std::string> metadata;

    std::string verdict() const { return pass ? "pass" : "fail"; }
};

inline StatReport make_report(std::string name, double statistic, double critical, std::size_t n) {
    StatReport r;
    r.test_name = std::move(name);
    r.statistic = statistic;
    r.critical_value = critical;
    r.n_samples = n;
    r.pass = statistic <= critical;  // NaN fails
    return r;
}

// Asymptotic Kolmogorov critical coefficient c(alpha) = sqrt(-ln(alpha/2)/2);
// 1.63 at the 1% level.
inline double ks_coefficient(double alpha) {
    if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("ks: level must lie in (0, 1)");
    return std::sqrt(-0.5 * std::log(alpha / 2));
}

inline double ks_critical_value(double alpha, std::size_t n) { return ks_coefficient(alpha) / std::sqrt(static_cast<double>(n)); }

inline double ks_two_sample_critical_value(double alpha, std::size_t n, std::size_t m) {
    const double dn = static_cast<double>(n), dm = static_cast<double>(m);
    return ks_coefficient(alpha) * std::sqrt((dn + dm) / (dn * dm));
}

namespace detail {
inline void check_sorted_sample(std::span<const double> s, const char* who) {
    if (s.size() < 10) throw std::invalid_argument(std::string(who) + ": needs at least 10 samples");
    if (!std::is_sorted(s.begin(), s.end())) throw std::invalid_argument(std::string(who) + ": samples must be sorted");
}
}  // namespace detail

// One-sample Kolmogorov-Smirnov distance sup |F_n - F|.
template <typename Cdf>
double ks_distance(std::span<const double> sorted, Cdf&& cdf) {
    const double n = static_cast<double>(sorted.size());
    double d = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max({d, (static_cast<double>(i) + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

template <typename Cdf>
StatReport ks_test(std::span<const double> sorted, Cdf&& cdf, double alpha = 0.01, std::string name = "ks") {
    detail::check_sorted_sample(sorted, "ks_test");
    return make_report(std::move(name), ks_distance(sorted, cdf), ks_critical_value(alpha, sorted.size()),
                       sorted.size());
}

inline double ks_two_sample_distance(std::span<const double> a_sorted, std::span<const double> b_sorted) {
    const double n = static_cast<double>(a_sorted.size()), m = static_cast<double>(b_sorted.size());
    std::size_t i = 0, j = 0;
    double d = 0;
    while (i < a_sorted.size() && j < b_sorted.size()) {
        const double v = std::min(a_sorted[i], b_sorted[j]);
        while (i < a_sorted.size() && a_sorted[i] == v) ++i;
        while (j < b_sorted.size() && b_sorted[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    return d;
}

inline StatReport ks_two_sample(std::span<const double> a_sorted, std::span<const double> b_sorted,
                                double alpha = 0.01, std::string name = "ks2") {
    detail::check_sorted_sample(a_sorted, "ks_two_sample");
    detail::check_sorted_sample(b_sorted, "ks_two_sample");
    return make_report(std::move(name), ks_two_sample_distance(a_sorted, b_sorted),
                       ks_two_sample_critical_value(alpha, a_sorted.size(), b_sorted.size()),
                       std::min(a_sorted.size(), b_sorted.size()));
}

// Grouped KS for lattice-valued samples: the empirical and model CDFs are
// compared only at cell boundaries that separate the lattice values.
template <typename Cdf>
double ks_grouped_distance(std::span<const double> sorted, std::span<const double> boundaries, Cdf&& cdf) {
    const double n = static_cast<double>(sorted.size());
    double d = 0;
    for (double b : boundaries) {
        const auto below = static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), b) - sorted.begin());
        d = std::max(d, std::abs(below / n - cdf(b)));
    }
    return d;
}

template <typename Cdf>
StatReport ks_grouped(std::span<const double> sorted, std::span<const double> boundaries, Cdf&& cdf,
                      double alpha = 0.01, std::string name = "ks_grouped") {
    detail::check_sorted_sample(sorted, "ks_grouped");
    return make_report(std::move(name), ks_grouped_distance(sorted, boundaries, cdf),
                       ks_critical_value(alpha, sorted.size()), sorted.size());
}

// ---------------------------------------------------------------------------
// Marginals of chamber densities
// ---------------------------------------------------------------------------

struct Marginal {
    enum class Kind { coordinate, gap };
    Kind kind = Kind::coordinate;
    std::size_t index = 0;  // coordinate y_index, or gap y_{index+1} - y_index

    static Marginal coordinate(std::size_t i) { return {Kind::coordinate, i}; }
    static Marginal gap(std::size_t i) { return {Kind::gap, i}; }
};

struct MarginalTable {
    std::vector<double> grid;
    std::vector<double> density;
    std::vector<double> cdf;  // normalized by `mass`
    double mass = 0;          // integral of the tabulated density
    double normalization_drift() const { return std::abs(mass - 1.0); }

    double cdf_at(double x) const {
        if (x <= grid.front()) return 0.0;
        if (x >= grid.back()) return 1.0;
        const auto it = std::upper_bound(grid.begin(), grid.end(), x);
        const std::size_t j = static_cast<std::size_t>(it - grid.begin());
        const double w = (x - grid[j - 1]) / (grid[j] - grid[j - 1]);
        return (1 - w) * cdf[j - 1] + w * cdf[j];
    }

    double density_at(double x) const {
        if (x < grid.front() || x > grid.back()) return 0.0;
        const auto it = std::upper_bound(grid.begin(), grid.end(), x);
        const std::size_t j = std::min(static_cast<std::size_t>(it - grid.begin()), grid.size() - 1);
        const double w = (x - grid[j - 1]) / (grid[j] - grid[j - 1]);
        return (1 - w) * density[j - 1] + w * density[j];
    }
};

// Marginal of the selected coordinate or gap of a density on the chamber
// lower < y_1 < ... < y_n < upper. The density is integrated out by nested
// quadrature at every grid point; the CDF is the cumulative trapezoid sum.
// N <= 3.
template <typename Density>
MarginalTable marginalize(Density&& f, std::size_t n, Marginal which, double lower, double upper,
                          std::span<const double> grid, double rel_tol = 1e-8, double abs_tol = 1e-13) {
    if (n < 1 || n > 3) throw std::invalid_argument("marginalize: supports 1 <= N <= 3");
    if (grid.size() < 2 || !std::is_sorted(grid.begin(), grid.end()))
        throw std::invalid_argument("marginalize: grid must be ascending with at least two points");
    if (which.kind == Marginal::Kind::coordinate && which.index >= n)
        throw std::invalid_argument("marginalize: coordinate index out of range");
    if (which.kind == Marginal::Kind::gap && which.index + 1 >= n)
        throw std::invalid_argument("marginalize: gap index out of range");

    std::vector<double> y(n);
    auto at = [&](double v) -> double {
        if (which.kind == Marginal::Kind::coordinate) {
            const std::size_t k = which.index;
            if (v <= lower || v >= upper) return 0.0;
            auto outer = [&](std::span<const double> a) {
                for (std::size_t i = 0; i < k; ++i) y[i] = a[i];
                y[k] = v;
                return quadrature::integrate_chamber(
                    [&](std::span<const double> b) {
                        for (std::size_t i = 0; i < b.size(); ++i) y[k + 1 + i] = b[i];
                        return f(std::span<const double>(y));
                    },
                    n - 1 - k, v, upper, rel_tol, abs_tol);
            };
            return quadrature::integrate_chamber(outer, k, lower, v, rel_tol, abs_tol);
        }
        const std::size_t k = which.index;
        if (v <= 0) return 0.0;
        return quadrature::integrate_chamber(
            [&](std::span<const double> w) {
                for (std::size_t i = 0; i <= k; ++i) y[i] = w[i];
                y[k + 1] = w[k] + v;
                for (std::size_t i = k + 1; i < w.size(); ++i) y[i + 1] = w[i] + v;
                return f(std::span<const double>(y));
            },
            n - 1, lower, upper, rel_tol, abs_tol);
    };

    MarginalTable t;
    t.grid.assign(grid.begin(), grid.end());
    t.density.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) t.density[i] = at(grid[i]);
    t.cdf.assign(grid.size(), 0.0);
    for (std::size_t i = 1; i < grid.size(); ++i)
        t.cdf[i] = t.cdf[i - 1] + 0.5 * (t.density[i] + t.density[i - 1]) * (grid[i] - grid[i - 1]);
    t.mass = t.cdf.back();
    if (t.mass > 0)
        for (double& c : t.cdf) c /= t.mass;
    return t;
}

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
    if (points < 2) throw std::invalid_argument("uniform_grid: need at least two points");
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    return g;
}

}  // namespace viciouskit
