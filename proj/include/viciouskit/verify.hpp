#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/random/sobol.hpp>

#include "viciouskit/combinatorics.hpp"
#include "viciouskit/densities.hpp"
#include "viciouskit/montecarlo.hpp"
#include "viciouskit/random.hpp"
#include "viciouskit/rmt.hpp"
#include "viciouskit/special_functions.hpp"
#include "viciouskit/stats.hpp"

namespace viciouskit {

// ---------------------------------------------------------------------------
// Randomized quasi-Monte Carlo over a chamber
// ---------------------------------------------------------------------------

struct QmcEstimate {
    double value = 0;
    double std_error = 0;  // spread across the random shifts
    std::size_t evaluations = 0;
};

// Integral of exp(log_f) over the chamber y_1 < ... < y_n (and 0 < y_1 with
// the wall), by importance sampling with Sobol points under Cranley-Patterson
// shifts. Without the wall the proposal is n independent N(0, sigma2)
// coordinates, sorted. With the wall coordinate j is drawn from the density
// proportional to y^{k_j} e^{-y^2/2 sigma2} on (0, inf) (k_j = powers[j], zero
// if absent) and the draws are sorted; the proposal density of the sorted
// point sums the product over all assignments of draws to coordinates.
template <typename LogDensity>
QmcEstimate chamber_integral_qmc(LogDensity&& log_f, std::size_t n, bool wall, double sigma2, std::size_t points,
                                 std::size_t shifts, std::uint64_t seed, std::vector<double> powers = {}) {
    if (n < 1 || n > 6) throw std::invalid_argument("chamber_integral_qmc: supports 1 <= n <= 6");
    if (!(sigma2 > 0)) throw std::invalid_argument("chamber_integral_qmc: proposal variance must be positive");
    if (points < 1 || shifts < 2) throw std::invalid_argument("chamber_integral_qmc: needs points >= 1 and shifts >= 2");
    powers.resize(n, 0.0);
    const boost::math::normal_distribution<double> normal;
    std::vector<boost::math::gamma_distribution<double>> chi;
    std::vector<double> log_z(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (!(powers[j] >= 0)) throw std::invalid_argument("chamber_integral_qmc: powers must be nonnegative");
        const double shape = 0.5 * (powers[j] + 1);
        chi.emplace_back(shape, 2.0);
        log_z[j] = (shape - 1) * std::log(2.0) + shape * std::log(sigma2) + std::lgamma(shape);
    }
    const double sigma = std::sqrt(sigma2);
    const double log_gauss = std::lgamma(static_cast<double>(n) + 1) - 0.5 * static_cast<double>(n) * std::log(2 * std::numbers::pi * sigma2);
    std::vector<std::size_t> perm(n);

    // log of the sorted-proposal density at y
    auto log_q = [&](std::span<const double> y) {
        const double q2 = detail::squared_norm(y) / (2 * sigma2);
        if (!wall) return log_gauss - q2;
        for (std::size_t j = 0; j < n; ++j) perm[j] = j;
        double best = -std::numeric_limits<double>::infinity();
        std::vector<double> terms;
        do {
            double l = 0;
            for (std::size_t j = 0; j < n; ++j) l += powers[j] * std::log(y[perm[j]]) - log_z[j];
            terms.push_back(l);
            best = std::max(best, l);
        } while (std::next_permutation(perm.begin(), perm.end()));
        double s = 0;
        for (double l : terms) s += std::exp(l - best);
        return best + std::log(s) - q2;
    };

    std::vector<double> means(shifts), y(n), shift(n);
    for (std::size_t r = 0; r < shifts; ++r) {
        RandomStream rng(seed, r, stream_tag::quasi_shift);
        for (double& s : shift) s = rng.uniform();
        boost::random::sobol gen(n);
        constexpr double two64 = 18446744073709551616.0;
        double sum = 0;
        for (std::size_t i = 0; i < points; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                double u = static_cast<double>(gen()) / two64 + shift[k];
                u -= std::floor(u);
                u = std::clamp(u, 1e-300, 1 - 1e-16);
                y[k] = wall ? sigma * std::sqrt(boost::math::quantile(chi[k], u)) : sigma * boost::math::quantile(normal, u);
            }
            std::sort(y.begin(), y.end());
            const double lf = log_f(std::span<const double>(y));
            if (std::isfinite(lf)) sum += std::exp(lf - log_q(y));
        }
        means[r] = sum / static_cast<double>(points);
    }
    QmcEstimate e;
    for (double m : means) e.value += m;
    e.value /= static_cast<double>(shifts);
    double v = 0;
    for (double m : means) v += (m - e.value) * (m - e.value);
    e.std_error = std::sqrt(v / static_cast<double>(shifts - 1) / static_cast<double>(shifts));
    e.evaluations = points * shifts;
    return e;
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

struct Budget {
    double seconds = 3600;          // wall-clock limit for a whole suite
    double sample_factor = 1;       // scales every Monte Carlo sample count
    std::uint64_t seed = 20240611;
    std::size_t threads = 1;
};

struct CheckResult {
    int criterion = 0;
    std::string name;
    std::string suite;
    std::vector<StatReport> reports;
    bool incomplete = false;
    double seconds = 0;
    std::vector<std::string> notes;

    bool pass() const {
        return !incomplete && !reports.empty() &&
               std::all_of(reports.begin(), reports.end(), [](const StatReport& r) { return r.pass; });
    }
};

struct SuiteReport {
    std::string suite;
    std::vector<CheckResult> checks;
    bool incomplete = false;
    double seconds = 0;

    bool pass() const {
        return !incomplete && std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass(); });
    }
};

namespace detail {

inline std::size_t scaled(std::size_t count, const Budget& b) {
    return std::max<std::size_t>(10, static_cast<std::size_t>(std::llround(static_cast<double>(count) * b.sample_factor)));
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline StatReport bound_report(std::string name, double statistic, double bound, std::size_t n = 1) {
    return make_report(std::move(name), statistic, bound, n);
}

// Random point of the chamber with independent N(0, scale^2) coordinates.
inline std::vector<double> random_chamber_point(RandomStream& rng, std::size_t n, bool wall, double scale) {
    std::vector<double> y(n);
    for (;;) {
        for (double& v : y) v = scale * rng.gaussian();
        if (wall)
            for (double& v : y) v = std::abs(v);
        std::sort(y.begin(), y.end());
        if (in_open_chamber(y, wall) && ChamberPoint(y, wall).boundary_distance() > 1e-3 * scale) return y;
    }
}

// KS of every coordinate of a sample against the marginals of a density.
template <typename LogDensity>
void coordinate_ks(std::vector<StatReport>& out, const std::string& label, LogDensity&& log_f, std::size_t n,
                   double lower, double upper, const std::vector<std::vector<double>>& sorted_coords, double level,
                   std::size_t grid_points = 321) {
    const auto grid = uniform_grid(lower, upper, grid_points);
    for (std::size_t i = 0; i < n; ++i) {
        const MarginalTable m = marginalize([&](std::span<const double> y) { return std::exp(log_f(y)); }, n,
                                            Marginal::coordinate(i), lower, upper, grid);
        StatReport r = ks_test(sorted_coords[i], [&](double v) { return m.cdf_at(v); }, level,
                               label + " y" + std::to_string(i + 1));
        r.metadata["marginal_mass"] = fmt(m.mass);
        out.push_back(std::move(r));
    }
}

}  // namespace detail

// 1. Determinant counts against the brute-force oracle.
inline CheckResult check_exact_counts(const Budget&) {
    CheckResult c{1, "exact lattice path counts", "combinatorics"};
    const auto t0 = std::chrono::steady_clock::now();
    constexpr long long max_steps = 10;
    std::size_t compared = 0, mismatches = 0, starts = 0;
    const long long gaps[] = {2, 4, 6};
    for (bool wall : {false, true}) {
        for (std::size_t n = 1; n <= 4; ++n) {
            std::size_t combos = 1;
            for (std::size_t i = 1; i < n; ++i) combos *= 3;
            const std::vector<long long> firsts = wall ? std::vector<long long>{0, 2, 4, 6} : std::vector<long long>{0};
            for (long long first : firsts) {
                for (std::size_t code = 0; code < combos; ++code) {
                    std::vector<long long> pos{first};
                    for (std::size_t i = 1, k = code; i < n; ++i, k /= 3) pos.push_back(pos.back() + gaps[k % 3]);
                    const LatticeConfig u(pos, wall);
                    ++starts;
                    const auto layers = oracle_count_dp_layers(max_steps, u);
                    for (long long m = 0; m <= max_steps; ++m) {
                        const auto row = detail::binomial_row(m);
                        const auto& dp = layers[static_cast<std::size_t>(m)];
                        std::size_t seen = 0;
                        detail::for_each_endpoint(m, u, [&](const LatticeConfig& v) {
                            const BigInt det = detail::count_with_row(row, m, u, v);
                            const auto it = dp.find(v.positions());
                            const BigInt ref = it == dp.end() ? BigInt(0) : it->second;
                            if (it != dp.end()) ++seen;
                            if (det != ref) ++mismatches;
                            ++compared;
                        });
                        mismatches += dp.size() - seen;  // oracle endpoints the enumeration missed
                    }
                }
            }
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    StatReport eq = detail::bound_report("determinant vs oracle mismatches", static_cast<double>(mismatches), 0, compared);
    eq.metadata["starts"] = std::to_string(starts);
    eq.metadata["endpoints_compared"] = std::to_string(compared);
    c.reports.push_back(std::move(eq));
    c.reports.push_back(detail::bound_report("runtime seconds", secs, 60));
    return c;
}

// 2. Pfaffian survival: exact N = 2 reduction and Brownian Monte Carlo.
inline CheckResult check_survival(const Budget& b) {
    CheckResult c{2, "Pfaffian survival", "montecarlo"};
    RandomStream rng(b.seed, 0, stream_tag::exact_draws);
    double worst = 0, worst_wall = 0;
    for (int i = 0; i < 200; ++i) {
        const double t = 0.1 + 2 * rng.uniform();
        const auto y = detail::random_chamber_point(rng, 2, false, 1.5);
        const double exact = psi((y[1] - y[0]) / (2 * std::sqrt(t)));
        worst = std::max(worst, std::abs(survival(t, ChamberPoint(y, false)) - exact) / exact);
        const double x1 = std::abs(y[0]) + 1e-3;
        const double exact1 = psi(x1 / std::sqrt(2 * t));
        worst_wall = std::max(worst_wall, std::abs(survival(t, ChamberPoint({x1}, true)) - exact1) / exact1);
    }
    c.reports.push_back(detail::bound_report("N=2 reduction to Psi, max relative error", worst, 1e-14, 200));
    c.reports.push_back(detail::bound_report("wall N=1 reduction to Psi, max relative error", worst_wall, 1e-14, 200));

    struct Case {
        std::vector<double> x;
        bool wall;
    };
    const Case cases[] = {{{0, 1, 2}, false}, {{1, 2}, true}, {{1, 2, 3}, true}};
    const std::size_t samples = detail::scaled(100000, b);
    const double t = 1, step = 1e-3;
    std::uint64_t k = 0;
    for (const auto& cs : cases) {
        const ChamberPoint x(cs.x, cs.wall);
        const double exact = survival(t, x);
        const NonCollisionEstimate e = noncollision_mc(t, x, samples, step, b.seed + k++, 4, true, b.threads);
        std::string label = std::string(cs.wall ? "wall " : "") + "N=" + std::to_string(cs.x.size()) + " x=(";
        for (std::size_t i = 0; i < cs.x.size(); ++i) label += (i ? "," : "") + detail::fmt(cs.x[i]);
        StatReport r = detail::bound_report(label + ") |MC - Pfaffian|", std::abs(e.estimate - exact),
                                            3 * e.std_error + e.allowance, samples);
        r.metadata["pfaffian"] = detail::fmt(exact);
        r.metadata["estimate"] = detail::fmt(e.estimate);
        r.metadata["std_error"] = detail::fmt(e.std_error);
        r.metadata["allowance"] = detail::fmt(e.allowance);
        r.metadata["step"] = detail::fmt(step);
        c.reports.push_back(std::move(r));
    }
    return c;
}

// 3. Normalization of the four origin-start density families.
inline CheckResult check_normalization(const Budget& b) {
    CheckResult c{3, "density normalization", "identities"};
    struct Family {
        const char* name;
        bool wall;
        bool finite;
    };
    const Family families[] = {{"g", false, true}, {"p", false, false}, {"g_hat", true, true}, {"p_hat", true, false}};
    const double horizon = 1, t_g = 0.5, t_p = 1;
    for (const auto& f : families) {
        const double t = f.finite ? t_g : t_p;
        const ModelSpec spec = f.finite ? ModelSpec::finite(2, horizon, f.wall) : ModelSpec::infinite(2, f.wall);
        const double reach = 12 * std::sqrt(t);
        const double mass = quadrature::integrate_chamber(
            [&](std::span<const double> y) { return std::exp(log_transition_density_origin(spec, t, y)); }, 2,
            f.wall ? 0.0 : -reach, reach, 1e-10, 1e-14);
        c.reports.push_back(detail::bound_report(std::string("N=2 ") + f.name + " |mass - 1| (quadrature)",
                                                 std::abs(mass - 1), 1e-6));
    }
    const std::size_t points = detail::scaled(1 << 15, b);
    std::uint64_t k = 0;
    for (const auto& f : families) {
        const double t = f.finite ? t_g : t_p;
        const ModelSpec spec = f.finite ? ModelSpec::finite(3, horizon, f.wall) : ModelSpec::infinite(3, f.wall);
        // Wall proposal powers k (1, 3, 5): h_hat^2 for p_hat; for g_hat the
        // survival factor adds weight near the wall, and 1.5 k halves the spread.
        const double p = f.finite ? 1.5 : 2;
        const QmcEstimate e = chamber_integral_qmc(
            [&](std::span<const double> y) { return log_transition_density_origin(spec, t, y); }, 3, f.wall,
            f.wall ? t : 2 * t, points, 16, b.seed + 100 + k++, f.wall ? std::vector<double>{p, 3 * p, 5 * p} : std::vector<double>{});
        StatReport r = detail::bound_report(std::string("N=3 ") + f.name + " |mass - 1| (randomized QMC)",
                                            std::abs(e.value - 1), 1e-3, e.evaluations);
        r.metadata["std_error"] = detail::fmt(e.std_error);
        c.reports.push_back(std::move(r));
    }
    return c;
}

// 4. Generalized Imhof relation on random instances.
inline CheckResult check_imhof(const Budget& b) {
    CheckResult c{4, "generalized Imhof relation", "identities"};
    for (bool wall : {false, true}) {
        RandomStream rng(b.seed, wall ? 1 : 0, stream_tag::exact_draws);
        double worst = 0;
        for (int i = 0; i < 100; ++i) {
            const std::size_t n = 1 + static_cast<std::size_t>(i % 3), l = 1 + static_cast<std::size_t>((i / 3) % 3);
            const double horizon = 0.5 + 1.5 * rng.uniform();
            std::vector<double> times{0, horizon};
            for (std::size_t k = 1; k < l; ++k) times.push_back(horizon * (0.05 + 0.9 * rng.uniform()));
            std::sort(times.begin(), times.end());
            std::vector<ChamberPoint> pts;
            for (std::size_t k = 1; k <= l; ++k)
                pts.emplace_back(detail::random_chamber_point(rng, n, wall, std::sqrt(times[k])), wall);
            const ImhofResult r = imhof_check(ModelSpec::finite(static_cast<int>(n), horizon, wall), times, pts);
            worst = std::max(worst, r.residual);
        }
        c.reports.push_back(detail::bound_report(std::string(wall ? "wall" : "no wall") + " max relative residual",
                                                 worst, 1e-8, 100));
    }
    return c;
}

// 5. Endpoint laws against GOE/GUE, pointwise and by sampling.
inline CheckResult check_rmt_identities(const Budget& b) {
    CheckResult c{5, "GOE/GUE identities", "rmt"};
    RandomStream rng(b.seed, 2, stream_tag::exact_draws);
    double worst_goe = 0, worst_gue = 0;
    for (int i = 0; i < 300; ++i) {
        const std::size_t n = 1 + static_cast<std::size_t>(i % 3);
        const double horizon = 0.3 + 2 * rng.uniform(), t = 0.3 + 2 * rng.uniform();
        const double log_fact = std::lgamma(static_cast<double>(n) + 1);
        const auto y = detail::random_chamber_point(rng, n, false, std::sqrt(horizon));
        const double lg = log_g_density_origin(ModelSpec::finite(static_cast<int>(n), horizon, false), horizon, y);
        worst_goe = std::max(worst_goe, std::abs(std::expm1(lg - log_fact - log_eigen_density(Ensemble::goe, y, horizon))));
        const auto z = detail::random_chamber_point(rng, n, false, std::sqrt(t));
        const double lp = log_p_density_origin(ModelSpec::infinite(static_cast<int>(n), false), t, z);
        worst_gue = std::max(worst_gue, std::abs(std::expm1(lp - log_fact - log_eigen_density(Ensemble::gue, z, t))));
    }
    c.reports.push_back(detail::bound_report("g(0,0,T,y) = N! g_GOE(y,T) max relative residual", worst_goe, 1e-10, 300));
    c.reports.push_back(detail::bound_report("p(0,0,t,y) = N! g_GUE(y,t) max relative residual", worst_gue, 1e-10, 300));

    const std::size_t draws = detail::scaled(10000, b);
    const double level = 0.01 / 10;  // 2 + 3 coordinates, two ensembles
    std::uint64_t k = 0;
    for (Ensemble e : {Ensemble::goe, Ensemble::gue}) {
        for (std::size_t n : {2u, 3u}) {
            const SpectrumSample s = sample_ensemble(e, n, 1.0, draws, b.seed + 200 + k++, 4, b.threads);
            std::vector<std::vector<double>> coords;
            for (std::size_t i = 0; i < n; ++i) coords.push_back(s.coordinate(i));
            detail::coordinate_ks(
                c.reports, to_string(e) + " N=" + std::to_string(n) + " sampled vs closed form",
                [&](std::span<const double> y) {
                    return std::lgamma(static_cast<double>(n) + 1) + log_eigen_density(e, y, 1.0);
                },
                n, -9, 9, coords, level);
        }
    }
    return c;
}

// 6. Vicious walker endpoint gap against the limiting law.
inline CheckResult check_fclt(const Budget& b) {
    CheckResult c{6, "walker FCLT endpoint", "montecarlo"};
    const double horizon = 1;
    const ModelSpec spec = ModelSpec::finite(2, horizon, false);
    const auto grid = uniform_grid(0, 8, 801);
    const MarginalTable gap = marginalize(
        [&](std::span<const double> y) { return std::exp(log_g_density_origin(spec, horizon, y)); }, 2,
        Marginal::gap(0), -8, 8, grid);
    auto cdf = [&](double v) { return gap.cdf_at(v); };
    const std::size_t samples = detail::scaled(10000, b);
    std::vector<double> raw;
    StatReport grouped;
    for (double scale : {16.0, 32.0}) {
        SimConfig cfg;
        cfg.model = SimModel::walker;
        cfg.spec = spec;
        cfg.scale = scale;
        cfg.start = LatticeConfig::packed(2, false);
        cfg.samples = samples;
        cfg.seed = b.seed + static_cast<std::uint64_t>(scale);
        cfg.streams = 4;
        cfg.threads = b.threads;
        cfg.grid_points = 2;
        const PathEnsemble ens = simulate_walkers(cfg);
        const auto values = endpoint_values(ens, Functional::gap(0));
        raw.push_back(ks_distance(values, cdf));
        std::vector<double> bounds;
        for (double v = 3 / scale; v < 8; v += 2 / scale) bounds.push_back(v);
        grouped = ks_grouped(values, bounds, cdf, 0.01, "L=" + detail::fmt(scale) + " grouped KS, endpoint gap");
        grouped.metadata["acceptance"] = detail::fmt(static_cast<double>(ens.accepted) / static_cast<double>(ens.proposed));
        grouped.metadata["raw_ks"] = detail::fmt(raw.back());
        grouped.metadata["seed"] = std::to_string(cfg.seed);
        c.notes.push_back("L=" + detail::fmt(scale) + ": raw KS " + detail::fmt(raw.back()) + ", grouped KS " +
                          detail::fmt(grouped.statistic));
    }
    StatReport dec = detail::bound_report("raw KS distance at L=32 below L=16", raw[1], raw[0], samples);
    dec.pass = raw[1] < raw[0];
    c.reports.push_back(std::move(dec));
    c.reports.push_back(std::move(grouped));
    return c;
}

// 7. Dyson SDE endpoints, and the wall N=1 Bessel law.
inline CheckResult check_dyson(const Budget& b) {
    CheckResult c{7, "Dyson SDE endpoints", "montecarlo"};
    const std::size_t samples = detail::scaled(10000, b);
    const double level = 0.01 / 6, t = 1;
    std::size_t violations = 0, states = 0;
    auto run = [&](std::size_t n, bool wall) {
        SimConfig cfg;
        cfg.model = SimModel::sde_p;
        cfg.spec = ModelSpec::infinite(static_cast<int>(n), wall);
        cfg.start = origin;
        cfg.step = 1e-3;
        cfg.end_time = t;
        cfg.samples = samples;
        cfg.seed = b.seed + 300 + n + (wall ? 10 : 0);
        cfg.streams = 4;
        cfg.threads = b.threads;
        cfg.grid_points = 11;
        PathEnsemble ens = simulate_sde(cfg);
        for (std::size_t s = 0; s < ens.samples(); ++s)
            for (std::size_t g = 0; g < ens.time_grid.size(); ++g, ++states)
                if (!detail::in_open_chamber(ens.at(s, g), wall)) ++violations;
        return ens;
    };
    for (std::size_t n : {2u, 3u}) {
        const PathEnsemble ens = run(n, false);
        const ModelSpec spec = ModelSpec::infinite(static_cast<int>(n), false);
        std::vector<std::vector<double>> coords;
        for (std::size_t i = 0; i < n; ++i) coords.push_back(endpoint_values(ens, Functional::coordinate(i)));
        detail::coordinate_ks(
            c.reports, "Dyson N=" + std::to_string(n) + " t=1 endpoint",
            [&](std::span<const double> y) { return log_p_density_origin(spec, t, y); }, n, -9, 9, coords, level);
    }
    const PathEnsemble bessel = run(1, true);
    const auto values = endpoint_values(bessel, Functional::coordinate(0));
    c.reports.push_back(ks_test(
        values,
        [&](double y) {
            if (y <= 0) return 0.0;
            const double z = y / std::sqrt(t);
            return std::erf(z / std::numbers::sqrt2) - std::sqrt(2 / std::numbers::pi) * z * std::exp(-z * z / 2);
        },
        level, "wall N=1 endpoint vs 3-d Bessel law"));
    c.reports.push_back(detail::bound_report("ordering violations at recorded times", static_cast<double>(violations), 0,
                                             states));
    return c;
}

// 8. Small-time asymptotics of the survival probability.
inline CheckResult check_asymptotics(const Budget&) {
    CheckResult c{8, "survival asymptotics", "identities"};
    const double t = 1;
    const double sweep[] = {0.2, 0.1, 0.05};
    for (bool wall : {false, true}) {
        for (std::size_t n = 1; n <= 3; ++n) {
            std::vector<double> shape(n);
            double norm = 0;
            for (std::size_t i = 0; i < n; ++i) {
                shape[i] = wall ? static_cast<double>(i + 1) : static_cast<double>(i) - 0.5 * static_cast<double>(n - 1);
                norm += shape[i] * shape[i];
            }
            if (!wall && n == 1) shape[0] = norm = 1;
            std::vector<double> err;
            for (double eps : sweep) {
                std::vector<double> x(n);
                for (std::size_t i = 0; i < n; ++i) x[i] = shape[i] / std::sqrt(norm) * eps * std::sqrt(t);
                err.push_back(std::abs(1 - survival_asymptotics(t, ChamberPoint(x, wall)).ratio));
            }
            const std::string label = std::string(wall ? "wall " : "") + "N=" + std::to_string(n);
            StatReport r = detail::bound_report(label + " |1 - ratio| at |x|/sqrt(t)=0.05", err.back(), 0.05);
            r.metadata["sweep_errors"] = detail::fmt(err[0]) + "," + detail::fmt(err[1]) + "," + detail::fmt(err[2]);
            c.reports.push_back(std::move(r));
            const double increases = (err[1] > err[0] ? 1.0 : 0.0) + (err[2] > err[1] ? 1.0 : 0.0);
            c.reports.push_back(detail::bound_report(label + " sweep increases", increases, 0, 3));
        }
    }
    return c;
}

// 9. de Bruijn identity.
inline CheckResult check_de_bruijn(const Budget&) {
    CheckResult c{9, "de Bruijn identity", "identities"};
    struct Case {
        std::vector<double> x;
        DeBruijnKernel kernel;
        double tol;
    };
    const Case cases[] = {{{-0.3, 0.8}, DeBruijnKernel::gaussian, 1e-6},
                          {{0.2, 1.4}, DeBruijnKernel::gaussian, 1e-6},
                          {{0.4, 1.1}, DeBruijnKernel::wall_gaussian, 1e-6},
                          {{0.1, 0.9}, DeBruijnKernel::wall_gaussian, 1e-6},
                          {{-0.5, 0.2, 1.0}, DeBruijnKernel::gaussian, 1e-4}};
    for (const auto& cs : cases) {
        const bool wall = cs.kernel == DeBruijnKernel::wall_gaussian;
        const DeBruijnResult r = de_bruijn_check(cs.x.size(), cs.kernel, ChamberPoint(cs.x, wall));
        std::string label = std::string(wall ? "wall kernel" : "Gaussian kernel") + " x=(";
        for (std::size_t i = 0; i < cs.x.size(); ++i) label += (i ? "," : "") + detail::fmt(cs.x[i]);
        StatReport rep = detail::bound_report(label + ") relative residual", r.residual, cs.tol);
        rep.metadata["pfaffian"] = detail::fmt(r.pfaffian);
        rep.metadata["integral"] = detail::fmt(r.integral);
        c.reports.push_back(std::move(rep));
    }
    return c;
}

// 10. Mehta integrals against quadrature.
inline CheckResult check_mehta(const Budget&) {
    CheckResult c{10, "Mehta integrals", "identities"};
    const double gamma = 0.5;
    struct Case {
        MehtaWeight weight;
        double a;
    };
    const Case cases[] = {{MehtaWeight::plain, 0.5}, {MehtaWeight::plain, 1.0},
                          {MehtaWeight::squared_diff_abs, 1.0}, {MehtaWeight::squared_diff_abs, 1.5}};
    for (int n = 1; n <= 3; ++n)
        for (const auto& cs : cases) {
            const double closed = mehta_integral(n, gamma, cs.a, cs.weight);
            const double quad = mehta_integral_quadrature(n, gamma, cs.a, cs.weight);
            const std::string label = std::string(cs.weight == MehtaWeight::plain ? "Gaussian" : "squared-difference") +
                                      " weight N=" + std::to_string(n) + " a=" + detail::fmt(cs.a);
            StatReport r = detail::bound_report(label + " relative error", std::abs(quad - closed) / closed, 1e-6);
            r.metadata["closed_form"] = detail::fmt(closed);
            r.metadata["quadrature"] = detail::fmt(quad);
            c.reports.push_back(std::move(r));
        }
    return c;
}

// 11. Pandey-Mehta bridge.
inline CheckResult check_pm_bridge(const Budget& b) {
    CheckResult c{11, "Pandey-Mehta bridge", "rmt"};
    const std::size_t samples = detail::scaled(10000, b);
    std::uint64_t k = 0;
    for (double t : {0.25, 0.5, 0.75}) {
        const BridgeCheck r = pm_bridge_check(2, 1.0, t, samples, b.seed + 400 + k++, BridgeSource::sde, 0.01 / 3, 1e-3, 4);
        c.reports.insert(c.reports.end(), r.reports.begin(), r.reports.end());
        c.notes.push_back("t=" + detail::fmt(t) + " fitted scale " + detail::fmt(r.fitted_scale));
    }
    return c;
}

// 12. Determinism of the engines across stream scheduling.
inline CheckResult check_determinism(const Budget& b) {
    CheckResult c{12, "determinism", "montecarlo"};
    auto same = [](const PathEnsemble& x, const PathEnsemble& y) {
        return x.paths.size() == y.paths.size() &&
               std::memcmp(x.paths.data(), y.paths.data(), x.paths.size() * sizeof(double)) == 0 &&
               x.proposed == y.proposed && x.config_digest == y.config_digest;
    };
    std::size_t differing = 0, runs = 0;
    SimConfig w;
    w.model = SimModel::walker;
    w.spec = ModelSpec::finite(3, 1.0, true);
    w.scale = 6;
    w.start = LatticeConfig::packed(3, true);
    w.samples = 200;
    w.seed = b.seed;
    w.streams = 4;
    SimConfig s;
    s.model = SimModel::sde_g;
    s.spec = ModelSpec::finite(2, 1.0, false);
    s.start = origin;
    s.step = 1e-2;
    s.samples = 40;
    s.seed = b.seed;
    s.streams = 4;
    for (const SimConfig& base : {w, s}) {
        SimConfig a = base, bb = base;
        a.threads = 1;
        bb.threads = 3;
        const auto run = [](const SimConfig& cfg) {
            return cfg.model == SimModel::walker ? simulate_walkers(cfg) : simulate_sde(cfg);
        };
        const PathEnsemble x = run(a), y = run(a), z = run(bb);
        differing += !same(x, y);
        differing += !same(x, z);
        runs += 3;
    }
    const SpectrumSample p = sample_ensemble(Ensemble::pm, 3, 0.5, 300, b.seed, 4, 1);
    const SpectrumSample q = sample_ensemble(Ensemble::pm, 3, 0.5, 300, b.seed, 4, 3);
    differing += p.eigenvalues != q.eigenvalues;
    const NonCollisionEstimate e1 = noncollision_mc(1, ChamberPoint({0, 1, 2}, false), 2000, 1e-2, b.seed, 4, true, 1);
    const NonCollisionEstimate e2 = noncollision_mc(1, ChamberPoint({0, 1, 2}, false), 2000, 1e-2, b.seed, 4, true, 3);
    differing += e1.estimate != e2.estimate || e1.std_error != e2.std_error;
    runs += 4;
    c.reports.push_back(detail::bound_report("repeated runs with differing output", static_cast<double>(differing), 0, runs));
    return c;
}

// ---------------------------------------------------------------------------

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"identities", "combinatorics", "montecarlo", "rmt", "all"};
    return names;
}

struct CheckEntry {
    int criterion;
    const char* suite;
    CheckResult (*run)(const Budget&);
};

inline const std::vector<CheckEntry>& check_table() {
    static const std::vector<CheckEntry> table{
        {1, "combinatorics", check_exact_counts}, {2, "montecarlo", check_survival},
        {3, "identities", check_normalization},   {4, "identities", check_imhof},
        {5, "rmt", check_rmt_identities},         {6, "montecarlo", check_fclt},
        {7, "montecarlo", check_dyson},           {8, "identities", check_asymptotics},
        {9, "identities", check_de_bruijn},       {10, "identities", check_mehta},
        {11, "rmt", check_pm_bridge},             {12, "montecarlo", check_determinism}};
    return table;
}

// Runs the checks of a suite in criterion order. Once the time budget is
// spent the remaining checks are recorded as incomplete. `only`, if
// nonempty, restricts the run to the listed criteria.
inline SuiteReport verify_suite(const std::string& suite, const Budget& budget, const std::vector<int>& only = {}) {
    if (std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end())
        throw std::invalid_argument("verify_suite: unknown suite '" + suite +
                                    "' (expected identities, combinatorics, montecarlo, rmt or all)");
    SuiteReport out;
    out.suite = suite;
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
    for (const auto& e : check_table()) {
        if (suite != "all" && suite != e.suite) continue;
        if (!only.empty() && std::find(only.begin(), only.end(), e.criterion) == only.end()) continue;
        if (elapsed() > budget.seconds) {
            CheckResult c{e.criterion, "not run", e.suite};
            c.incomplete = true;
            c.notes.push_back("time budget exhausted before this check started");
            out.incomplete = true;
            out.checks.push_back(std::move(c));
            continue;
        }
        const double before = elapsed();
        CheckResult c = e.run(budget);
        c.seconds = elapsed() - before;
        out.checks.push_back(std::move(c));
    }
    out.seconds = elapsed();
    return out;
}

}  // namespace viciouskit
