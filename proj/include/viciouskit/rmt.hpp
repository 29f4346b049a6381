#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "viciouskit/densities.hpp"
#include "viciouskit/linalg.hpp"
#include "viciouskit/montecarlo.hpp"
#include "viciouskit/random.hpp"
#include "viciouskit/special_functions.hpp"
#include "viciouskit/stats.hpp"

namespace viciouskit {

enum class Ensemble { goe, gue, pm };

inline std::string to_string(Ensemble e) {
    switch (e) {
        case Ensemble::goe: return "GOE";
        case Ensemble::gue: return "GUE";
        case Ensemble::pm: return "PM";
    }
    return "?";
}

struct SpectrumSample {
    Ensemble ensemble = Ensemble::goe;
    double variance = 1;  // sigma^2 (GOE/GUE)
    double alpha = 0;     // PM only
    std::size_t n = 0;
    std::vector<double> eigenvalues;  // [draw][index], each row ascending

    std::size_t draws() const { return n == 0 ? 0 : eigenvalues.size() / n; }
    std::span<const double> row(std::size_t d) const { return {eigenvalues.data() + d * n, n}; }

    // Sorted values of eigenvalue `index` across draws.
    std::vector<double> coordinate(std::size_t index) const {
        std::vector<double> v(draws());
        for (std::size_t d = 0; d < v.size(); ++d) v[d] = eigenvalues[d * n + index];
        std::sort(v.begin(), v.end());
        return v;
    }
};

// Variance of the PM ensemble's reference scale, v^2 = 1/(2(1 + alpha^2)).
inline double pm_v2(double alpha) { return 1.0 / (2.0 * (1.0 + alpha * alpha)); }

namespace detail {

// Real symmetric draw under exp(-Tr H^2 / (2 s2)): diagonal variance s2,
// off-diagonal variance s2/2.
inline void add_goe(Matrix& h, double s2, RandomStream& rng) {
    const std::size_t n = h.rows();
    const double sd = std::sqrt(s2), so = std::sqrt(s2 / 2);
    for (std::size_t i = 0; i < n; ++i) {
        h(i, i) += sd * rng.gaussian();
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = so * rng.gaussian();
            h(i, j) += v;
            h(j, i) += v;
        }
    }
}

// Hermitian draw under the same weight: diagonal variance s2, real and
// imaginary off-diagonal parts variance s2/2 each.
inline void add_gue(ComplexMatrix& h, double s2, RandomStream& rng) {
    const std::size_t n = h.rows();
    const double sd = std::sqrt(s2), so = std::sqrt(s2 / 2);
    for (std::size_t i = 0; i < n; ++i) {
        h(i, i) += sd * rng.gaussian();
        for (std::size_t j = i + 1; j < n; ++j) {
            const double re = so * rng.gaussian(), im = so * rng.gaussian();
            h(i, j) += std::complex<double>(re, im);
            h(j, i) += std::complex<double>(re, -im);
        }
    }
}

}  // namespace detail

// `parameter` is sigma^2 for GOE/GUE and alpha for PM.
inline SpectrumSample sample_ensemble(Ensemble kind, std::size_t n, double parameter, std::size_t samples,
                                      std::uint64_t seed, std::size_t streams = 1, std::size_t threads = 1) {
    if (n < 1) throw std::invalid_argument("sample_ensemble: N must be >= 1");
    if (streams < 1) throw std::invalid_argument("sample_ensemble: need at least one stream");
    if (kind == Ensemble::pm) {
        if (!(parameter >= 0 && parameter <= 1)) throw std::invalid_argument("sample_ensemble: PM requires alpha in [0, 1]");
    } else if (!(parameter > 0)) {
        throw std::invalid_argument("sample_ensemble: variance must be positive");
    }
    SpectrumSample out;
    out.ensemble = kind;
    out.n = n;
    if (kind == Ensemble::pm) {
        out.alpha = parameter;
        out.variance = pm_v2(parameter);
    } else {
        out.variance = parameter;
    }
    std::vector<std::vector<double>> parts(streams);
    detail::run_streams(streams, threads, [&](std::size_t s) {
        RandomStream rng(seed, s, stream_tag::matrices);
        const std::size_t want = detail::quota(samples, streams, s);
        parts[s].reserve(want * n);
        for (std::size_t d = 0; d < want; ++d) {
            std::vector<double> ev;
            if (kind == Ensemble::goe) {
                Matrix h(n, n);
                detail::add_goe(h, parameter, rng);
                ev = symmetric_eigenvalues(h);
            } else {
                ComplexMatrix h(n, n);
                double gue_var = parameter;
                if (kind == Ensemble::pm) {
                    const double a = parameter, v2 = pm_v2(a);
                    gue_var = 2 * a * a * v2;
                    Matrix goe(n, n);
                    detail::add_goe(goe, 2 * (1 - a * a) * v2, rng);
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < n; ++j) h(i, j) = goe(i, j);
                }
                if (gue_var > 0) detail::add_gue(h, gue_var, rng);
                ev = symmetric_eigenvalues(h);
            }
            parts[s].insert(parts[s].end(), ev.begin(), ev.end());
        }
    });
    for (auto& p : parts) out.eigenvalues.insert(out.eigenvalues.end(), p.begin(), p.end());
    return out;
}

// Ordered-eigenvalue densities
//   GOE: (c_N/N!) s^{-N(N+1)/2} e^{-|x|^2/2s^2} |h_N(x)|
//   GUE: (c'_N/N!) s^{-N^2} e^{-|x|^2/2s^2} h_N(x)^2
// with s^2 the variance.
inline double log_eigen_density(Ensemble kind, std::span<const double> x, double variance) {
    if (kind == Ensemble::pm) throw std::invalid_argument("eigen_density: no closed form for the PM ensemble");
    if (!(variance > 0)) throw std::invalid_argument("eigen_density: variance must be positive");
    if (x.empty()) throw std::invalid_argument("eigen_density: empty point");
    if (!std::is_sorted(x.begin(), x.end())) throw std::invalid_argument("eigen_density: point must be ascending");
    const double n = static_cast<double>(x.size());
    const ModelConstants c = constants(static_cast<int>(x.size()));
    const double log_fact = std::lgamma(n + 1);
    const double lh = log_abs_h_poly(x);
    const double gauss = -detail::squared_norm(x) / (2 * variance);
    if (kind == Ensemble::goe) return c.log_c - log_fact - n * (n + 1) / 4.0 * std::log(variance) + gauss + lh;
    return c.log_c_prime - log_fact - n * n / 2.0 * std::log(variance) + gauss + 2 * lh;
}

inline double eigen_density(Ensemble kind, const ChamberPoint& x, double variance) {
    return std::exp(log_eigen_density(kind, x.coords(), variance));
}

// Where the comparison sample comes from in pm_bridge_check.
enum class BridgeSource { sde, exact };

struct BridgeCheck {
    std::vector<StatReport> reports;
    double fitted_scale = 1;  // sqrt(E|b|^2 / E|a|^2), diagnostic only
    bool pass() const {
        return std::all_of(reports.begin(), reports.end(), [](const StatReport& r) { return r.pass; });
    }
};

// Two-sample KS between PM(alpha = sqrt((T-t)/T)) spectra and
// sqrt(T/(t(2T-t))) X(t) with X(0) = 0, per coordinate and for the maximum.
// Levels are Bonferroni-adjusted over the N + 1 tests.
inline BridgeCheck pm_bridge_check(std::size_t n, double horizon, double t, std::size_t samples, std::uint64_t seed,
                                   BridgeSource source = BridgeSource::sde, double alpha_level = 0.01,
                                   double step = 1e-3, std::size_t streams = 1) {
    if (n < 1 || n > 3) throw std::invalid_argument("pm_bridge_check: supports 1 <= N <= 3");
    if (!(t > 0 && t < horizon)) throw std::invalid_argument("pm_bridge_check: requires 0 < t < T");
    if (samples < 10) throw std::invalid_argument("pm_bridge_check: needs at least 10 samples");
    const double alpha = std::sqrt((horizon - t) / horizon);
    const double rescale = std::sqrt(horizon / (t * (2 * horizon - t)));
    const SpectrumSample pm = sample_ensemble(Ensemble::pm, n, alpha, samples, seed, streams);

    const ModelSpec spec = ModelSpec::finite(static_cast<int>(n), horizon, false);
    std::vector<double> xs(samples * n);
    if (source == BridgeSource::sde) {
        SimConfig cfg;
        cfg.model = SimModel::sde_g;
        cfg.spec = spec;
        cfg.start = origin;
        cfg.step = step;
        cfg.end_time = t;
        cfg.samples = samples;
        cfg.seed = seed;
        cfg.streams = streams;
        cfg.grid_points = 2;
        const PathEnsemble ens = simulate_sde(cfg);
        for (std::size_t s = 0; s < samples; ++s)
            for (std::size_t i = 0; i < n; ++i) xs[s * n + i] = ens.endpoint(s)[i] * rescale;
    } else {
        RandomStream rng(seed, 0, stream_tag::exact_draws);
        OriginSampler sampler(spec, t);
        for (std::size_t s = 0; s < samples; ++s) {
            const auto y = sampler.draw(rng);
            for (std::size_t i = 0; i < n; ++i) xs[s * n + i] = y[i] * rescale;
        }
    }

    BridgeCheck out;
    double ma = 0, mb = 0;
    for (double v : pm.eigenvalues) ma += v * v;
    for (double v : xs) mb += v * v;
    out.fitted_scale = std::sqrt(mb / ma);

    const double level = alpha_level / static_cast<double>(n + 1);
    auto meta = [&](StatReport& r) {
        std::ostringstream os;
        os.precision(17);
        os << out.fitted_scale;
        r.metadata["seed"] = std::to_string(seed);
        r.metadata["N"] = std::to_string(n);
        r.metadata["T"] = std::to_string(horizon);
        r.metadata["t"] = std::to_string(t);
        r.metadata["alpha"] = std::to_string(alpha);
        r.metadata["source"] = source == BridgeSource::sde ? "sde" : "exact";
        r.metadata["fitted_scale"] = os.str();
    };
    for (std::size_t i = 0; i <= n; ++i) {
        std::vector<double> a, b(samples);
        if (i < n) {
            a = pm.coordinate(i);
            for (std::size_t s = 0; s < samples; ++s) b[s] = xs[s * n + i];
        } else {
            a.resize(samples);
            for (std::size_t s = 0; s < samples; ++s) {
                a[s] = *std::max_element(pm.row(s).begin(), pm.row(s).end());
                b[s] = *std::max_element(xs.begin() + static_cast<std::ptrdiff_t>(s * n),
                                         xs.begin() + static_cast<std::ptrdiff_t>((s + 1) * n));
            }
            std::sort(a.begin(), a.end());
        }
        std::sort(b.begin(), b.end());
        StatReport r = ks_two_sample(a, b, level,
                                     "pm_bridge t=" + std::to_string(t) + (i < n ? " y" + std::to_string(i + 1) : " max"));
        meta(r);
        out.reports.push_back(std::move(r));
    }
    return out;
}

}  // namespace viciouskit
