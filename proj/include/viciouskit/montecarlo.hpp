#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "viciouskit/combinatorics.hpp"
#include "viciouskit/densities.hpp"
#include "viciouskit/random.hpp"
#include "viciouskit/stats.hpp"

namespace viciouskit {

// ---------------------------------------------------------------------------
// Exact draws from the origin-start densities
// ---------------------------------------------------------------------------

// Rejection sampler for g(0,0,t,.) / p(0,0,t,.) and their wall analogues.
//
// Without the wall the proposal is y = R theta with theta uniform on the
// sphere and R^2/t chi-square with N + k degrees of freedom, i.e. density
// proportional to |y|^k e^{-|y|^2/2t} on R^N. The target, symmetrized over
// orderings, is e^{-|y|^2/2t} w(y) with
//   g: |h(y)| N(T-t, y) <= (2|y|^2)^{N(N-1)/4}
//   p: h(y)^2           <= (2|y|^2)^{N(N-1)/2}
// so accepting with w(y)/bound(y) is exact. The survival factor is applied as
// a second, independent thinning so it is only evaluated for survivors of the
// cheap first test.
//
// For the g-family at t <= T/2 the survival factor is tiny near the origin
// and thinning by it alone is hopeless. There the proposal is the p-family
// law (weight h^2) and the thinning probability is
//   N(T-t, y) / (h(y/sqrt(T-t)) / c_bar)   (wall: h_hat, c_tilde),
// which is at most 1 and tends to 1 as y/sqrt(T-t) -> 0. Round-off above 1
// is clipped.
class OriginSampler {
public:
    OriginSampler(const ModelSpec& spec, double t) : spec_(spec), t_(t) {
        spec_.validate();
        if (!(t > 0)) throw std::invalid_argument("OriginSampler: time must be positive");
        if (spec_.finite_horizon() && t > spec_.horizon) throw std::invalid_argument("OriginSampler: requires t <= T");
        const int n = spec_.n;
        via_free_ = spec_.finite_horizon() && 2 * t <= spec_.horizon;
        if (via_free_) {
            const double tau = spec_.horizon - t, nn = n;
            const ModelConstants k = constants(n);
            log_bound_ = spec_.wall ? std::log(k.c_tilde) + 0.5 * nn * nn * std::log(tau)
                                    : std::log(k.c_bar) + 0.25 * nn * (nn - 1) * std::log(tau);
        }
        const double power = spec_.finite_horizon() && !via_free_ ? 1.0 : 2.0;
        radius_ = std::gamma_distribution<double>(0.5 * (n + power * n * (n - 1) / 2.0), 2.0);
        for (int j = 0; j < n; ++j) wall_radius_.emplace_back(0.5 * (power * (2 * j + 1) + 1), 2.0);
    }

    // Draws one chamber point; counts proposals in `proposals` if given.
    std::vector<double> draw(RandomStream& rng, std::size_t* proposals = nullptr) {
        if (spec_.wall) return draw_wall(rng, proposals);
        const std::size_t n = static_cast<std::size_t>(spec_.n);
        std::vector<double> y(n);
        for (;;) {
            if (proposals) ++*proposals;
            double norm2 = 0;
            for (double& v : y) {
                v = rng.gaussian();
                norm2 += v * v;
            }
            const double r = std::sqrt(t_ * radius_(rng.engine()));
            const double scale = r / std::sqrt(norm2);
            for (double& v : y) v *= scale;
            std::sort(y.begin(), y.end());
            if (!detail::in_open_chamber(y, false)) continue;
            const double lh = log_abs_h_poly(y), lb = 0.25 * n * (n - 1) * std::log(2.0 * r * r);
            const double log_ratio = spec_.finite_horizon() && !via_free_ ? lh - lb : 2 * lh - 2 * lb;
            if (!(std::log(rng.uniform()) < log_ratio)) continue;
            if (!survival_thinning(rng, y, lh)) continue;
            return y;
        }
    }

private:
    // Ordered product proposal for the wall: for y_1 < ... < y_N,
    // |y_j^2 - y_i^2| <= y_j^2, so h_hat(y) <= prod_j y_j^{2j-1}. Draw y_j
    // independently with density ~ y^{p(2j-1)} e^{-y^2/2t} (p = 1 for g,
    // 2 for p) and keep ordered draws with probability h_hat^p / bound.
    std::vector<double> draw_wall(RandomStream& rng, std::size_t* proposals) {
        const std::size_t n = static_cast<std::size_t>(spec_.n);
        const double power = spec_.finite_horizon() && !via_free_ ? 1.0 : 2.0;
        std::vector<double> y(n);
        for (;;) {
            if (proposals) ++*proposals;
            double log_bound = 0;
            for (std::size_t j = 0; j < n; ++j) {
                y[j] = std::sqrt(t_ * wall_radius_[j](rng.engine()));
                log_bound += power * (2.0 * static_cast<double>(j) + 1) * std::log(y[j]);
            }
            if (!detail::in_open_chamber(y, true)) continue;
            const double lh = log_abs_h_hat_poly(y);
            const double log_ratio = power * lh - log_bound;
            if (!(std::log(rng.uniform()) < log_ratio)) continue;
            if (!survival_thinning(rng, y, lh)) continue;
            return y;
        }
    }

    // Second thinning for the g-family; `log_h` is log h(y) (wall: h_hat).
    bool survival_thinning(RandomStream& rng, const std::vector<double>& y, double log_h) {
        if (!spec_.finite_horizon() || !(spec_.horizon > t_)) return true;
        const SignedLog s = log_survival(spec_.horizon - t_, y, spec_.wall);
        if (s.sign <= 0) return false;
        const double log_p = via_free_ ? s.log_abs + log_bound_ - log_h : s.log_abs;
        return std::log(rng.uniform()) < std::min(0.0, log_p);
    }

    ModelSpec spec_;
    double t_;
    bool via_free_ = false;
    double log_bound_ = 0;
    std::gamma_distribution<double> radius_;
    std::vector<std::gamma_distribution<double>> wall_radius_;
};

// ---------------------------------------------------------------------------
// Configuration and ensembles
// ---------------------------------------------------------------------------

enum class SimModel { walker, sde_g, sde_p };

inline std::string to_string(SimModel m) {
    switch (m) {
        case SimModel::walker: return "walker";
        case SimModel::sde_g: return "sde-g";
        case SimModel::sde_p: return "sde-p";
    }
    return "?";
}

using SimStart = std::variant<OriginStart, LatticeConfig, ChamberPoint>;

struct SimConfig {
    SimModel model = SimModel::walker;
    ModelSpec spec;
    double scale = 1;             // lattice scale L (walkers)
    SimStart start = origin;
    double step = 1e-3;           // SDE time step
    double end_time = 0;          // SDE output horizon; 0 means T (g-family)
    std::size_t samples = 1000;   // accepted walker tuples / SDE paths
    std::uint64_t seed = 1;
    std::size_t streams = 1;
    std::size_t threads = 1;
    std::size_t grid_points = 11;        // recorded times, including the start
    double acceptance_floor = 1e-6;      // walkers
    int max_halvings = 20;               // SDE
    double warm_start_fraction = 1e-3;   // SDE origin start at t0 = fraction * horizon
    double horizon_guard = 1e-4;         // g-family stops at T (1 - guard)

    void validate() const {
        spec.validate();
        if (samples < 1) throw std::invalid_argument("SimConfig: samples must be >= 1");
        if (!(step > 0)) throw std::invalid_argument("SimConfig: step must be positive");
        if (!(scale >= 1)) throw std::invalid_argument("SimConfig: lattice scale must be >= 1");
        if (streams < 1) throw std::invalid_argument("SimConfig: need at least one stream");
        if (grid_points < 2) throw std::invalid_argument("SimConfig: need at least two grid points");
    }
};

namespace detail {

// FNV-1a, stable across platforms and runs.
inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string canonical(const SimConfig& c) {
    std::ostringstream os;
    os.precision(17);
    os << "model=" << to_string(c.model) << ";n=" << c.spec.n << ";T=" << c.spec.horizon << ";wall=" << c.spec.wall
       << ";L=" << c.scale << ";step=" << c.step << ";end=" << c.end_time << ";samples=" << c.samples
       << ";seed=" << c.seed << ";streams=" << c.streams << ";grid=" << c.grid_points
       << ";floor=" << c.acceptance_floor << ";halvings=" << c.max_halvings << ";warm=" << c.warm_start_fraction
       << ";guard=" << c.horizon_guard << ";start=";
    if (std::holds_alternative<OriginStart>(c.start)) os << "origin";
    if (const auto* l = std::get_if<LatticeConfig>(&c.start))
        for (long long v : l->positions()) os << v << ',';
    if (const auto* p = std::get_if<ChamberPoint>(&c.start))
        for (double v : p->coords()) os << v << ',';
    return os.str();
}

// Runs body(stream) for every stream, on up to `threads` threads.
template <typename Body>
void run_streams(std::size_t streams, std::size_t threads, Body&& body) {
    threads = std::max<std::size_t>(1, std::min(threads, streams));
    if (threads == 1) {
        for (std::size_t s = 0; s < streams; ++s) body(s);
        return;
    }
    std::vector<std::exception_ptr> errors(streams);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t s = w; s < streams; s += threads) {
                try {
                    body(s);
                } catch (...) {
                    errors[s] = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// Contiguous share of `total` for stream s.
inline std::size_t quota(std::size_t total, std::size_t streams, std::size_t s) {
    return total * (s + 1) / streams - total * s / streams;
}

}  // namespace detail

inline std::string config_digest(const SimConfig& c) { return detail::fnv1a_hex(detail::canonical(c)); }

struct PathEnsemble {
    std::size_t n = 0;
    std::vector<double> time_grid;
    std::vector<double> paths;  // [sample][grid][walker]
    std::size_t accepted = 0;
    std::size_t proposed = 0;
    std::size_t halvings = 0;   // SDE substep halvings
    std::string config_digest;

    std::size_t samples() const { return time_grid.empty() || n == 0 ? 0 : paths.size() / (time_grid.size() * n); }

    std::span<const double> at(std::size_t sample, std::size_t grid_index) const {
        return {paths.data() + (sample * time_grid.size() + grid_index) * n, n};
    }
    std::span<const double> endpoint(std::size_t sample) const { return at(sample, time_grid.size() - 1); }
};

// ---------------------------------------------------------------------------
// Vicious walkers by rejection
// ---------------------------------------------------------------------------

inline long long walker_steps(const SimConfig& cfg) {
    if (!cfg.spec.finite_horizon()) throw std::invalid_argument("simulate_walkers: needs a finite horizon");
    return lattice_floor(cfg.scale * cfg.scale, cfg.spec.horizon);
}

// Expected proposals per accepted sample, from the asymptotic survival
// h_N(u/(L sqrt T))/c_bar_N (wall: h_hat/c_tilde).
inline double estimate_walker_cost(const SimConfig& cfg) {
    const auto& u = std::get<LatticeConfig>(cfg.start);
    const double p = std::min(1.0, asymptotic_survival(cfg.scale, cfg.spec.horizon, u));
    return static_cast<double>(cfg.samples) / p;
}

inline PathEnsemble simulate_walkers(const SimConfig& cfg) {
    cfg.validate();
    if (cfg.model != SimModel::walker) throw std::invalid_argument("simulate_walkers: config is not in walker mode");
    const auto* startp = std::get_if<LatticeConfig>(&cfg.start);
    if (!startp) throw std::invalid_argument("simulate_walkers: start must be a lattice configuration");
    const LatticeConfig& u = *startp;
    if (u.size() != static_cast<std::size_t>(cfg.spec.n) || u.wall() != cfg.spec.wall)
        throw std::invalid_argument("simulate_walkers: start does not match the model");
    const long long m = walker_steps(cfg);
    const std::size_t n = u.size(), k = cfg.grid_points;

    std::vector<long long> record_step(k);
    PathEnsemble ens;
    ens.n = n;
    ens.time_grid.resize(k);
    for (std::size_t g = 0; g < k; ++g) {
        record_step[g] = static_cast<long long>(std::llround(static_cast<double>(m) * static_cast<double>(g) /
                                                             static_cast<double>(k - 1)));
        ens.time_grid[g] = static_cast<double>(record_step[g]) / (cfg.scale * cfg.scale);
    }

    std::vector<std::vector<double>> out(cfg.streams);
    std::vector<std::size_t> proposed(cfg.streams, 0);
    detail::run_streams(cfg.streams, cfg.threads, [&](std::size_t s) {
        RandomStream rng(cfg.seed, s, stream_tag::walkers);
        const std::size_t want = detail::quota(cfg.samples, cfg.streams, s);
        std::vector<long long> pos(n);
        std::vector<std::uint64_t> word(n);
        std::vector<double> rec(k * n);
        std::size_t got = 0;
        auto& buf = out[s];
        buf.reserve(want * k * n);
        while (got < want) {
            ++proposed[s];
            if (proposed[s] % 10000 == 0 &&
                static_cast<double>(got + 1) / static_cast<double>(proposed[s]) < cfg.acceptance_floor)
                throw std::runtime_error("simulate_walkers: acceptance rate below floor " +
                                         std::to_string(cfg.acceptance_floor) + "; reduce L or N");
            for (std::size_t i = 0; i < n; ++i) pos[i] = u[i];
            std::size_t g = 0;
            bool alive = true;
            for (long long j = 0; alive; ++j) {
                while (g < k && record_step[g] == j) {
                    for (std::size_t i = 0; i < n; ++i) rec[g * n + i] = static_cast<double>(pos[i]) / cfg.scale;
                    ++g;
                }
                if (j == m) break;
                if (j % 64 == 0)
                    for (std::size_t i = 0; i < n; ++i) word[i] = rng.bits();
                const unsigned shift = static_cast<unsigned>(j % 64);
                for (std::size_t i = 0; i < n; ++i) pos[i] += ((word[i] >> shift) & 1u) ? 1 : -1;
                if (cfg.spec.wall && pos[0] < 0) alive = false;
                for (std::size_t i = 1; alive && i < n; ++i) alive = pos[i] > pos[i - 1];
            }
            if (!alive) continue;
            buf.insert(buf.end(), rec.begin(), rec.end());
            ++got;
        }
    });
    for (std::size_t s = 0; s < cfg.streams; ++s) {
        ens.paths.insert(ens.paths.end(), out[s].begin(), out[s].end());
        ens.proposed += proposed[s];
    }
    ens.accepted = cfg.samples;
    ens.config_digest = config_digest(cfg);
    return ens;
}

// ---------------------------------------------------------------------------
// SDE integration
// ---------------------------------------------------------------------------

namespace detail {

inline bool valid_state(std::span<const double> x, bool wall) { return in_open_chamber(x, wall); }

// Drift of the chosen family at (t, x). The finite-difference step shrinks
// near the boundary so the stencil stays inside the chamber.
inline std::vector<double> sde_drift(const ModelSpec& spec, bool g_family, double t, std::span<const double> x) {
    if (!g_family) return dyson_drift(x, spec.wall);
    if (spec.n == 1 && !spec.wall) return {0.0};
    double dist = spec.wall ? x[0] : std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < x.size(); ++i) dist = std::min(dist, x[i] - x[i - 1]);
    const double h = std::min(default_fd_step(x), dist / 20);
    return survival_log_gradient(spec.horizon - t, x, spec.wall, h);
}

}  // namespace detail

inline PathEnsemble simulate_sde(const SimConfig& cfg) {
    cfg.validate();
    if (cfg.model == SimModel::walker) throw std::invalid_argument("simulate_sde: config is in walker mode");
    const bool g_family = cfg.model == SimModel::sde_g;
    ModelSpec spec = cfg.spec;
    if (g_family && !spec.finite_horizon()) throw std::invalid_argument("simulate_sde: g-family needs a finite horizon");
    if (!g_family) spec.horizon = std::numeric_limits<double>::infinity();
    const std::size_t n = static_cast<std::size_t>(spec.n), k = cfg.grid_points;

    double end = cfg.end_time > 0 ? cfg.end_time : (g_family ? cfg.spec.horizon : 0.0);
    if (!(end > 0)) throw std::invalid_argument("simulate_sde: p-family needs a positive end time");
    if (g_family) {
        if (end > cfg.spec.horizon) throw std::invalid_argument("simulate_sde: end time beyond the horizon");
        end = std::min(end, cfg.spec.horizon * (1 - cfg.horizon_guard));
    }

    const bool from_origin = std::holds_alternative<OriginStart>(cfg.start);
    std::vector<double> x0;
    double t0 = 0;
    if (from_origin) {
        t0 = cfg.warm_start_fraction * (g_family ? cfg.spec.horizon : end);
        if (!(t0 < end)) throw std::invalid_argument("simulate_sde: warm start time not before the end time");
    } else if (const auto* p = std::get_if<ChamberPoint>(&cfg.start)) {
        if (p->size() != n || p->wall() != spec.wall) throw std::invalid_argument("simulate_sde: start does not match the model");
        if (!detail::in_open_chamber(p->coords(), spec.wall)) throw std::invalid_argument("simulate_sde: start must be interior");
        x0.assign(p->coords().begin(), p->coords().end());
    } else {
        throw std::invalid_argument("simulate_sde: start must be a chamber point or the origin");
    }

    PathEnsemble ens;
    ens.n = n;
    ens.time_grid = uniform_grid(t0, end, k);

    std::vector<std::vector<double>> out(cfg.streams);
    std::vector<std::size_t> halvings(cfg.streams, 0), proposed(cfg.streams, 0);
    detail::run_streams(cfg.streams, cfg.threads, [&](std::size_t s) {
        RandomStream rng(cfg.seed, s, stream_tag::sde);
        const std::size_t want = detail::quota(cfg.samples, cfg.streams, s);
        std::optional<OriginSampler> warm;
        if (from_origin) warm.emplace(spec, t0);
        std::vector<double> x(n), trial(n), noise(n);
        auto& buf = out[s];
        buf.reserve(want * k * n);

        // Advances x from t by dt. A step whose Euler move leaves the chamber
        // is redrawn as two half steps with fresh noise, at most
        // cfg.max_halvings times deep. Independently, the step is split before
        // any noise is drawn while the drift alone would move a walker further
        // than the distance to the chamber boundary: the drift grows like
        // 1/gap there and a full step overshoots. Those splits depend only on
        // the current state and have their own, much larger, safety limit.
        constexpr int kMaxDriftSplits = 60;
        std::function<void(double&, double, int, int)> advance = [&](double& t, double dt, int depth, int splits) {
            const auto b = detail::sde_drift(spec, g_family, t, x);
            double dist = spec.wall ? x[0] : std::numeric_limits<double>::infinity(), push = 0;
            for (std::size_t i = 1; i < n; ++i) dist = std::min(dist, x[i] - x[i - 1]);
            for (double v : b) push = std::max(push, std::abs(v) * dt);
            if (push > dist) {
                if (splits >= kMaxDriftSplits) {
                    std::ostringstream os;
                    os << "simulate_sde: step control failed near the chamber boundary at t=" << t;
                    throw std::runtime_error(os.str());
                }
                advance(t, dt / 2, depth, splits + 1);
                advance(t, dt / 2, depth, splits + 1);
                return;
            }
            rng.fill_gaussian(noise);
            const double sq = std::sqrt(dt);
            for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + b[i] * dt + sq * noise[i];
            if (detail::valid_state(trial, spec.wall)) {
                x = trial;
                t += dt;
                return;
            }
            if (depth >= cfg.max_halvings) {
                std::ostringstream os;
                os << "simulate_sde: halving budget exhausted at t=" << t;
                throw std::runtime_error(os.str());
            }
            ++halvings[s];
            advance(t, dt / 2, depth + 1, splits);
            advance(t, dt / 2, depth + 1, splits);
        };

        for (std::size_t p = 0; p < want; ++p) {
            if (warm) x = warm->draw(rng, &proposed[s]);
            else x = x0;
            double t = t0;
            buf.insert(buf.end(), x.begin(), x.end());
            for (std::size_t g = 1; g < k; ++g) {
                const double target = ens.time_grid[g];
                const auto steps = static_cast<long long>(std::ceil((target - t) / cfg.step - 1e-9));
                const double dt = (target - t) / static_cast<double>(std::max(1LL, steps));
                for (long long j = 0; j < std::max(1LL, steps); ++j) advance(t, dt, 0, 0);
                t = target;
                if (!detail::valid_state(x, spec.wall))
                    throw std::logic_error("simulate_sde: chamber ordering violated at a recorded time");
                buf.insert(buf.end(), x.begin(), x.end());
            }
        }
    });
    for (std::size_t s = 0; s < cfg.streams; ++s) {
        ens.paths.insert(ens.paths.end(), out[s].begin(), out[s].end());
        ens.halvings += halvings[s];
        ens.proposed += from_origin ? proposed[s] : detail::quota(cfg.samples, cfg.streams, s);
    }
    ens.accepted = cfg.samples;
    ens.config_digest = config_digest(cfg);
    return ens;
}

// ---------------------------------------------------------------------------
// Non-collision frequency of Brownian motions
// ---------------------------------------------------------------------------

struct NonCollisionEstimate {
    double estimate = 0;
    double std_error = 0;
    double allowance = 0;  // documented discretization allowance (absolute)
    std::size_t samples = 0;
    std::size_t steps = 0;
    std::string advisory;
};

// Fraction of discretized Brownian N-tuples from x keeping strict order (and
// positivity with the wall) up to t. With `bridge_correction` each step also
// multiplies the path weight by the probability that the Brownian bridge
// between the two recorded gaps does not touch zero, 1 - exp(-g0 g1 / dt)
// (wall: 1 - exp(-2 x0 x1 / dt)), which removes the first-order bias of the
// plain discrete check.
inline NonCollisionEstimate noncollision_mc(double t, const ChamberPoint& x, std::size_t samples, double step,
                                            std::uint64_t seed, std::size_t streams = 1,
                                            bool bridge_correction = true, std::size_t threads = 1) {
    if (!(t > 0)) throw std::invalid_argument("noncollision_mc: time must be positive");
    if (!(step > 0)) throw std::invalid_argument("noncollision_mc: step must be positive");
    if (samples < 2) throw std::invalid_argument("noncollision_mc: need at least two samples");
    if (streams < 1) throw std::invalid_argument("noncollision_mc: need at least one stream");
    const std::size_t n = x.size();
    const bool wall = x.wall();
    const auto nsteps = static_cast<std::size_t>(std::ceil(t / step - 1e-9));
    const double dt = t / static_cast<double>(nsteps), sq = std::sqrt(dt);

    std::vector<double> sum(streams, 0.0), sum2(streams, 0.0);
    detail::run_streams(streams, threads, [&](std::size_t s) {
        RandomStream rng(seed, s, stream_tag::noncollision);
        std::vector<double> a(n), b(n);
        for (std::size_t p = 0, want = detail::quota(samples, streams, s); p < want; ++p) {
            a.assign(x.coords().begin(), x.coords().end());
            double w = 1;
            for (std::size_t j = 0; j < nsteps && w > 0; ++j) {
                for (std::size_t i = 0; i < n; ++i) b[i] = a[i] + sq * rng.gaussian();
                if (!detail::in_open_chamber(b, wall)) {
                    w = 0;
                    break;
                }
                if (bridge_correction) {
                    if (wall) w *= -std::expm1(-2 * a[0] * b[0] / dt);
                    for (std::size_t i = 1; i < n; ++i)
                        w *= -std::expm1(-(a[i] - a[i - 1]) * (b[i] - b[i - 1]) / dt);
                }
                std::swap(a, b);
            }
            sum[s] += w;
            sum2[s] += w * w;
        }
    });
    double s1 = 0, s2 = 0;
    for (std::size_t s = 0; s < streams; ++s) {
        s1 += sum[s];
        s2 += sum2[s];
    }
    NonCollisionEstimate r;
    const double ns = static_cast<double>(samples);
    r.samples = samples;
    r.steps = nsteps;
    r.estimate = s1 / ns;
    r.std_error = std::sqrt(std::max(0.0, s2 / ns - r.estimate * r.estimate) / (ns - 1));
    r.allowance = dt;
    r.advisory = bridge_correction
                     ? "bridge-corrected estimator; residual discretization bias allowance = step"
                     : "plain discrete check; bias is first order in sqrt(step) and overestimates survival";
    if (!bridge_correction) r.allowance = std::sqrt(dt);
    return r;
}

// ---------------------------------------------------------------------------
// Endpoint functionals
// ---------------------------------------------------------------------------

struct Functional {
    enum class Kind { coordinate, gap, maximum };
    Kind kind = Kind::coordinate;
    std::size_t index = 0;

    static Functional coordinate(std::size_t i) { return {Kind::coordinate, i}; }
    static Functional gap(std::size_t i) { return {Kind::gap, i}; }
    static Functional maximum() { return {Kind::maximum, 0}; }

    double operator()(std::span<const double> y) const {
        switch (kind) {
            case Kind::coordinate: return y[index];
            case Kind::gap: return y[index + 1] - y[index];
            case Kind::maximum: return *std::max_element(y.begin(), y.end());
        }
        return 0;
    }

    std::string name() const {
        switch (kind) {
            case Kind::coordinate: return "y" + std::to_string(index + 1);
            case Kind::gap: return "y" + std::to_string(index + 2) + "-y" + std::to_string(index + 1);
            case Kind::maximum: return "max";
        }
        return "?";
    }
};

// Sorted values of a functional at the final recorded time.
inline std::vector<double> endpoint_values(const PathEnsemble& ens, const Functional& f) {
    const std::size_t s = ens.samples();
    if (s == 0) throw std::invalid_argument("endpoint_values: empty ensemble");
    if ((f.kind == Functional::Kind::coordinate && f.index >= ens.n) ||
        (f.kind == Functional::Kind::gap && f.index + 1 >= ens.n))
        throw std::invalid_argument("endpoint_values: functional index out of range");
    std::vector<double> v(s);
    for (std::size_t i = 0; i < s; ++i) v[i] = f(ens.endpoint(i));
    std::sort(v.begin(), v.end());
    return v;
}

struct EndpointHistogram {
    Histogram histogram;
    std::vector<double> sorted_values;  // for the empirical CDF

    double ecdf(double x) const {
        return static_cast<double>(std::upper_bound(sorted_values.begin(), sorted_values.end(), x) -
                                   sorted_values.begin()) /
               static_cast<double>(sorted_values.size());
    }
};

inline EndpointHistogram endpoint_histogram(const PathEnsemble& ens, const Functional& f, std::size_t bins = 50) {
    EndpointHistogram h;
    h.sorted_values = endpoint_values(ens, f);
    h.histogram = make_histogram(h.sorted_values, bins);
    return h;
}

}  // namespace viciouskit
