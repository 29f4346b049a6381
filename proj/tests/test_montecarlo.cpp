#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "viciouskit/combinatorics.hpp"
#include "viciouskit/montecarlo.hpp"
#include "viciouskit/stats.hpp"

using namespace viciouskit;

namespace {

SimConfig walker_config(std::vector<long long> start, bool wall, double horizon, double scale, std::size_t samples,
                        std::uint64_t seed = 5) {
    SimConfig cfg;
    cfg.model = SimModel::walker;
    cfg.spec = ModelSpec::finite(static_cast<int>(start.size()), horizon, wall);
    cfg.scale = scale;
    cfg.start = LatticeConfig(std::move(start), wall);
    cfg.samples = samples;
    cfg.seed = seed;
    return cfg;
}

// |observed - p| within 3 binomial standard errors over `proposed` trials.
void expect_binomial(const PathEnsemble& ens, double p) {
    const double n = static_cast<double>(ens.proposed);
    const double frac = static_cast<double>(ens.accepted) / n;
    EXPECT_NEAR(frac, p, 3 * std::sqrt(p * (1 - p) / n)) << "proposed=" << ens.proposed;
}

}  // namespace

TEST(Walkers, SingleWalkerAlwaysAccepted) {
    const auto ens = simulate_walkers(walker_config({0}, false, 4, 2, 500));
    EXPECT_EQ(ens.accepted, 500u);
    EXPECT_EQ(ens.proposed, 500u);
    EXPECT_EQ(ens.samples(), 500u);
}

TEST(Walkers, TwoWalkerAcceptance) {
    const auto ens = simulate_walkers(walker_config({0, 2}, false, 2, 1, 62500));
    EXPECT_EQ(walker_steps(walker_config({0, 2}, false, 2, 1, 1)), 2);
    expect_binomial(ens, 10.0 / 16.0);
}

TEST(Walkers, WallAcceptance) {
    const double p = to_double(survival_probability(2, LatticeConfig({0, 2}, true)));
    expect_binomial(simulate_walkers(walker_config({0, 2}, true, 2, 1, 40000)), p);
}

TEST(Walkers, AcceptanceMatchesExactSurvival) {
    for (bool wall : {false, true})
        for (std::size_t n = 1; n <= 3; ++n)
            for (long long m = 2; m <= 10; m += 2) {
                const LatticeConfig u = LatticeConfig::packed(n, wall);
                const double p = to_double(survival_probability(m, u));
                if (p == 1.0) continue;
                const auto ens = simulate_walkers(walker_config(u.positions(), wall, static_cast<double>(m), 1, 3000,
                                                                100 + static_cast<std::uint64_t>(m)));
                SCOPED_TRACE("N=" + std::to_string(n) + " m=" + std::to_string(m) + (wall ? " wall" : ""));
                expect_binomial(ens, p);
            }
}

TEST(Walkers, PathsStayOrdered) {
    auto cfg = walker_config({0, 2, 4}, true, 1, 6, 300);
    cfg.grid_points = 9;
    const auto ens = simulate_walkers(cfg);
    EXPECT_LE(ens.accepted, ens.proposed);
    for (std::size_t s = 0; s < ens.samples(); ++s)
        for (std::size_t g = 0; g < ens.time_grid.size(); ++g) {
            const auto y = ens.at(s, g);
            EXPECT_GE(y[0], 0.0);
            for (std::size_t i = 1; i < y.size(); ++i) EXPECT_GT(y[i], y[i - 1]);
        }
}

TEST(Walkers, AcceptanceFloor) {
    auto cfg = walker_config({0, 2, 4}, false, 1, 40, 100);
    cfg.acceptance_floor = 0.5;
    EXPECT_THROW(simulate_walkers(cfg), std::runtime_error);
}

TEST(Walkers, RejectsMismatchedStart) {
    auto cfg = walker_config({0, 2}, false, 1, 4, 10);
    cfg.spec.n = 3;
    EXPECT_THROW(simulate_walkers(cfg), std::invalid_argument);
    cfg = walker_config({0, 2}, false, 1, 4, 10);
    cfg.start = origin;
    EXPECT_THROW(simulate_walkers(cfg), std::invalid_argument);
}

TEST(Walkers, Deterministic) {
    auto cfg = walker_config({0, 2, 4}, false, 1, 6, 400);
    cfg.streams = 3;
    const auto a = simulate_walkers(cfg);
    cfg.threads = 2;
    const auto b = simulate_walkers(cfg);
    EXPECT_EQ(a.paths, b.paths);
    EXPECT_EQ(a.proposed, b.proposed);
    EXPECT_EQ(a.config_digest, b.config_digest);
}

TEST(Sde, BrownianVariance) {
    SimConfig cfg;
    cfg.model = SimModel::sde_p;
    cfg.spec = ModelSpec::infinite(1, false);
    cfg.start = ChamberPoint({0.0}, false);
    cfg.end_time = 1.0;
    cfg.step = 0.05;
    cfg.samples = 10000;
    cfg.grid_points = 2;
    const auto ens = simulate_sde(cfg);
    double s = 0, s2 = 0;
    for (std::size_t i = 0; i < ens.samples(); ++i) {
        const double y = ens.endpoint(i)[0];
        s += y;
        s2 += y * y;
    }
    const double n = static_cast<double>(ens.samples()), mean = s / n, var = s2 / n - mean * mean;
    EXPECT_NEAR(var, 1.0, 3 * std::sqrt(2.0 / n));
}

TEST(Sde, OrderedAtEveryGridTime) {
    for (SimModel model : {SimModel::sde_g, SimModel::sde_p})
        for (bool wall : {false, true}) {
            SimConfig cfg;
            cfg.model = model;
            cfg.spec = ModelSpec::finite(3, 1.0, wall);
            cfg.start = origin;
            cfg.end_time = model == SimModel::sde_p ? 1.0 : 0.0;
            cfg.step = 1e-2;
            cfg.samples = model == SimModel::sde_g && wall ? 20 : 100;
            cfg.seed = 9;
            const auto ens = simulate_sde(cfg);
            for (std::size_t s = 0; s < ens.samples(); ++s)
                for (std::size_t g = 0; g < ens.time_grid.size(); ++g) {
                    const auto y = ens.at(s, g);
                    if (wall) EXPECT_GT(y[0], 0.0);
                    for (std::size_t i = 1; i < y.size(); ++i) EXPECT_GT(y[i], y[i - 1]);
                }
            EXPECT_LE(ens.time_grid.back(), 1.0);
        }
}

TEST(Sde, Deterministic) {
    SimConfig cfg;
    cfg.model = SimModel::sde_g;
    cfg.spec = ModelSpec::finite(2, 1.0, false);
    cfg.start = ChamberPoint({0.0, 0.5}, false);
    cfg.step = 1e-2;
    cfg.samples = 60;
    cfg.streams = 4;
    const auto a = simulate_sde(cfg);
    cfg.threads = 3;
    const auto b = simulate_sde(cfg);
    EXPECT_EQ(a.paths, b.paths);
    EXPECT_EQ(a.halvings, b.halvings);
    cfg.seed = 2;
    EXPECT_NE(simulate_sde(cfg).paths, a.paths);
}

TEST(Sde, Errors) {
    SimConfig cfg;
    cfg.model = SimModel::sde_g;
    cfg.spec = ModelSpec::infinite(2, false);
    cfg.start = origin;
    EXPECT_THROW(simulate_sde(cfg), std::invalid_argument);
    cfg.model = SimModel::sde_p;
    cfg.end_time = 0;
    EXPECT_THROW(simulate_sde(cfg), std::invalid_argument);
    cfg.end_time = 1;
    cfg.start = ChamberPoint({0.0}, false);
    EXPECT_THROW(simulate_sde(cfg), std::invalid_argument);
    cfg.start = origin;
    cfg.step = 0;
    EXPECT_THROW(simulate_sde(cfg), std::invalid_argument);
}

TEST(OriginSampler, DrawsInsideChamber) {
    for (bool wall : {false, true}) {
        OriginSampler sampler(ModelSpec::finite(3, 1.0, wall), 0.5);
        RandomStream rng(4, 0, stream_tag::exact_draws);
        std::size_t proposals = 0;
        for (int i = 0; i < 200; ++i) {
            const auto y = sampler.draw(rng, &proposals);
            if (wall) EXPECT_GT(y[0], 0.0);
            for (std::size_t k = 1; k < y.size(); ++k) EXPECT_GT(y[k], y[k - 1]);
        }
        EXPECT_GE(proposals, 200u);
    }
    EXPECT_THROW(OriginSampler(ModelSpec::finite(2, 1.0, false), 2.0), std::invalid_argument);
}

TEST(OriginSampler, SmallTimeLawMatchesDensity) {
    for (bool wall : {false, true}) {
        const ModelSpec spec = ModelSpec::finite(2, 1.0, wall);
        const double t = 0.01;
        OriginSampler sampler(spec, t);
        RandomStream rng(8, 0, stream_tag::exact_draws);
        std::vector<double> top(4000);
        for (double& v : top) v = sampler.draw(rng)[1];
        std::sort(top.begin(), top.end());
        auto f = [&](std::span<const double> y) { return std::exp(log_g_density_origin(spec, t, y)); };
        const double lo = wall ? 0.0 : -1.0, hi = 1.0;
        const auto table = marginalize(f, 2, Marginal::coordinate(1), lo, hi, uniform_grid(lo, hi, 401));
        EXPECT_LT(table.normalization_drift(), 1e-6);
        EXPECT_TRUE(ks_test(top, [&](double x) { return table.cdf_at(x); }, 0.01).pass) << wall;
    }
}

TEST(NonCollision, SingleWalker) {
    const auto r = noncollision_mc(1.0, ChamberPoint({0.3}, false), 100, 1e-2, 1);
    EXPECT_EQ(r.estimate, 1.0);
    EXPECT_EQ(r.std_error, 0.0);
}

TEST(NonCollision, TwoWalkersMatchPsi) {
    const auto r = noncollision_mc(1.0, ChamberPoint({0.0, 1.0}, false), 20000, 1e-2, 3);
    EXPECT_NEAR(r.estimate, std::erf(0.5), 3 * r.std_error + r.allowance);
}

TEST(NonCollision, Errors) {
    EXPECT_THROW(noncollision_mc(0, ChamberPoint({0.0}, false), 10, 0.1, 1), std::invalid_argument);
    EXPECT_THROW(noncollision_mc(1, ChamberPoint({0.0}, false), 10, 0, 1), std::invalid_argument);
    EXPECT_THROW(noncollision_mc(1, ChamberPoint({0.0}, false), 1, 0.1, 1), std::invalid_argument);
}

TEST(EndpointHistogram, ConstantPathsOccupyOneBin) {
    const auto ens = simulate_walkers(walker_config({0, 4}, false, 1, 1, 50));
    EXPECT_EQ(walker_steps(walker_config({0, 4}, false, 1, 1, 1)), 0);
    const auto h = endpoint_histogram(ens, Functional::gap(0), 10);
    EXPECT_EQ(std::count_if(h.histogram.counts.begin(), h.histogram.counts.end(), [](std::size_t c) { return c > 0; }), 1);
    EXPECT_EQ(h.histogram.total, 50u);
}

TEST(EndpointHistogram, MassEqualsAccepted) {
    const auto ens = simulate_walkers(walker_config({0, 2}, false, 1, 8, 700));
    const auto h = endpoint_histogram(ens, Functional::maximum(), 25);
    EXPECT_EQ(std::accumulate(h.histogram.counts.begin(), h.histogram.counts.end(), std::size_t{0}), ens.accepted);
    EXPECT_TRUE(std::is_sorted(h.histogram.edges.begin(), h.histogram.edges.end()));
    EXPECT_DOUBLE_EQ(h.ecdf(h.sorted_values.back()), 1.0);
}

TEST(EndpointHistogram, Errors) {
    PathEnsemble empty;
    EXPECT_THROW(endpoint_values(empty, Functional::coordinate(0)), std::invalid_argument);
    const auto ens = simulate_walkers(walker_config({0, 2}, false, 1, 2, 20));
    EXPECT_THROW(endpoint_values(ens, Functional::gap(1)), std::invalid_argument);
    EXPECT_THROW(make_histogram(std::vector<double>{}, 3), std::invalid_argument);
}
