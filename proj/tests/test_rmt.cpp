#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "viciouskit/quadrature.hpp"
#include "viciouskit/rmt.hpp"

using namespace viciouskit;

namespace {

double log_factorial(std::size_t n) { return std::lgamma(static_cast<double>(n) + 1); }

}  // namespace

TEST(Ensembles, RowsAscending) {
    for (Ensemble e : {Ensemble::goe, Ensemble::gue, Ensemble::pm}) {
        const auto s = sample_ensemble(e, 4, e == Ensemble::pm ? 0.4 : 1.5, 200, 3);
        ASSERT_EQ(s.draws(), 200u);
        for (std::size_t d = 0; d < s.draws(); ++d) EXPECT_TRUE(std::is_sorted(s.row(d).begin(), s.row(d).end()));
    }
}

TEST(Ensembles, SingleGoeEntryIsGaussian) {
    const auto s = sample_ensemble(Ensemble::goe, 1, 1.0, 10000, 7);
    double m = 0, m2 = 0;
    for (double v : s.eigenvalues) m += v, m2 += v * v;
    const double n = 10000, mean = m / n, var = m2 / n - mean * mean;
    EXPECT_NEAR(var, 1.0, 3 * std::sqrt(2.0 / n));
    EXPECT_NEAR(mean, 0.0, 3 / std::sqrt(n));
}

TEST(Ensembles, GueSpacingVanishesQuadratically) {
    // N = 2, unit variance: spacing density s^2 e^{-s^2/4} / (2 sqrt(pi)).
    const auto s = sample_ensemble(Ensemble::gue, 2, 1.0, 20000, 11);
    std::vector<double> gaps(s.draws());
    for (std::size_t d = 0; d < gaps.size(); ++d) gaps[d] = s.row(d)[1] - s.row(d)[0];
    std::sort(gaps.begin(), gaps.end());
    auto cdf = [](double x) {
        if (x <= 0) return 0.0;
        return quadrature::integrate_gauss_legendre([](double u) { return u * u * std::exp(-u * u / 4); }, 0, x, 1e-13) /
               (2 * std::sqrt(std::numbers::pi));
    };
    EXPECT_TRUE(ks_test(gaps, cdf, 0.01).pass);
    const double n = static_cast<double>(gaps.size());
    for (double eps : {0.3, 0.5}) {
        const double p = cdf(eps);
        const double frac = static_cast<double>(std::lower_bound(gaps.begin(), gaps.end(), eps) - gaps.begin()) / n;
        EXPECT_NEAR(frac, p, 3 * std::sqrt(p * (1 - p) / n) + 1 / n);
    }
}

TEST(Ensembles, PandeyMehtaEndpointsMatchGue) {
    const auto pm = sample_ensemble(Ensemble::pm, 2, 1.0, 5000, 13);
    const auto gue = sample_ensemble(Ensemble::gue, 2, 0.5, 5000, 14);
    EXPECT_DOUBLE_EQ(pm.variance, 0.25);
    for (std::size_t i = 0; i < 2; ++i) {
        const auto a = pm.coordinate(i), b = gue.coordinate(i);
        EXPECT_TRUE(ks_two_sample(a, b, 0.005).pass) << i;
    }
}

TEST(Ensembles, PandeyMehtaMovesAwayFromGoe) {
    const auto goe = sample_ensemble(Ensemble::goe, 2, 1.0, 8000, 21);
    std::vector<double> gaps_goe(goe.draws());
    for (std::size_t d = 0; d < goe.draws(); ++d) gaps_goe[d] = (goe.row(d)[1] - goe.row(d)[0]);
    std::sort(gaps_goe.begin(), gaps_goe.end());
    std::vector<double> dist;
    for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const auto pm = sample_ensemble(Ensemble::pm, 2, alpha, 8000, 22);
        // compare spacings in units of the reference scale sqrt(2 v^2)
        const double scale = std::sqrt(2 * pm.variance);
        std::vector<double> gaps(pm.draws());
        for (std::size_t d = 0; d < pm.draws(); ++d) gaps[d] = (pm.row(d)[1] - pm.row(d)[0]) / scale;
        std::sort(gaps.begin(), gaps.end());
        dist.push_back(ks_two_sample_distance(gaps, gaps_goe));
    }
    EXPECT_LT(dist[0], dist[2]);
    EXPECT_LT(dist[2], dist[4]);
    EXPECT_LT(dist[1], dist[3]);
}

TEST(Ensembles, Errors) {
    EXPECT_THROW(sample_ensemble(Ensemble::pm, 2, 1.5, 10, 1), std::invalid_argument);
    EXPECT_THROW(sample_ensemble(Ensemble::goe, 2, 0.0, 10, 1), std::invalid_argument);
    EXPECT_THROW(sample_ensemble(Ensemble::gue, 0, 1.0, 10, 1), std::invalid_argument);
}

TEST(EigenDensity, SingleEigenvalueIsGaussian) {
    for (Ensemble e : {Ensemble::goe, Ensemble::gue})
        for (double s2 : {0.5, 2.0}) {
            const double x = 0.7;
            const double want = std::exp(-x * x / (2 * s2)) / std::sqrt(2 * std::numbers::pi * s2);
            EXPECT_NEAR(eigen_density(e, ChamberPoint({x}, false), s2), want, 1e-14);
        }
}

TEST(EigenDensity, ChamberMassIsInverseFactorial) {
    for (Ensemble e : {Ensemble::goe, Ensemble::gue}) {
        auto f = [&](std::span<const double> y) {
            if (!(y[1] > y[0])) return 0.0;
            return std::exp(log_eigen_density(e, y, 1.3));
        };
        EXPECT_NEAR(quadrature::integrate_chamber(f, 2, -12, 12, 1e-10, 1e-14), 0.5, 1e-6);
    }
}

TEST(EigenDensity, MatchesOriginDensities) {
    RandomStream rng(41, 0, 0);
    for (std::size_t n = 2; n <= 3; ++n)
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> y(n);
            double pos = -2;
            for (auto& v : y) v = (pos += 0.1 + 1.5 * rng.uniform());
            const double big_t = 0.5 + rng.uniform(), t = 0.3 + rng.uniform();
            const double g = log_g_density_origin(ModelSpec::finite(static_cast<int>(n), big_t, false), big_t, y);
            const double p = log_p_density_origin(ModelSpec::infinite(static_cast<int>(n), false), t, y);
            EXPECT_LT(std::abs(std::expm1(g - log_factorial(n) - log_eigen_density(Ensemble::goe, y, big_t))), 1e-10);
            EXPECT_LT(std::abs(std::expm1(p - log_factorial(n) - log_eigen_density(Ensemble::gue, y, t))), 1e-10);
        }
}

TEST(EigenDensity, Errors) {
    const ChamberPoint x({0.0, 1.0}, false);
    EXPECT_THROW(eigen_density(Ensemble::pm, x, 1.0), std::invalid_argument);
    EXPECT_THROW(eigen_density(Ensemble::goe, x, 0.0), std::invalid_argument);
    EXPECT_THROW(log_eigen_density(Ensemble::goe, std::vector<double>{1.0, 0.0}, 1.0), std::invalid_argument);
}

TEST(PmBridge, HalfwayPasses) {
    const auto r = pm_bridge_check(2, 1.0, 0.5, 4000, 17, BridgeSource::exact);
    EXPECT_TRUE(r.pass());
    EXPECT_EQ(r.reports.size(), 3u);
    EXPECT_NEAR(r.fitted_scale, 1.0, 0.05);
}

TEST(PmBridge, Errors) {
    EXPECT_THROW(pm_bridge_check(2, 1.0, 1.0, 100, 1), std::invalid_argument);
    EXPECT_THROW(pm_bridge_check(4, 1.0, 0.5, 100, 1), std::invalid_argument);
    EXPECT_THROW(pm_bridge_check(2, 1.0, 0.5, 5, 1), std::invalid_argument);
}
