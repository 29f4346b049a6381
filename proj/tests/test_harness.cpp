#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "viciouskit/verify.hpp"

using namespace viciouskit;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

TEST(Histogram, CountsSumToTotal) {
    const std::vector<double> v{0.1, 0.4, 0.4, 0.9, 1.0, 2.5};
    const auto h = make_histogram(v, 4);
    std::size_t s = 0;
    for (auto c : h.counts) s += c;
    EXPECT_EQ(s, v.size());
    EXPECT_EQ(h.total, v.size());
    EXPECT_TRUE(std::is_sorted(h.edges.begin(), h.edges.end()));
    EXPECT_THROW(make_histogram(v, 0), std::invalid_argument);
}

TEST(Ks, CalibratedUnderTheNull) {
    int passes = 0;
    for (int rep = 0; rep < 100; ++rep) {
        RandomStream rng(1000 + rep, 0, 0);
        std::vector<double> s(500);
        for (auto& v : s) v = rng.gaussian();
        std::sort(s.begin(), s.end());
        passes += ks_test(s, normal_cdf, 0.01).pass;
    }
    EXPECT_GE(passes, 95);
}

TEST(Ks, VerdictMatchesThreshold) {
    RandomStream rng(5, 0, 0);
    std::vector<double> s(200);
    for (auto& v : s) v = rng.gaussian();
    std::sort(s.begin(), s.end());
    const auto r = ks_test(s, normal_cdf, 0.05, "normal");
    EXPECT_EQ(r.pass, r.statistic <= r.critical_value);
    EXPECT_NEAR(r.critical_value, std::sqrt(-0.5 * std::log(0.025)) / std::sqrt(200.0), 1e-15);
    EXPECT_EQ(r.test_name, "normal");
    EXPECT_EQ(r.verdict(), r.pass ? "pass" : "fail");
    EXPECT_FALSE(make_report("nan", std::nan(""), 1.0, 10).pass);
}

TEST(Ks, ConstantSampleFails) {
    const std::vector<double> s(100, 0.25);
    EXPECT_FALSE(ks_test(s, normal_cdf, 0.01).pass);
}

TEST(Ks, DisjointTwoSample) {
    std::vector<double> a(20), b(30);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = static_cast<double>(i);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = 100.0 + static_cast<double>(i);
    EXPECT_DOUBLE_EQ(ks_two_sample_distance(a, b), 1.0);
    EXPECT_FALSE(ks_two_sample(a, b, 0.01).pass);
}

TEST(Ks, GroupedDistanceAtBoundaries) {
    std::vector<double> s;
    for (int i = 0; i < 100; ++i) s.push_back(i < 50 ? 0.0 : 2.0);
    const std::vector<double> edges{1.0};
    auto cdf = [](double x) { return x < 1 ? 0.0 : x < 2 ? 0.5 : 1.0; };
    EXPECT_NEAR(ks_grouped(s, edges, cdf).statistic, 0.0, 1e-15);
}

TEST(Ks, Errors) {
    const std::vector<double> few{1, 2, 3};
    EXPECT_THROW(ks_test(few, normal_cdf), std::invalid_argument);
    std::vector<double> unsorted(20, 0.0);
    unsorted[3] = 1.0;
    EXPECT_THROW(ks_test(unsorted, normal_cdf), std::invalid_argument);
    EXPECT_THROW(ks_coefficient(1.5), std::invalid_argument);
}

TEST(Marginalize, SingleCoordinateIsIdentity) {
    auto f = [](std::span<const double> y) { return std::exp(-y[0] * y[0] / 2) / std::sqrt(2 * std::numbers::pi); };
    const auto grid = uniform_grid(-8, 8, 161);
    const auto t = marginalize(f, 1, Marginal::coordinate(0), -8, 8, grid);
    EXPECT_EQ(t.density.front(), 0.0);
    for (std::size_t i = 1; i + 1 < grid.size(); ++i)
        EXPECT_NEAR(t.density[i], f(std::span<const double>(&grid[i], 1)), 1e-15);
    EXPECT_NEAR(t.mass, 1.0, 1e-4);
}

TEST(Marginalize, TwoWalkerMarginalMass) {
    const ModelSpec spec = ModelSpec::infinite(2, false);
    auto f = [&](std::span<const double> y) { return std::exp(log_p_density_origin(spec, 1.0, y)); };
    const auto grid = uniform_grid(-9, 9, 721);
    const auto t = marginalize(f, 2, Marginal::coordinate(1), -9, 9, grid);
    EXPECT_LT(t.normalization_drift(), 1e-5);
    const auto gap = marginalize(f, 2, Marginal::gap(0), -9, 9, uniform_grid(0, 12, 481));
    EXPECT_LT(gap.normalization_drift(), 1e-5);
}

TEST(Marginalize, MirrorSymmetry) {
    const ModelSpec spec = ModelSpec::infinite(2, false);
    auto f = [&](std::span<const double> y) { return std::exp(log_p_density_origin(spec, 1.0, y)); };
    const auto grid = uniform_grid(-6, 6, 61);
    const auto first = marginalize(f, 2, Marginal::coordinate(0), -9, 9, grid);
    const auto last = marginalize(f, 2, Marginal::coordinate(1), -9, 9, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
        EXPECT_NEAR(first.density[i], last.density[grid.size() - 1 - i], 1e-10);
}

TEST(Marginalize, Errors) {
    auto f = [](std::span<const double>) { return 1.0; };
    const auto grid = uniform_grid(0, 1, 3);
    EXPECT_THROW(marginalize(f, 4, Marginal::coordinate(0), 0, 1, grid), std::invalid_argument);
    EXPECT_THROW(marginalize(f, 2, Marginal::coordinate(2), 0, 1, grid), std::invalid_argument);
    EXPECT_THROW(marginalize(f, 2, Marginal::gap(1), 0, 1, grid), std::invalid_argument);
    EXPECT_THROW(uniform_grid(0, 1, 1), std::invalid_argument);
}

TEST(Harness, UnknownSuiteIsUsageError) { EXPECT_THROW(verify_suite("nonsense", Budget{}), std::invalid_argument); }

TEST(Harness, CombinatoricsSuitePasses) {
    const auto r = verify_suite("combinatorics", Budget{});
    EXPECT_TRUE(r.pass());
    ASSERT_EQ(r.checks.size(), 1u);
    EXPECT_EQ(r.checks[0].criterion, 1);
}

TEST(Harness, IdentitiesSuitePasses) {
    const auto r = verify_suite("identities", Budget{});
    EXPECT_EQ(r.checks.size(), 5u);
    for (const auto& c : r.checks) EXPECT_TRUE(c.pass()) << c.criterion << " " << c.name;
}

TEST(Harness, ExhaustedBudgetMarksIncomplete) {
    Budget b;
    b.seconds = -1;
    const auto r = verify_suite("rmt", b);
    EXPECT_TRUE(r.incomplete);
    EXPECT_FALSE(r.pass());
    for (const auto& c : r.checks) EXPECT_TRUE(c.incomplete);
}

TEST(QuasiMonteCarlo, GaussianChamberMass) {
    // Standard normal on R^2 restricted to y1 < y2 carries mass 1/2.
    auto log_f = [](std::span<const double> y) {
        return -0.5 * (y[0] * y[0] + y[1] * y[1]) - std::log(2 * std::numbers::pi);
    };
    const auto e = chamber_integral_qmc(log_f, 2, false, 1.0, 1 << 12, 8, 3);
    EXPECT_NEAR(e.value, 0.5, 1e-3);
    EXPECT_LT(e.std_error, 1e-3);
}
