#include <gtest/gtest.h>

#include <map>
#include <random>
#include <vector>

#include "viciouskit/combinatorics.hpp"

using namespace viciouskit;

namespace {

// Enumerates all 2^{mN} step sequences and tallies surviving endpoints.
std::map<std::vector<long long>, long long> enumerate_paths(long long m, const std::vector<long long>& u, bool wall) {
    const std::size_t n = u.size();
    const unsigned long long total = 1ull << (m * static_cast<long long>(n));
    std::map<std::vector<long long>, long long> out;
    for (unsigned long long code = 0; code < total; ++code) {
        std::vector<long long> p(u);
        bool ok = true;
        for (long long step = 0; ok && step < m; ++step) {
            for (std::size_t i = 0; i < n; ++i) p[i] += (code >> (step * n + i)) & 1ull ? 1 : -1;
            if (wall && p[0] < 0) ok = false;
            for (std::size_t i = 1; ok && i < n; ++i) ok = p[i] > p[i - 1];
        }
        if (ok) ++out[p];
    }
    return out;
}

BigInt cofactor_determinant(const std::vector<std::vector<BigInt>>& a) {
    const std::size_t n = a.size();
    if (n == 0) return 1;
    if (n == 1) return a[0][0];
    BigInt det = 0;
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<std::vector<BigInt>> minor;
        for (std::size_t r = 1; r < n; ++r) {
            std::vector<BigInt> row;
            for (std::size_t k = 0; k < n; ++k)
                if (k != c) row.push_back(a[r][k]);
            minor.push_back(row);
        }
        const BigInt term = a[0][c] * cofactor_determinant(minor);
        det += c % 2 == 0 ? term : BigInt(-term);
    }
    return det;
}

}  // namespace

TEST(CountPaths, SingleWalkerReturn) {
    EXPECT_EQ(count_paths(2, LatticeConfig({0}, false), LatticeConfig::endpoint({0}, false)).value, 2);
}

TEST(CountPaths, TwoWalkersTotalTen) {
    const LatticeConfig u({0, 2}, false);
    BigInt total = 0;
    for (long long a = -2; a <= 4; ++a)
        for (long long b = a + 1; b <= 4; ++b) total += count_paths(2, u, LatticeConfig::endpoint({a, b}, false)).value;
    EXPECT_EQ(total, 10);
}

TEST(CountPaths, InfeasibleEndpointIsZero) {
    const LatticeConfig u({0, 2}, false);
    EXPECT_EQ(count_paths(1, u, LatticeConfig::endpoint({1, 1}, false)).value, 0);
    EXPECT_EQ(count_paths(3, u, LatticeConfig::endpoint({0, 2}, false)).value, 0);
    EXPECT_EQ(count_paths(2, u, LatticeConfig::endpoint({-6, 2}, false)).value, 0);
}

TEST(CountPaths, MatchesBruteForceEnumeration) {
    const std::vector<std::pair<std::vector<long long>, bool>> starts = {
        {{0}, false}, {{0, 2}, false}, {{0, 4}, false}, {{0, 2, 4}, false},
        {{0}, true},  {{2}, true},     {{0, 2}, true},  {{2, 4, 8}, true}};
    for (const auto& [u, wall] : starts) {
        const long long max_m = u.size() == 3 ? 5 : 7;
        for (long long m = 0; m <= max_m; ++m) {
            const auto brute = enumerate_paths(m, u, wall);
            const LatticeConfig start(u, wall);
            long long seen = 0;
            detail::for_each_endpoint(m, start, [&](const LatticeConfig& v) {
                const auto it = brute.find(v.positions());
                const long long want = it == brute.end() ? 0 : it->second;
                EXPECT_EQ(count_paths(m, start, v).value, want) << "m=" << m;
                if (want > 0) ++seen;
            });
            EXPECT_EQ(seen, static_cast<long long>(brute.size())) << "m=" << m;
        }
    }
}

TEST(CountPaths, AgreesWithDynamicProgram) {
    for (bool wall : {false, true})
        for (std::size_t n = 1; n <= 3; ++n)
            for (long long m = 0; m <= 8; ++m) {
                const LatticeConfig u = LatticeConfig::packed(n, wall);
                const auto dp = oracle_count_dp(m, u);
                detail::for_each_endpoint(m, u, [&](const LatticeConfig& v) {
                    const auto it = dp.find(v.positions());
                    EXPECT_EQ(count_paths(m, u, v).value, it == dp.end() ? BigInt(0) : it->second);
                });
            }
}

TEST(CountPaths, TranslationInvariantWithoutWall) {
    const LatticeConfig u({0, 2, 6}, false);
    const LatticeConfig us({-4, -2, 2}, false);
    for (long long m = 1; m <= 6; ++m)
        detail::for_each_endpoint(m, u, [&](const LatticeConfig& v) {
            auto p = v.positions();
            for (auto& x : p) x -= 4;
            EXPECT_EQ(count_paths(m, u, v).value, count_paths(m, us, LatticeConfig::endpoint(p, false)).value);
        });
}

TEST(CountPaths, NonnegativeAndBounded) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 4;
        const bool wall = rng() % 2;
        std::vector<long long> u(n);
        long long pos = wall ? 0 : -10;
        for (auto& x : u) {
            pos += 2 * static_cast<long long>(rng() % 3);
            x = pos;
            pos += 2;
        }
        const long long m = static_cast<long long>(rng() % 30);
        std::vector<long long> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = u[i] + m - 2 * static_cast<long long>(rng() % (m + 1));
        std::sort(v.begin(), v.end());
        const BigInt c = count_paths(m, LatticeConfig(u, wall), LatticeConfig::endpoint(v, wall)).value;
        EXPECT_GE(c, 0);
        EXPECT_LE(c, BigInt(1) << static_cast<unsigned>(m * static_cast<long long>(n)));
    }
}

TEST(CountPaths, Errors) {
    EXPECT_THROW(count_paths(-1, LatticeConfig({0}, false), LatticeConfig::endpoint({0}, false)), std::invalid_argument);
    EXPECT_THROW(count_paths(2, LatticeConfig({0, 2}, false), LatticeConfig::endpoint({0}, false)), std::invalid_argument);
    EXPECT_THROW(count_paths(2, LatticeConfig({0}, true), LatticeConfig::endpoint({0}, false)), std::invalid_argument);
    EXPECT_THROW(LatticeConfig({1}, false), std::invalid_argument);
    EXPECT_THROW(LatticeConfig({2, 0}, false), std::invalid_argument);
    EXPECT_THROW(LatticeConfig({-2}, true), std::invalid_argument);
}

TEST(Bareiss, MatchesCofactorExpansion) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng() % 6;
        std::vector<std::vector<BigInt>> a(n, std::vector<BigInt>(n));
        for (auto& row : a)
            for (auto& x : row) x = static_cast<long long>(rng() % 2001) - 1000;
        if (trial % 10 == 0 && n > 1) a[1] = a[0];
        EXPECT_EQ(detail::bareiss_determinant(a), cofactor_determinant(a));
    }
}

TEST(WalkProbability, Examples) {
    EXPECT_EQ(walk_probability(2, LatticeConfig({0}, false), LatticeConfig::endpoint({0}, false)), Rational(1, 2));
    EXPECT_EQ(walk_probability(2, LatticeConfig({0}, false), LatticeConfig::endpoint({6}, false)), Rational(0));
    const LatticeConfig u({0, 2}, false);
    Rational total = 0;
    detail::for_each_endpoint(2, u, [&](const LatticeConfig& v) { total += walk_probability(2, u, v); });
    EXPECT_EQ(total, Rational(10, 16));
}

TEST(SurvivalProbability, Examples) {
    for (long long m = 0; m <= 12; m += 3) EXPECT_EQ(survival_probability(m, LatticeConfig({0}, false)), Rational(1));
    EXPECT_EQ(survival_probability(2, LatticeConfig({0, 2}, false)), Rational(10, 16));
    EXPECT_EQ(survival_probability(0, LatticeConfig({0, 2}, false)), Rational(1));
}

TEST(SurvivalProbability, NonincreasingInSteps) {
    for (bool wall : {false, true}) {
        const LatticeConfig u({0, 2, 4}, wall);
        Rational prev = survival_probability(0, u);
        EXPECT_EQ(prev, Rational(1));
        for (long long m = 1; m <= 14; ++m) {
            const Rational cur = survival_probability(m, u);
            EXPECT_LE(cur, prev) << "m=" << m;
            prev = cur;
        }
    }
}

TEST(OracleDp, SingleWalkerIsPascalRow) {
    const auto dp = oracle_count_dp(6, LatticeConfig({0}, false));
    const auto row = detail::binomial_row(6);
    for (long long k = 0; k <= 6; ++k) EXPECT_EQ(dp.at({2 * k - 6}), row[static_cast<std::size_t>(k)]);
}

TEST(OracleDp, WallSingleWalkerTwoSteps) {
    const auto dp = oracle_count_dp(2, LatticeConfig({0}, true));
    EXPECT_EQ(dp.size(), 2u);
    EXPECT_EQ(dp.at({0}), 1);
    EXPECT_EQ(dp.at({2}), 1);
}

TEST(OracleDp, RejectsLargeInstances) {
    EXPECT_THROW(oracle_count_dp(13, LatticeConfig({0}, false)), std::invalid_argument);
    EXPECT_THROW(oracle_count_dp(2, LatticeConfig({0, 2, 4, 6, 8}, false)), std::invalid_argument);
}

TEST(ScaledSurvival, SingleWalker) {
    const auto r = scaled_survival(8, 1, LatticeConfig({0}, false));
    EXPECT_DOUBLE_EQ(r.exact, 1.0);
    EXPECT_DOUBLE_EQ(r.predicted, 1.0);
}

TEST(ScaledSurvival, TwoWalkersApproachOneMonotonically) {
    const LatticeConfig u({0, 2}, false);
    double prev = std::numeric_limits<double>::infinity();
    for (double scale : {8.0, 16.0, 32.0}) {
        const auto r = scaled_survival(scale, 1, u);
        EXPECT_TRUE(r.exact_arithmetic);
        EXPECT_EQ(r.steps, static_cast<long long>(scale * scale));
        const double err = std::abs(r.ratio - 1);
        EXPECT_LT(err, prev) << "L=" << scale;
        prev = err;
    }
    EXPECT_LT(prev, 0.05);
}

TEST(ScaledSurvival, ThreeWalkersWithinQuarter) {
    const auto r = scaled_survival(16, 1, LatticeConfig({0, 2, 4}, false));
    EXPECT_NEAR(r.ratio, 1.0, 0.25);
}

TEST(ScaledSurvival, FloatFallbackAgreesWithExact) {
    for (bool wall : {false, true}) {
        const LatticeConfig u({0, 2, 4}, wall);
        const auto exact = scaled_survival(6, 1, u);
        const auto approx = scaled_survival(6, 1, u, 0.0);
        EXPECT_TRUE(exact.exact_arithmetic);
        EXPECT_FALSE(approx.exact_arithmetic);
        EXPECT_FALSE(approx.exact_rational.has_value());
        EXPECT_NEAR(approx.exact, exact.exact, 1e-10 * exact.exact);
    }
}

TEST(ScaledSurvival, Errors) {
    EXPECT_THROW(scaled_survival(0.5, 1, LatticeConfig({0}, false)), std::invalid_argument);
    EXPECT_THROW(scaled_survival(4, 0, LatticeConfig({0}, false)), std::invalid_argument);
}
