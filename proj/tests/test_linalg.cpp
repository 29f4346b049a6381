#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "viciouskit/linalg.hpp"
#include "viciouskit/random.hpp"

using namespace viciouskit;

namespace {

double cofactor_det(const Matrix& a) {
    const std::size_t n = a.rows();
    if (n == 1) return a(0, 0);
    double det = 0;
    for (std::size_t c = 0; c < n; ++c) {
        Matrix minor(n - 1, n - 1);
        for (std::size_t r = 1; r < n; ++r)
            for (std::size_t k = 0, kk = 0; k < n; ++k)
                if (k != c) minor(r - 1, kk++) = a(r, k);
        det += (c % 2 == 0 ? 1 : -1) * a(0, c) * cofactor_det(minor);
    }
    return det;
}

// Sum over perfect matchings with the crossing sign.
double pairing_pfaffian(const SkewMatrix& a) {
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < a.size(); ++i) free.push_back(i);
    std::function<double(std::vector<std::size_t>)> rec = [&](std::vector<std::size_t> rest) -> double {
        if (rest.empty()) return 1.0;
        double s = 0;
        for (std::size_t k = 1; k < rest.size(); ++k) {
            std::vector<std::size_t> next;
            for (std::size_t r = 1; r < rest.size(); ++r)
                if (r != k) next.push_back(rest[r]);
            s += ((k - 1) % 2 == 0 ? 1 : -1) * a(rest[0], rest[k]) * rec(next);
        }
        return s;
    };
    return rec(free);
}

SkewMatrix random_skew(std::size_t n, RandomStream& rng) {
    SkewMatrix s(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) s.set(i, j, rng.gaussian());
    return s;
}

Matrix random_orthogonal(std::size_t n, RandomStream& rng) {
    Matrix q(n, n);
    for (auto i = 0u; i < n; ++i)
        for (auto j = 0u; j < n; ++j) q(i, j) = rng.gaussian();
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            double d = 0;
            for (std::size_t i = 0; i < n; ++i) d += q(i, j) * q(i, k);
            for (std::size_t i = 0; i < n; ++i) q(i, j) -= d * q(i, k);
        }
        double nrm = 0;
        for (std::size_t i = 0; i < n; ++i) nrm += q(i, j) * q(i, j);
        for (std::size_t i = 0; i < n; ++i) q(i, j) /= std::sqrt(nrm);
    }
    return q;
}

}  // namespace

TEST(Determinant, Examples) {
    EXPECT_EQ(determinant(Matrix::identity(3)), 1.0);
    Matrix v(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) v(i, j) = std::pow(i + 1.0, static_cast<double>(j));
    EXPECT_NEAR(determinant(v), 2.0, 1e-13);
    Matrix singular(2, 2);
    singular(0, 0) = 1, singular(0, 1) = 2, singular(1, 0) = 2, singular(1, 1) = 4;
    EXPECT_NEAR(determinant(singular), 0.0, 1e-14);
}

TEST(Determinant, MatchesCofactorExpansion) {
    RandomStream rng(1, 0, 0);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix a(5, 5);
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = 0; j < 5; ++j) a(i, j) = rng.gaussian();
        const double want = cofactor_det(a);
        EXPECT_NEAR(determinant(a), want, 1e-10 * std::abs(want));
        const SignedLog l = log_determinant(a);
        EXPECT_NEAR(l.value(), want, 1e-10 * std::abs(want));
    }
}

TEST(Determinant, LogEntriesForm) {
    RandomStream rng(2, 0, 0);
    Matrix a(4, 4), logs(4, 4), signs(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            a(i, j) = rng.gaussian();
            logs(i, j) = std::log(std::abs(a(i, j)));
            signs(i, j) = a(i, j) < 0 ? -1 : 1;
        }
    const double want = cofactor_det(a);
    EXPECT_NEAR(log_determinant_from_logs(logs, signs).value(), want, 1e-10 * std::abs(want));
}

TEST(Pfaffian, SmallFormulas) {
    SkewMatrix a(2);
    a.set(0, 1, 3.5);
    EXPECT_DOUBLE_EQ(pfaffian(a), 3.5);
    SkewMatrix b(4);
    const double a12 = 1.3, a13 = -0.4, a14 = 2.2, a23 = 0.9, a24 = 1.7, a34 = -0.6;
    b.set(0, 1, a12), b.set(0, 2, a13), b.set(0, 3, a14), b.set(1, 2, a23), b.set(1, 3, a24), b.set(2, 3, a34);
    EXPECT_NEAR(pfaffian(b), a12 * a34 - a13 * a24 + a14 * a23, 1e-14);
    EXPECT_EQ(pfaffian(SkewMatrix(0)), 1.0);
}

TEST(Pfaffian, MatchesPairingSum) {
    RandomStream rng(3, 0, 0);
    for (std::size_t n : {6u, 8u}) {
        const SkewMatrix s = random_skew(n, rng);
        const double want = pairing_pfaffian(s);
        EXPECT_NEAR(pfaffian(s), want, 1e-10 * std::abs(want));
    }
}

TEST(Pfaffian, SquareIsDeterminant) {
    RandomStream rng(4, 0, 0);
    for (std::size_t n : {2u, 4u, 6u, 8u})
        for (int trial = 0; trial < 10; ++trial) {
            const SkewMatrix s = random_skew(n, rng);
            const double pf = pfaffian(s), det = determinant(s.dense());
            EXPECT_NEAR(pf * pf, det, 1e-10 * std::abs(det));
        }
}

TEST(Pfaffian, SignFlipUnderSwap) {
    RandomStream rng(5, 0, 0);
    const SkewMatrix s = random_skew(6, rng);
    SkewMatrix t(6);
    auto perm = [](std::size_t i) { return i == 1 ? 4 : i == 4 ? 1 : i; };
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = i + 1; j < 6; ++j) t.set(i, j, s(perm(i), perm(j)));
    EXPECT_NEAR(pfaffian(t), -pfaffian(s), 1e-12 * std::abs(pfaffian(s)));
}

TEST(Pfaffian, Errors) {
    EXPECT_THROW(pfaffian(SkewMatrix(3)), std::invalid_argument);
    SkewMatrix s(2);
    EXPECT_THROW(s.set(1, 1, 1.0), std::invalid_argument);
}

TEST(Eigenvalues, Examples) {
    Matrix d(3, 3);
    d(0, 0) = 3, d(1, 1) = 1, d(2, 2) = 2;
    EXPECT_EQ(symmetric_eigenvalues(d), (std::vector<double>{1, 2, 3}));
    Matrix x(2, 2);
    x(0, 1) = x(1, 0) = 1;
    const auto ev = symmetric_eigenvalues(x);
    EXPECT_NEAR(ev[0], -1, 1e-14);
    EXPECT_NEAR(ev[1], 1, 1e-14);
}

TEST(Eigenvalues, TraceAndFrobeniusConserved) {
    RandomStream rng(6, 0, 0);
    Matrix a(6, 6);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = i; j < 6; ++j) a(i, j) = a(j, i) = rng.gaussian();
    double tr = 0, fro = 0;
    for (std::size_t i = 0; i < 6; ++i) tr += a(i, i);
    for (double v : a.data()) fro += v * v;
    double s1 = 0, s2 = 0;
    for (double l : symmetric_eigenvalues(a)) s1 += l, s2 += l * l;
    EXPECT_NEAR(s1, tr, 1e-10);
    EXPECT_NEAR(s2, fro, 1e-10);
}

TEST(Eigenvalues, OrthogonalInvariance) {
    RandomStream rng(7, 0, 0);
    Matrix a(5, 5);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = i; j < 5; ++j) a(i, j) = a(j, i) = rng.gaussian();
    const Matrix q = random_orthogonal(5, rng);
    Matrix b = multiply(multiply(q, a), transpose(q));
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = i + 1; j < 5; ++j) b(j, i) = b(i, j);
    const auto ea = symmetric_eigenvalues(a), eb = symmetric_eigenvalues(b);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(ea[i], eb[i], 1e-9);
}

TEST(Eigenvalues, Hermitian) {
    ComplexMatrix h(2, 2);
    h(0, 0) = 1;
    h(1, 1) = -1;
    h(0, 1) = {0, 1};
    h(1, 0) = {0, -1};
    const auto ev = symmetric_eigenvalues(h);
    ASSERT_EQ(ev.size(), 2u);
    EXPECT_NEAR(ev[0], -std::sqrt(2.0), 1e-13);
    EXPECT_NEAR(ev[1], std::sqrt(2.0), 1e-13);
}

TEST(Eigenvalues, RejectsNonHermitian) {
    Matrix a(2, 2);
    a(0, 1) = 1;
    EXPECT_THROW(symmetric_eigenvalues(a), std::invalid_argument);
    ComplexMatrix h(2, 2);
    h(0, 1) = {0, 1};
    h(1, 0) = {0, 1};
    EXPECT_THROW(symmetric_eigenvalues(h), std::invalid_argument);
}
