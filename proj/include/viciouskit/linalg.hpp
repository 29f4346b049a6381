#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace viciouskit {

// Dense row-major matrix. Small sizes only (N <= 64 in practice).
template <typename T>
class BasicMatrix {
public:
    BasicMatrix() = default;
    BasicMatrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static BasicMatrix identity(std::size_t n) {
        BasicMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    void swap_rows(std::size_t a, std::size_t b) {
        if (a == b) return;
        std::swap_ranges(data_.begin() + a * cols_, data_.begin() + (a + 1) * cols_,
                         data_.begin() + b * cols_);
    }

    const std::vector<T>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using Matrix = BasicMatrix<double>;
using ComplexMatrix = BasicMatrix<std::complex<double>>;

inline Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("multiply: shape mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

// Sign and log-magnitude of a real quantity. sign == 0 means exactly zero.
struct SignedLog {
    int sign = 0;
    double log_abs = -std::numeric_limits<double>::infinity();

    double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }
};

// LU with partial pivoting, accumulated in the log domain.
inline SignedLog log_determinant(Matrix a) {
    if (!a.square()) throw std::invalid_argument("determinant: matrix must be square");
    const std::size_t n = a.rows();
    SignedLog out{1, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(a(i, k)) > best) {
                best = std::abs(a(i, k));
                piv = i;
            }
        }
        if (best == 0.0) return {};
        if (piv != k) {
            a.swap_rows(piv, k);
            out.sign = -out.sign;
        }
        const double p = a(k, k);
        if (p < 0) out.sign = -out.sign;
        out.log_abs += std::log(std::abs(p));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) / p;
            if (f == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
    return out;
}

inline double determinant(const Matrix& a) {
    if (a.rows() == 0 && a.cols() == 0) return 1.0;
    return log_determinant(a).value();
}

// Determinant of a matrix given entrywise in the log domain:
// a_ij = sign_ij * exp(log_entries_ij). Rows are rescaled by their largest
// log-entry before elimination so large/small Gaussian factors do not over- or
// underflow.
inline SignedLog log_determinant_from_logs(const Matrix& log_entries, const Matrix& signs) {
    const std::size_t n = log_entries.rows();
    Matrix scaled(n, n);
    double shift = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j)
            if (signs(i, j) != 0.0) mx = std::max(mx, log_entries(i, j));
        if (!std::isfinite(mx)) return {};
        shift += mx;
        for (std::size_t j = 0; j < n; ++j)
            scaled(i, j) = signs(i, j) == 0.0 ? 0.0 : signs(i, j) * std::exp(log_entries(i, j) - mx);
    }
    SignedLog d = log_determinant(std::move(scaled));
    if (d.sign != 0) d.log_abs += shift;
    return d;
}

// Antisymmetric matrix stored densely; only set() writes, so a_ij = -a_ji and
// a_ii = 0 hold exactly.
class SkewMatrix {
public:
    explicit SkewMatrix(std::size_t n) : m_(n, n) {}

    std::size_t size() const { return m_.rows(); }

    // Sets a_ij (i < j) and its mirror.
    void set(std::size_t i, std::size_t j, double v) {
        if (i == j) throw std::invalid_argument("SkewMatrix: diagonal is fixed at zero");
        m_(i, j) = v;
        m_(j, i) = -v;
    }
    double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

    const Matrix& dense() const { return m_; }

private:
    Matrix m_;
};

// Parlett-Reid style skew elimination (L T L^T) with pivoting on the largest
// sub-diagonal magnitude, log-domain accumulation.
inline SignedLog log_pfaffian(const SkewMatrix& skew) {
    const std::size_t n = skew.size();
    if (n % 2 != 0) throw std::invalid_argument("pfaffian: dimension must be even");
    Matrix a = skew.dense();
    SignedLog out{1, 0.0};
    for (std::size_t k = 0; k + 1 < n; k += 2) {
        std::size_t kp = k + 1;
        double best = std::abs(a(k + 1, k));
        for (std::size_t i = k + 2; i < n; ++i) {
            if (std::abs(a(i, k)) > best) {
                best = std::abs(a(i, k));
                kp = i;
            }
        }
        if (best == 0.0) return {};
        if (kp != k + 1) {
            a.swap_rows(k + 1, kp);
            for (std::size_t r = 0; r < n; ++r) std::swap(a(r, k + 1), a(r, kp));
            out.sign = -out.sign;
        }
        const double pivot = a(k, k + 1);
        if (pivot < 0) out.sign = -out.sign;
        out.log_abs += std::log(std::abs(pivot));
        if (k + 2 < n) {
            std::vector<double> tau(n, 0.0);
            for (std::size_t j = k + 2; j < n; ++j) tau[j] = a(k, j) / pivot;
            for (std::size_t i = k + 2; i < n; ++i)
                for (std::size_t j = k + 2; j < n; ++j)
                    a(i, j) += tau[i] * a(j, k + 1) - a(i, k + 1) * tau[j];
        }
    }
    return out;
}

inline double pfaffian(const SkewMatrix& skew) {
    if (skew.size() == 0) return 1.0;
    return log_pfaffian(skew).value();
}

namespace detail {

// Cyclic Jacobi sweeps on a real symmetric matrix; returns the diagonal.
inline std::vector<double> jacobi_eigenvalues(Matrix a) {
    const std::size_t n = a.rows();
    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0, total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                total += a(i, j) * a(i, j);
                if (i != j) off += a(i, j) * a(i, j);
            }
        if (off <= 1e-30 * total || off == 0.0) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

inline double frobenius_scale(const Matrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    return std::sqrt(s);
}

}  // namespace detail

// Ascending spectrum of a real symmetric matrix (cyclic Jacobi).
inline std::vector<double> symmetric_eigenvalues(const Matrix& m) {
    if (!m.square()) throw std::invalid_argument("symmetric_eigenvalues: matrix must be square");
    const double tol = 1e-12 * std::max(1.0, detail::frobenius_scale(m));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j)
            if (std::abs(m(i, j) - m(j, i)) > tol)
                throw std::invalid_argument("symmetric_eigenvalues: matrix is not symmetric");
    return detail::jacobi_eigenvalues(m);
}

// Hermitian input goes through the 2N x 2N real embedding [[Re, -Im], [Im, Re]],
// whose spectrum is that of M with every eigenvalue doubled.
inline std::vector<double> symmetric_eigenvalues(const ComplexMatrix& m) {
    if (!m.square()) throw std::invalid_argument("symmetric_eigenvalues: matrix must be square");
    const std::size_t n = m.rows();
    double scale = 0.0;
    for (const auto& v : m.data()) scale += std::norm(v);
    const double tol = 1e-12 * std::max(1.0, std::sqrt(scale));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            if (std::abs(m(i, j) - std::conj(m(j, i))) > tol)
                throw std::invalid_argument("symmetric_eigenvalues: matrix is not Hermitian");
    Matrix e(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double re = m(i, j).real(), im = m(i, j).imag();
            e(i, j) = re;
            e(i + n, j + n) = re;
            e(i, j + n) = -im;
            e(i + n, j) = im;
        }
    std::vector<double> doubled = detail::jacobi_eigenvalues(std::move(e));
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = 0.5 * (doubled[2 * i] + doubled[2 * i + 1]);
    return ev;
}

}  // namespace viciouskit
