#pragma once

// Dense complex linear algebra and the small combinatorial/special-function
// helpers shared by the rest of the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ocft/errors.hpp"

namespace ocft {

using Complex = std::complex<double>;
using RealVector = std::vector<double>;

/// Row-major dense complex matrix.
class ComplexMatrix {
public:
    ComplexMatrix() = default;

    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, Complex{}) {}

    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (data_.size() != rows_ * cols_) {
            throw DimensionError("ComplexMatrix: entry count " + std::to_string(data_.size()) +
                                 " does not match " + std::to_string(rows_) + "x" +
                                 std::to_string(cols_));
        }
    }

    ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw DimensionError("ComplexMatrix: ragged initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static ComplexMatrix diagonal(std::span<const Complex> d) {
        ComplexMatrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<Complex> entries() noexcept { return data_; }
    std::span<const Complex> entries() const noexcept { return data_; }

    ComplexMatrix transpose() const {
        ComplexMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    ComplexMatrix adjoint() const {
        ComplexMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = std::conj((*this)(i, j));
        return t;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    /// |A + A^T|_max <= tol.
    bool is_skew(double tol) const {
        if (!square()) return false;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = i; j < cols_; ++j)
                if (std::abs((*this)(i, j) + (*this)(j, i)) > tol) return false;
        return true;
    }

    ComplexMatrix& operator+=(const ComplexMatrix& o) {
        check_same(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }
    ComplexMatrix& operator-=(const ComplexMatrix& o) {
        check_same(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }
    ComplexMatrix& operator*=(Complex s) {
        for (auto& v : data_) v *= s;
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
    friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols_ != b.rows_) throw DimensionError("ComplexMatrix: product shape mismatch");
        ComplexMatrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const Complex aik = a(i, k);
                if (aik == Complex{}) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    /// Principal-style submatrix on the given row and column index lists.
    ComplexMatrix submatrix(std::span<const std::size_t> rows,
                            std::span<const std::size_t> cols) const {
        ComplexMatrix s(rows.size(), cols.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < cols.size(); ++j) s(i, j) = (*this)(rows[i], cols[j]);
        return s;
    }

private:
    void check_same(const ComplexMatrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw DimensionError("ComplexMatrix: elementwise shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> data_;
};

/// Default skew tolerance: 1e-12 relative to the largest entry.
inline double default_skew_tolerance(const ComplexMatrix& a) { return 1e-12 * a.max_abs(); }

/// Pfaffian by skew-symmetric Parlett-Reid elimination with partial pivoting.
/// A negative tolerance selects the default relative tolerance.
inline Complex pfaffian(const ComplexMatrix& a, double tol = -1.0) {
    if (!a.square()) throw DimensionError("pfaffian: matrix is not square");
    const std::size_t n = a.rows();
    if (n % 2 != 0) throw DimensionError("pfaffian: odd dimension " + std::to_string(n));
    if (tol < 0.0) tol = default_skew_tolerance(a);
    if (!a.is_skew(tol)) throw ShapeError("pfaffian: matrix is not skew-symmetric");
    if (n == 0) return 1.0;

    ComplexMatrix w(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) w(i, j) = 0.5 * (a(i, j) - a(j, i));

    Complex result = 1.0;
    std::vector<Complex> tau(n);
    for (std::size_t k = 0; k + 1 < n; k += 2) {
        std::size_t piv = k + 1;
        double best = std::abs(w(k + 1, k));
        for (std::size_t i = k + 2; i < n; ++i) {
            const double v = std::abs(w(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (piv != k + 1) {
            for (std::size_t j = 0; j < n; ++j) std::swap(w(k + 1, j), w(piv, j));
            for (std::size_t i = 0; i < n; ++i) std::swap(w(i, k + 1), w(i, piv));
            result = -result;
        }
        if (best == 0.0) return 0.0;

        const Complex head = w(k, k + 1);
        result *= head;
        if (k + 2 < n) {
            for (std::size_t j = k + 2; j < n; ++j) tau[j] = w(k, j) / head;
            for (std::size_t i = k + 2; i < n; ++i) {
                const Complex col = w(i, k + 1);
                for (std::size_t j = k + 2; j < n; ++j)
                    w(i, j) += tau[i] * w(j, k + 1) - col * tau[j];
            }
        }
    }
    return result;
}

/// Determinant by LU with partial pivoting; closed formula for order <= 2.
inline Complex determinant(const ComplexMatrix& a) {
    if (!a.square()) throw DimensionError("determinant: matrix is not square");
    const std::size_t n = a.rows();
    if (n == 0) return 1.0;
    if (n == 1) return a(0, 0);
    if (n == 2) return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);

    ComplexMatrix lu = a;
    Complex det = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(lu(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(lu(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best == 0.0) return 0.0;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
            det = -det;
        }
        const Complex d = lu(k, k);
        det *= d;
        for (std::size_t i = k + 1; i < n; ++i) {
            const Complex f = lu(i, k) / d;
            if (f == Complex{}) continue;
            for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
        }
    }
    return det;
}

/// Determinant of a small real matrix stored row-major in `m` (order n,
/// destroyed on return).
inline double small_real_determinant(double* m, std::size_t n) {
    double det = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(m[k * n + k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(m[i * n + k]);
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best == 0.0) return 0.0;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m[k * n + j], m[piv * n + j]);
            det = -det;
        }
        const double d = m[k * n + k];
        det *= d;
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = m[i * n + k] / d;
            for (std::size_t j = k + 1; j < n; ++j) m[i * n + j] -= f * m[k * n + j];
        }
    }
    return det;
}

/// log det(H) for a Hermitian matrix, or nullopt when H is not positive
/// definite (Cholesky breaks down).
inline std::optional<double> hermitian_logdet(const ComplexMatrix& h) {
    if (!h.square()) throw DimensionError("hermitian_logdet: matrix is not square");
    const std::size_t n = h.rows();
    ComplexMatrix l(n, n);
    double logdet = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double d = h(j, j).real();
        for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
        if (!(d > 0.0)) return std::nullopt;
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        logdet += 2.0 * std::log(ljj);
        for (std::size_t i = j + 1; i < n; ++i) {
            Complex s = h(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
            l(i, j) = s / ljj;
        }
    }
    return logdet;
}

/// Coefficients of prod_i (1 + v_i t), i.e. S^0..S^n of the values.
inline RealVector elementary_symmetric_all(std::span<const double> values) {
    RealVector coeff(values.size() + 1, 0.0);
    coeff[0] = 1.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        for (std::size_t l = i + 1; l > 0; --l) coeff[l] += values[i] * coeff[l - 1];
    }
    return coeff;
}

/// S^l(values): sum of all l-fold products of distinct entries.
inline double elementary_symmetric(std::span<const double> values, std::size_t l) {
    if (l > values.size())
        throw IndexError("elementary_symmetric: order " + std::to_string(l) + " exceeds " +
                         std::to_string(values.size()) + " values");
    return elementary_symmetric_all(values)[l];
}

inline double log_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive");
    return std::lgamma(x);
}

inline double log_beta(double x, double y) {
    if (!(x > 0.0) || !(y > 0.0)) throw DomainError("log_beta: arguments must be positive");
    return std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y);
}

/// Binomial coefficient C(n, k) as a double.
inline double binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
    return r;
}

}  // namespace ocft
