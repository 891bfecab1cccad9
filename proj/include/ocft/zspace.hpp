#pragma once

// Coordinates and proposal densities on the flavour-space matrices Z:
// complex skew-symmetric (fermionic) or complex symmetric (bosonic) n x n.
// Flat measure convention: product of dRe dIm over the independent entries
// (strict upper triangle for skew, upper triangle for symmetric).

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/SVD>

#include "ocft/errors.hpp"
#include "ocft/linalg.hpp"

namespace ocft {

/// Number of independent complex entries of an n x n skew matrix.
constexpr std::size_t skew_entries(std::size_t n) { return n * (n - 1) / 2; }

/// Number of independent complex entries of an n x n symmetric matrix.
constexpr std::size_t symmetric_entries(std::size_t n) { return n * (n + 1) / 2; }

/// Skew matrix from its strict upper triangle (row-major order).
inline ComplexMatrix skew_from_upper(std::size_t n, std::span<const Complex> upper) {
    if (upper.size() != skew_entries(n)) throw ShapeError("skew_from_upper: wrong entry count");
    ComplexMatrix z(n, n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            z(i, j) = upper[k];
            z(j, i) = -upper[k];
            ++k;
        }
    return z;
}

/// Symmetric matrix from its upper triangle including the diagonal.
inline ComplexMatrix symmetric_from_upper(std::size_t n, std::span<const Complex> upper) {
    if (upper.size() != symmetric_entries(n))
        throw ShapeError("symmetric_from_upper: wrong entry count");
    ComplexMatrix z(n, n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            z(i, j) = upper[k];
            z(j, i) = upper[k];
            ++k;
        }
    return z;
}

/// log det(1 + s Z Z^dagger) for s = +1 (fermionic) or s = -1 (bosonic);
/// nullopt when the bosonic matrix is not positive definite.
inline std::optional<double> log_det_one_plus(const ComplexMatrix& z, double s) {
    if (s > 0.0) {
        // Singular values keep the unit eigenvalues of rank-deficient Z Z^dagger
        // even when |Z| is huge.
        Eigen::MatrixXcd m(z.rows(), z.cols());
        for (std::size_t i = 0; i < z.rows(); ++i)
            for (std::size_t j = 0; j < z.cols(); ++j) m(Eigen::Index(i), Eigen::Index(j)) = z(i, j);
        const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues();
        double acc = 0.0;
        for (Eigen::Index k = 0; k < sv.size(); ++k) acc += std::log1p(sv[k] * sv[k]);
        return acc;
    }
    ComplexMatrix h = z * z.adjoint();
    h *= Complex(s);
    for (std::size_t i = 0; i < h.rows(); ++i) h(i, i) += 1.0;
    return hermitian_logdet(h);
}

/// Isotropic multivariate Student-t on R^d with `dof` degrees of freedom and
/// scale `scale`; heavy-tailed proposal for importance sampling.
struct StudentTProposal {
    std::size_t dim = 1;
    double dof = 0.5;
    double scale = 0.35;

    template <class Engine>
    std::vector<double> draw(Engine& eng) const {
        std::normal_distribution<double> normal(0.0, scale);
        std::gamma_distribution<double> chi2(dof / 2.0, 2.0);
        std::vector<double> x(dim);
        for (auto& v : x) v = normal(eng);
        const double w = std::max(chi2(eng), 1e-300);
        const double f = 1.0 / std::sqrt(w / dof);
        for (auto& v : x) v *= f;
        return x;
    }

    /// Log density up to its normalising constant.
    double log_density_unnormalised(std::span<const double> x) const {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        return -0.5 * (dof + double(dim)) * std::log1p(r2 / (dof * scale * scale));
    }

    double log_normaliser() const {
        const double d = double(dim);
        return std::lgamma(0.5 * (dof + d)) - std::lgamma(0.5 * dof) -
               0.5 * d * std::log(dof * std::numbers::pi) - d * std::log(scale);
    }

    double log_density(std::span<const double> x) const {
        return log_normaliser() + log_density_unnormalised(x);
    }
};

/// Pack real coordinates (re, im pairs) into complex entries.
inline std::vector<Complex> as_complex(std::span<const double> x) {
    std::vector<Complex> c(x.size() / 2);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = Complex(x[2 * k], x[2 * k + 1]);
    return c;
}

}  // namespace ocft
