#pragma once

// Haar sampling on O(N) and SO(N) plus a Monte-Carlo expectation driver.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <random>
#include <string>

#include "ocft/errors.hpp"
#include "ocft/linalg.hpp"
#include "ocft/mc.hpp"
#include "ocft/rng.hpp"

namespace ocft {

enum class Group { O, SO };

inline const char* to_string(Group g) { return g == Group::O ? "O" : "SO"; }

/// Haar-distributed real orthogonal matrix: QR of a standard Gaussian matrix
/// with the columns of Q rescaled by sign(diag R).
template <class Engine>
Eigen::MatrixXd sample_orthogonal_real(std::size_t n, Engine& eng) {
    if (n == 0) throw DimensionError("sample_orthogonal: N must be at least 1");
    std::normal_distribution<double> normal;
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = normal(eng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ();
    const auto& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < q.cols(); ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

/// Haar sample on SO(N): an O(N) draw whose last row is negated when det = -1.
template <class Engine>
Eigen::MatrixXd sample_special_orthogonal_real(std::size_t n, Engine& eng) {
    Eigen::MatrixXd q = sample_orthogonal_real(n, eng);
    if (q.determinant() < 0.0) q.row(q.rows() - 1) = -q.row(q.rows() - 1);
    return q;
}

template <class Engine>
Eigen::MatrixXd sample_group_real(Group g, std::size_t n, Engine& eng) {
    return g == Group::O ? sample_orthogonal_real(n, eng) : sample_special_orthogonal_real(n, eng);
}

inline ComplexMatrix to_complex(const Eigen::MatrixXd& m) {
    ComplexMatrix c(std::size_t(m.rows()), std::size_t(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) c(std::size_t(i), std::size_t(j)) = m(i, j);
    return c;
}

template <class Engine>
ComplexMatrix sample_orthogonal(std::size_t n, Engine& eng) {
    return to_complex(sample_orthogonal_real(n, eng));
}

template <class Engine>
ComplexMatrix sample_special_orthogonal(std::size_t n, Engine& eng) {
    return to_complex(sample_special_orthogonal_real(n, eng));
}

inline ComplexMatrix sample_orthogonal(std::size_t n, const RngStream& rng) {
    auto eng = rng.engine();
    return sample_orthogonal(n, eng);
}

inline ComplexMatrix sample_special_orthogonal(std::size_t n, const RngStream& rng) {
    auto eng = rng.engine();
    return sample_special_orthogonal(n, eng);
}

using MatrixFunction = std::function<Complex(const ComplexMatrix&)>;

/// Sample mean and standard error of f over Haar draws from `group`.
inline Estimate mc_expectation(const MatrixFunction& f, std::size_t n, const McConfig& cfg,
                               Group group = Group::O) {
    if (cfg.samples < 2) throw ConfigError("mc_expectation: need at least 2 samples");
    if (n == 0) throw DimensionError("mc_expectation: N must be at least 1");
    auto acc = run_monte_carlo(cfg, MeanAccumulator(1), [&](Xoshiro256pp& eng, MeanAccumulator& a) {
        const Complex v = f(to_complex(sample_group_real(group, n, eng)));
        a.add(std::span<const Complex>(&v, 1));
    });
    return acc.estimates().front();
}

/// E[O_ij O_kl] for every index quadruple, flattened as ((i*N + j)*N + k)*N + l.
inline std::vector<Estimate> second_moments(std::size_t n, const McConfig& cfg,
                                            Group group = Group::O) {
    if (cfg.samples < 2) throw ConfigError("second_moments: need at least 2 samples");
    const std::size_t n2 = n * n;
    auto acc = run_monte_carlo(cfg, MeanAccumulator(n2 * n2),
                               [&](Xoshiro256pp& eng, MeanAccumulator& a) {
                                   const Eigen::MatrixXd o = sample_group_real(group, n, eng);
                                   std::vector<Complex> f(n2 * n2);
                                   for (std::size_t p = 0; p < n2; ++p)
                                       for (std::size_t q = 0; q < n2; ++q)
                                           f[p * n2 + q] = o(p / n, p % n) * o(q / n, q % n);
                                   a.add(f);
                               });
    return acc.estimates();
}

}  // namespace ocft
