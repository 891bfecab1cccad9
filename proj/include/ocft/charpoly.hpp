#pragma once

// Moments F_G(z) = E_O |det(z - G O)|^{2m} of characteristic polynomials over
// Haar O in O(N), G = diag(g_1..g_N) real:
//   * closed form for m = 1,
//   * the flavour-space integral of products of Pfaffians (m = 1, 2),
//   * direct Haar Monte Carlo.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "ocft/errors.hpp"
#include "ocft/haar.hpp"
#include "ocft/linalg.hpp"
#include "ocft/mc.hpp"
#include "ocft/quadrature.hpp"
#include "ocft/zspace.hpp"

namespace ocft {

struct MomentQuery {
    Complex z{};
    RealVector g;  // diagonal of G; N = g.size()
    std::size_t m = 1;

    std::size_t colours() const { return g.size(); }

    void validate() const {
        if (g.empty()) throw DimensionError("MomentQuery: G must have at least one entry");
        if (m == 0) throw ConfigError("MomentQuery: m must be at least 1");
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw DomainError("MomentQuery: z must be finite");
        for (double v : g)
            if (!std::isfinite(v)) throw DomainError("MomentQuery: G entries must be finite");
    }
};

/// m = 1: sum_l |z|^{2(N-l)} e_l(g^2) / C(N, l).
inline double moment_m1_closed(const MomentQuery& q) {
    q.validate();
    if (q.m != 1) throw ConfigError("moment_m1_closed: only m = 1 has a closed form");
    const std::size_t n = q.colours();
    RealVector g2(n);
    for (std::size_t i = 0; i < n; ++i) g2[i] = q.g[i] * q.g[i];
    const RealVector e = elementary_symmetric_all(g2);
    const double z2 = std::norm(q.z);
    double sum = 0.0;
    for (std::size_t l = 0; l <= n; ++l)
        sum += std::pow(z2, double(n - l)) * e[l] / binomial(n, l);
    return sum;
}

/// Haar Monte Carlo of det^m((z - GO)(z - GO)^dagger).
inline Estimate moment_mc(const MomentQuery& q, const McConfig& cfg) {
    q.validate();
    if (cfg.samples < 2) throw ConfigError("moment_mc: need at least 2 samples");
    const std::size_t n = q.colours();
    auto acc = run_monte_carlo(cfg, MeanAccumulator(1), [&](Xoshiro256pp& eng, MeanAccumulator& a) {
        const Eigen::MatrixXd o = sample_orthogonal_real(n, eng);
        ComplexMatrix x(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                x(i, j) = (i == j ? q.z : Complex{}) - q.g[i] * o(Eigen::Index(i), Eigen::Index(j));
        const Complex v = std::pow(std::norm(determinant(x)), double(q.m));
        a.add(std::span<const Complex>(&v, 1));
    });
    return acc.estimates().front();
}

/// 4m x 4m kernel [[g^2 Z, Zc (x) I_m], [-Zc (x) I_m, Z^dagger]], Zc = diag(z, conj z).
inline ComplexMatrix build_pf_kernel(const ComplexMatrix& zmat, double g, Complex z, std::size_t m) {
    if (m == 0) throw ConfigError("build_pf_kernel: m must be at least 1");
    const std::size_t n = 2 * m;
    if (zmat.rows() != n || zmat.cols() != n)
        throw ShapeError("build_pf_kernel: Z must be " + std::to_string(n) + "x" + std::to_string(n));
    if (!zmat.is_skew(1e-12 * std::max(1.0, zmat.max_abs())))
        throw ShapeError("build_pf_kernel: Z is not skew-symmetric");
    ComplexMatrix k(2 * n, 2 * n);
    const ComplexMatrix zd = zmat.adjoint();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            k(i, j) = g * g * zmat(i, j);
            k(n + i, n + j) = zd(i, j);
        }
    for (std::size_t i = 0; i < n; ++i) {
        const Complex d = i < m ? z : std::conj(z);
        k(i, n + i) = d;
        k(n + i, i) = -d;
    }
    return k;
}

struct PfaffianIntegralOptions {
    std::size_t quadrature_nodes = 128;
    McConfig mc{200000, {}, default_workers(), 64};
    double min_ess_fraction = 0.01;
};

struct PfaffianIntegralResult {
    Estimate estimate;
    double effective_samples = 0.0;  // m = 2 only
};

/// F_G(z) = s^N * E_mu[prod_i pf K_i(Z)], s = (-1)^{m(2m-1)}, with mu the
/// normalised measure det^{-(N/2+2m-1)}(1 + Z Z^dagger) on 2m x 2m skew Z.
/// The normalisation and the sign s are fixed by F_0(z) = |z|^{2Nm}.
///
/// m = 1: Z has one entry a; the kernel Pfaffian depends on |a|^2 = r only and
/// r has density (N+1)(1+r)^{-(N+2)} on [0, inf), integrated by Gauss-Legendre
/// in t = r/(1+r). m = 2: self-normalised importance sampling over the six
/// complex entries with a multivariate Student-t proposal.
inline PfaffianIntegralResult moment_pfaffian_integral(const MomentQuery& q,
                                                       const PfaffianIntegralOptions& opt = {}) {
    q.validate();
    const std::size_t n = q.colours();
    const std::size_t m = q.m;
    if (m > 2) throw ConfigError("moment_pfaffian_integral: m > 2 is not supported");
    const double sign = m == 1 ? -1.0 : 1.0;
    const double sign_n = (n % 2 == 1) ? sign : 1.0;

    if (m == 1) {
        const GaussLegendre gl(opt.quadrature_nodes);
        Complex num = 0.0;
        double den = 0.0;
        for (std::size_t k = 0; k < gl.size(); ++k) {
            const double t = gl.nodes[k];
            const double r = t / (1.0 - t);
            const double w = gl.weights[k] * std::pow(1.0 - t, double(n));
            ComplexMatrix zm(2, 2);
            zm(0, 1) = std::sqrt(r);
            zm(1, 0) = -std::sqrt(r);
            // Evaluate the Pfaffian product scaled by (1-t)^{N}: each factor is
            // homogeneous of degree 1 in (1, r), so scale factor-wise.
            Complex prod = 1.0;
            for (std::size_t i = 0; i < n; ++i)
                prod *= pfaffian(build_pf_kernel(zm, q.g[i], q.z, 1)) * (1.0 - t);
            num += gl.weights[k] * prod;
            den += w;
        }
        return {{sign_n * num / den, 0.0, gl.size()}, 0.0};
    }

    const std::size_t nf = 2 * m;
    const double exponent = 0.5 * double(n) + double(nf) - 1.0;
    const StudentTProposal prop{2 * skew_entries(nf), 0.5, 0.35};
    auto acc = run_monte_carlo(opt.mc, WeightedAccumulator(1),
                               [&](Xoshiro256pp& eng, WeightedAccumulator& a) {
                                   const std::vector<double> x = prop.draw(eng);
                                   const ComplexMatrix zm = skew_from_upper(nf, as_complex(x));
                                   const double logp = -exponent * log_det_one_plus(zm, 1.0).value();
                                   const double w = std::exp(logp - prop.log_density_unnormalised(x));
                                   Complex prod = 1.0;
                                   for (std::size_t i = 0; i < n; ++i)
                                       prod *= pfaffian(build_pf_kernel(zm, q.g[i], q.z, m),
                                                        1e-9 * (1.0 + zm.max_abs()));
                                   a.add(w, std::span<const Complex>(&prod, 1));
                               });
    const double ess = acc.effective_samples();
    if (ess < opt.min_ess_fraction * double(opt.mc.samples))
        throw ConfigError("moment_pfaffian_integral: effective sample size " + std::to_string(ess) +
                          " below " + std::to_string(opt.min_ess_fraction * 100.0) + "% of nominal");
    Estimate e = acc.estimates().front();
    e.mean *= sign_n;
    return {e, ess};
}

}  // namespace ocft
