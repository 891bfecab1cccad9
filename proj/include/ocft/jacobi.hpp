#pragma once

// Averages of det(lambda - A) det(gamma - A^T) over real ensembles with a
// separable weight, reduced to
//   I(lambda gamma) = int_0^inf dr (1+r)^{-(N+2)} int prod_{i<j} |g_i^2 - g_j^2|
//                     prod_i (lambda gamma + r g_i^2) W(g_i^2) dg
// and evaluated three ways for the Jacobi weight W(x) = x^a (1-x)^b:
//   * Pfaffian assembly from the alpha_ij matrix (closed Beta sums),
//   * an ordered-sector determinant,
//   * direct nested quadrature.
// Results carry an unknown overall constant, so everything is reported as a
// ratio to a reference value of lambda gamma.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ocft/errors.hpp"
#include "ocft/linalg.hpp"
#include "ocft/mc.hpp"
#include "ocft/quadrature.hpp"

namespace ocft {

struct JacobiQuery {
    Complex lambda = 1.0;
    Complex gamma = 1.0;
    int a = 0;
    int b = 0;
    std::size_t n = 1;

    Complex lg() const { return lambda * gamma; }

    void validate() const {
        if (a < 0 || b < 0) throw DomainError("JacobiQuery: a and b must be non-negative integers");
        if (n == 0) throw DimensionError("JacobiQuery: N must be at least 1");
    }
};

/// Radial quadrature: r = t/(1-t), 128-node Gauss-Legendre in t.
inline constexpr std::size_t kRadialNodes = 128;

/// h(a, b; x) = int_0^x g^{2a} (1-g^2)^b dg as a finite Gamma sum (b integer).
inline double h_closed(double a, int b, double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("h_closed: x must lie in [0, 1]");
    if (a < 0.0 || b < 0) throw DomainError("h_closed: requires a >= 0 and integer b >= 0");
    if (x == 0.0) return 0.0;
    const double lx = std::log(x);
    const double l1mx2 = std::log1p(-x * x);
    const double pre = std::log(0.5) + log_gamma(b + 1.0) + log_gamma(a + 0.5);
    double s = 0.0;
    for (int i = 0; i <= b; ++i) {
        const int e = b - i;
        if (e > 0 && x == 1.0) continue;
        const double lt = (2.0 * (a + i) + 1.0) * lx + (e > 0 ? e * l1mx2 : 0.0) -
                          log_gamma(e + 1.0) - log_gamma(a + i + 1.5);
        s += std::exp(pre + lt);
    }
    return s;
}

/// k_i(a, b; x) = h(a+i, b; x) + (r / lg) h(a+i+1, b; x).
template <class T>
T k_func(int i, int a, int b, double r, T lg, double x) {
    if (lg == T{}) throw DomainError("k_func: lambda*gamma must be non-zero");
    return T(h_closed(a + i, b, x)) + (r / lg) * h_closed(a + i + 1, b, x);
}

/// alpha_ij = c0 + rho c1 + rho^2 c2 with rho = r / (lambda gamma).
using AlphaCoefficients = std::array<double, 3>;

namespace detail {

// B(b+1, a+j+d+1/2) / (a+b+j+d+3/2) * sum_l B(2b-l+1, 2a+1+i+j+l+c) / B(b-l+1, a+j+l+d+3/2)
inline double alpha_block(int i, int j, int a, int b, int c, int d) {
    const double pre = std::exp(log_beta(b + 1.0, a + j + d + 0.5)) / (a + b + j + d + 1.5);
    double s = 0.0;
    for (int l = 0; l <= b; ++l)
        s += std::exp(log_beta(2.0 * b - l + 1.0, 2.0 * a + 1.0 + i + j + l + c) -
                      log_beta(b - l + 1.0, a + j + l + d + 1.5));
    return pre * s;
}

}  // namespace detail

/// Closed-form Beta sums.
inline AlphaCoefficients alpha_coefficients(int i, int j, int a, int b) {
    if (i < 0 || j < 0 || a < 0 || b < 0) throw DomainError("alpha: indices must be non-negative");
    if (i == j) return {0.0, 0.0, 0.0};
    auto half = [&](int p, int q) -> AlphaCoefficients {
        using detail::alpha_block;
        return {alpha_block(p, q, a, b, 0, 0),
                alpha_block(p, q, a, b, 1, 0) + alpha_block(p, q, a, b, 1, 1),
                alpha_block(p, q, a, b, 2, 1)};
    };
    const auto x = half(i, j), y = half(j, i);
    return {0.25 * (x[0] - y[0]), 0.25 * (x[1] - y[1]), 0.25 * (x[2] - y[2])};
}

/// Coefficients from the defining double integral
///   T(p, q) = int_0^1 W g^{2p} int_0^g W g'^{2q} dg' dg,  W = g^{2a}(1-g^2)^b.
inline AlphaCoefficients alpha_coefficients_quadrature(int i, int j, int a, int b,
                                                       const QuadOptions& opt = {}) {
    if (i < 0 || j < 0 || a < 0 || b < 0) throw DomainError("alpha: indices must be non-negative");
    if (i == j) return {0.0, 0.0, 0.0};
    auto w = [a, b](double g, int p) {
        return std::pow(g, 2.0 * (a + p)) * std::pow(1.0 - g * g, double(b));
    };
    auto t = [&](int p, int q) {
        return integrate_adaptive<double>(
            [&](double g) {
                return w(g, p) *
                       integrate_adaptive<double>([&](double h) { return w(h, q); }, 0.0, g, opt);
            },
            0.0, 1.0, opt);
    };
    return {t(i, j) - t(j, i), t(i + 1, j) + t(i, j + 1) - t(j + 1, i) - t(j, i + 1),
            t(i + 1, j + 1) - t(j + 1, i + 1)};
}

/// alpha_ij at real r and lambda*gamma from the closed form.
inline double alpha_entry(int i, int j, int a, int b, double r, double lg) {
    if (lg == 0.0) throw DomainError("alpha_entry: lambda*gamma must be non-zero");
    const auto c = alpha_coefficients(i, j, a, b);
    const double rho = r / lg;
    return c[0] + rho * c[1] + rho * rho * c[2];
}

/// alpha_ij by nested adaptive quadrature of
///   int_0^1 (1 + rho g^2) W(g^2) (g^{2i} k_j(g) - g^{2j} k_i(g)) dg,
/// with k computed by an inner quadrature.
inline double alpha_entry_quadrature(int i, int j, int a, int b, double r, double lg,
                                     const QuadOptions& opt = {}) {
    if (i < 0 || j < 0 || a < 0 || b < 0) throw DomainError("alpha: indices must be non-negative");
    if (lg == 0.0) throw DomainError("alpha_entry_quadrature: lambda*gamma must be non-zero");
    if (i == j) return 0.0;
    const double rho = r / lg;
    auto base = [&](double g) {
        return (1.0 + rho * g * g) * std::pow(g, 2.0 * a) * std::pow(1.0 - g * g, double(b));
    };
    auto k = [&](int p, double x) {
        return integrate_adaptive<double>([&](double h) { return base(h) * std::pow(h, 2.0 * p); },
                                          0.0, x, opt);
    };
    return integrate_adaptive<double>(
        [&](double g) {
            return base(g) * (std::pow(g, 2.0 * i) * k(j, g) - std::pow(g, 2.0 * j) * k(i, g));
        },
        0.0, 1.0, opt);
}

struct AlphaFlag {
    int i = 0, j = 0, a = 0, b = 0;
    double r = 0.0, lg = 0.0;
    double closed = 0.0, quadrature = 0.0, rel_diff = 0.0;
};

inline bool alpha_agrees(double closed, double quad, double rel_tol) {
    const double scale = std::max(std::abs(quad), std::abs(closed));
    return std::abs(closed - quad) <= rel_tol * scale;
}

/// Compares closed form with quadrature over a parameter grid and returns the
/// disagreeing cells.
inline std::vector<AlphaFlag> audit_alpha(std::span<const int> as, std::span<const int> bs,
                                          int max_index, std::span<const double> rs,
                                          std::span<const double> lgs, double rel_tol = 1e-6) {
    std::vector<AlphaFlag> flags;
    for (int a : as)
        for (int b : bs)
            for (int i = 0; i <= max_index; ++i)
                for (int j = 0; j <= max_index; ++j)
                    for (double r : rs)
                        for (double lg : lgs) {
                            const double c = alpha_entry(i, j, a, b, r, lg);
                            const double q = alpha_entry_quadrature(i, j, a, b, r, lg);
                            if (!alpha_agrees(c, q, rel_tol)) {
                                const double s = std::max(std::abs(c), std::abs(q));
                                flags.push_back({i, j, a, b, r, lg, c, q, std::abs(c - q) / s});
                            }
                        }
    return flags;
}

/// alpha coefficients for 0 <= i, j < size, closed form audited against the
/// defining integral; disagreeing cells fall back to the quadrature value.
class AlphaTable {
public:
    AlphaTable(int a, int b, std::size_t size, double rel_tol = 1e-6)
        : a_(a), b_(b), size_(size), coeff_(size * size) {
        for (std::size_t i = 0; i < size; ++i)
            for (std::size_t j = i + 1; j < size; ++j) {
                const auto c = alpha_coefficients(int(i), int(j), a, b);
                const auto q = alpha_coefficients_quadrature(int(i), int(j), a, b);
                AlphaCoefficients use = c;
                for (int p = 0; p < 3; ++p)
                    if (!alpha_agrees(c[p], q[p], rel_tol)) {
                        use = q;
                        flagged_.push_back({int(i), int(j)});
                        break;
                    }
                coeff_[i * size + j] = use;
                for (int p = 0; p < 3; ++p) coeff_[j * size + i][p] = -use[p];
            }
    }

    std::size_t size() const noexcept { return size_; }
    const std::vector<std::pair<int, int>>& flagged() const noexcept { return flagged_; }

    Complex alpha(std::size_t i, std::size_t j, Complex rho) const {
        const auto& c = coeff_[i * size_ + j];
        return c[0] + rho * (c[1] + rho * c[2]);
    }

    /// k_i(a, b; 1) at rho = r / (lambda gamma).
    Complex border(std::size_t i, Complex rho) const {
        return h_closed(a_ + int(i), b_, 1.0) + rho * h_closed(a_ + int(i) + 1, b_, 1.0);
    }

private:
    int a_, b_;
    std::size_t size_;
    std::vector<AlphaCoefficients> coeff_;
    std::vector<std::pair<int, int>> flagged_;
};

/// J(rho) = int_{[0,1]^N} prod_{i<j}|g_i^2 - g_j^2| prod_i (1 + rho g_i^2) W(g_i^2) dg
/// from the Pfaffian of alpha (even N) or alpha bordered by k_i(1) (odd N).
inline Complex jacobi_inner_pfaffian(const AlphaTable& t, std::size_t n, Complex rho) {
    if (t.size() < n) throw DimensionError("jacobi_inner_pfaffian: alpha table too small");
    const std::size_t dim = n % 2 == 0 ? n : n + 1;
    ComplexMatrix m(dim, dim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = t.alpha(i, j, rho);
    if (n % 2 == 1)
        for (std::size_t i = 0; i < n; ++i) {
            m(i, n) = t.border(i, rho);
            m(n, i) = -m(i, n);
        }
    const double sign = (n / 2) % 2 == 0 ? 1.0 : -1.0;
    return std::exp(log_gamma(double(n) + 1.0)) * sign * pfaffian(m, 1e-10 * (1.0 + m.max_abs()));
}

namespace detail {

/// t-nodes of the radial rule and the weights (1-t)^N folded in by callers.
inline const GaussLegendre& radial_rule() {
    static const GaussLegendre gl(kRadialNodes);
    return gl;
}

/// c_k = int dr (1+r)^{-(N+2)} r^k over [0, inf) (half_line) or [0, 1]
/// (unit), by the 128-node rule.
enum class RDomain { half_line, unit_interval };

inline std::vector<double> radial_moments(std::size_t n, RDomain dom) {
    const GaussLegendre& gl = radial_rule();
    std::vector<double> c(n + 1, 0.0);
    for (std::size_t q = 0; q < gl.size(); ++q) {
        const double t = gl.nodes[q];
        for (std::size_t k = 0; k <= n; ++k) {
            if (dom == RDomain::half_line)
                c[k] += gl.weights[q] * std::pow(t, double(k)) * std::pow(1.0 - t, double(n - k));
            else
                c[k] += gl.weights[q] * std::pow(t, double(k)) * std::pow(1.0 + t, -double(n + 2));
        }
    }
    return c;
}

/// sum_k c_k lg^{N-k} e_k(x): the radial integral of prod_i (lg + r x_i).
inline Complex radial_factor(std::span<const double> c, std::span<const double> x, Complex lg) {
    const RealVector e = elementary_symmetric_all(x);
    const std::size_t n = x.size();
    Complex s = 0.0, p = 1.0;
    for (std::size_t k = n + 1; k-- > 0;) {
        s += c[k] * p * e[k];
        p *= lg;
    }
    return s;
}

inline double jacobi_weight(int a, int b, double x) {
    return std::pow(x, double(a)) * std::pow(1.0 - x, double(b));
}

}  // namespace detail

using detail::RDomain;

struct JacobiResult {
    Complex ratio;
    Complex numerator;
    Complex denominator;
    std::vector<std::pair<int, int>> flagged_alpha;
};

/// Pfaffian assembly: I(lg) = sum_t w_t (lg (1-t))^N J(t / ((1-t) lg)), ratio to I(1).
inline JacobiResult jacobi_pfaffian(const JacobiQuery& q) {
    q.validate();
    if (q.lg() == Complex{}) throw DomainError("jacobi_pfaffian: lambda*gamma = 0; use jacobi_quadrature");
    const AlphaTable table(q.a, q.b, q.n);
    const GaussLegendre& gl = detail::radial_rule();
    auto integral = [&](Complex lg) {
        Complex s = 0.0;
        for (std::size_t k = 0; k < gl.size(); ++k) {
            const double t = gl.nodes[k];
            s += gl.weights[k] * std::pow(lg * (1.0 - t), double(q.n)) *
                 jacobi_inner_pfaffian(table, q.n, t / ((1.0 - t) * lg));
        }
        return s;
    };
    JacobiResult r;
    r.numerator = integral(q.lg());
    r.denominator = integral(1.0);
    r.ratio = r.numerator / r.denominator;
    r.flagged_alpha = table.flagged();
    return r;
}

inline constexpr std::size_t kMaxQuadratureDim = 4;

/// Nested g-integrals: the absolute floor stops refinement where inner
/// integrals are at roundoff level.
inline QuadOptions nested_quad_options() { return {1e-10, 1e-14, 200}; }

/// Inner integral J(rho) by nested quadrature, N! times the ordered sector.
inline double jacobi_inner_quadrature(int a, int b, std::size_t n, double rho,
                                      const QuadOptions& opt = nested_quad_options()) {
    if (n > kMaxQuadratureDim) throw ConfigError("jacobi_inner_quadrature: N <= 4 only");
    auto f = [&](std::span<const double> g) {
        double v = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = g[i] * g[i];
            v *= (1.0 + rho * x) * detail::jacobi_weight(a, b, x);
            for (std::size_t j = i + 1; j < n; ++j) v *= std::abs(g[j] * g[j] - x);
        }
        return v;
    };
    return std::exp(log_gamma(double(n) + 1.0)) * integrate_ordered<double>(f, n, 0.0, 1.0, opt);
}

/// Direct quadrature of I(lg), ratio to I(1). Allows lg = 0.
inline JacobiResult jacobi_quadrature(const JacobiQuery& q, const QuadOptions& opt = nested_quad_options()) {
    q.validate();
    if (q.n > kMaxQuadratureDim) throw ConfigError("jacobi_quadrature: N <= 4 only");
    const auto c = detail::radial_moments(q.n, RDomain::half_line);
    auto integral = [&](Complex lg) {
        auto f = [&](std::span<const double> g) -> Complex {
            std::vector<double> x(g.size());
            double v = 1.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                x[i] = g[i] * g[i];
                v *= detail::jacobi_weight(q.a, q.b, x[i]);
            }
            for (std::size_t i = 0; i < x.size(); ++i)
                for (std::size_t j = i + 1; j < x.size(); ++j) v *= std::abs(x[j] - x[i]);
            return v * detail::radial_factor(c, x, lg);
        };
        return std::exp(log_gamma(double(q.n) + 1.0)) *
               integrate_ordered<Complex>(f, q.n, 0.0, 1.0, opt);
    };
    JacobiResult r;
    r.numerator = integral(q.lg());
    r.denominator = integral(1.0);
    r.ratio = r.numerator / r.denominator;
    return r;
}

/// N! int_{0<g_1<...<g_N<1} det[W(g_i^2) g_i^{2(j-1)} (1 + rho g_i^2)] dg, with
/// monomials R_j(x) = x^j. The increasing order makes the Vandermonde factor
/// positive, so the value equals the symmetric integral J(rho).
inline double mehta_determinant(int a, int b, std::size_t n, double rho, const QuadOptions& opt = nested_quad_options()) {
    if (n > kMaxQuadratureDim) throw ConfigError("mehta_determinant: N <= 4 only");
    if (a < 0 || b < 0) throw DomainError("mehta_determinant: a, b must be non-negative");
    auto f = [&](std::span<const double> g) {
        double m[kMaxQuadratureDim * kMaxQuadratureDim];
        for (std::size_t i = 0; i < n; ++i) {
            const double x = g[i] * g[i];
            const double row = detail::jacobi_weight(a, b, x) * (1.0 + rho * x);
            for (std::size_t j = 0; j < n; ++j) m[i * n + j] = row * std::pow(x, double(j));
        }
        return small_real_determinant(m, n);
    };
    return std::exp(log_gamma(double(n) + 1.0)) * integrate_ordered<double>(f, n, 0.0, 1.0, opt);
}

/// I(lg) / I(1) with the inner integral from the ordered-sector determinant.
inline JacobiResult jacobi_mehta_ratio(const JacobiQuery& q, const QuadOptions& opt = nested_quad_options()) {
    q.validate();
    if (q.n > kMaxQuadratureDim) throw ConfigError("jacobi_mehta_ratio: N <= 4 only");
    const GaussLegendre& gl = detail::radial_rule();
    const std::size_t n = q.n;
    auto integral = [&](Complex lg) {
        auto f = [&](std::span<const double> g) -> Complex {
            double base[kMaxQuadratureDim * kMaxQuadratureDim];
            double x[kMaxQuadratureDim];
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = g[i] * g[i];
                for (std::size_t j = 0; j < n; ++j)
                    base[i * n + j] = detail::jacobi_weight(q.a, q.b, x[i]) * std::pow(x[i], double(j));
            }
            // (lg (1-t))^N det[... (1 + rho x_i)] = det[... (lg (1-t) + t x_i)]
            Complex s = 0.0;
            ComplexMatrix m(n, n);
            for (std::size_t k = 0; k < gl.size(); ++k) {
                const double t = gl.nodes[k];
                const Complex u = lg * (1.0 - t);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) m(i, j) = base[i * n + j] * (u + t * x[i]);
                s += gl.weights[k] * determinant(m);
            }
            return s;
        };
        return std::exp(log_gamma(double(n) + 1.0)) * integrate_ordered<Complex>(f, n, 0.0, 1.0, opt);
    };
    JacobiResult r;
    r.numerator = integral(q.lg());
    r.denominator = integral(1.0);
    r.ratio = r.numerator / r.denominator;
    return r;
}

// ---------------------------------------------------------------------------
// Ginibre (Gaussian) check
// ---------------------------------------------------------------------------

/// sum_{k=0}^N (lg)^k / k!, the normalised Gaussian average (value 1 at lg = 0).
inline Complex ginibre_closed(Complex lambda, Complex gamma, std::size_t n) {
    const Complex lg = lambda * gamma;
    Complex s = 0.0, term = 1.0;
    for (std::size_t k = 0; k <= n; ++k) {
        s += term;
        term *= lg / double(k + 1);
    }
    return s;
}

/// E[det(lambda - A) det(gamma - A^T)] / E[det(A)^2] over A with i.i.d.
/// standard normal entries; the ratio's error is by the delta method.
inline Estimate ginibre_mc(Complex lambda, Complex gamma, std::size_t n, const McConfig& cfg) {
    if (n == 0) throw DimensionError("ginibre_mc: N must be at least 1");
    if (cfg.samples < 2) throw ConfigError("ginibre_mc: need at least 2 samples");
    auto acc = run_monte_carlo(cfg, MeanAccumulator(5), [&](Xoshiro256pp& eng, MeanAccumulator& a) {
        std::normal_distribution<double> normal;
        Eigen::MatrixXd m(n, n);
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = normal(eng);
        ComplexMatrix xl(n, n), xg(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double v = m(Eigen::Index(i), Eigen::Index(j));
                xl(i, j) = (i == j ? lambda : Complex{}) - v;
                xg(j, i) = (i == j ? gamma : Complex{}) - v;
            }
        const Complex x = determinant(xl) * determinant(xg);
        const double d = m.determinant();
        const double y = d * d;
        const std::array<Complex, 5> f{x, y, std::norm(x), x * y, y * y};
        a.add(f);
    });
    const auto e = acc.estimates();
    const Complex mx = e[0].mean;
    const double my = e[1].mean.real();
    const Complex ratio = mx / my;
    // var(X - R Y) = E|X|^2 - 2 Re(conj(R) E[XY]) + |R|^2 E[Y^2] - |E X - R E Y|^2
    const double var = e[2].mean.real() - 2.0 * std::real(std::conj(ratio) * e[3].mean) +
                       std::norm(ratio) * e[4].mean.real() - std::norm(mx - ratio * my);
    const double n_s = double(e[0].samples);
    return {ratio, std::sqrt(std::max(var, 0.0) * n_s / (n_s - 1.0) / n_s) / std::abs(my),
            e[0].samples};
}

/// The reduced integral with W(x) = exp(-x/2) on g in [0, inf), as a ratio to
/// its value at lambda gamma = 0. `domain` selects the r-integration range.
inline Complex ginibre_pipeline(Complex lambda, Complex gamma, std::size_t n,
                                RDomain domain = RDomain::half_line, const QuadOptions& opt = nested_quad_options()) {
    if (n == 0) throw DimensionError("ginibre_pipeline: N must be at least 1");
    if (n > 3) throw ConfigError("ginibre_pipeline: N <= 3 only");
    const auto c = detail::radial_moments(n, domain);
    // E_k = N! int_ordered e_k(x) prod|x_j - x_i| prod exp(-x_i/2) dg
    std::vector<double> e(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        auto f = [&](std::span<const double> g) {
            std::vector<double> x(g.size());
            double v = 1.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                x[i] = g[i] * g[i];
                v *= std::exp(-0.5 * x[i]);
            }
            for (std::size_t i = 0; i < x.size(); ++i)
                for (std::size_t j = i + 1; j < x.size(); ++j) v *= std::abs(x[j] - x[i]);
            return v * elementary_symmetric(x, k);
        };
        e[k] = integrate_ordered<double>(f, n, 0.0, std::numeric_limits<double>::infinity(), opt);
    }
    auto integral = [&](Complex lg) {
        Complex s = 0.0, p = 1.0;
        for (std::size_t k = n + 1; k-- > 0;) {
            s += c[k] * p * e[k];
            p *= lg;
        }
        return s;
    };
    return integral(lambda * gamma) / integral(0.0);
}

}  // namespace ocft
