#pragma once

// Colour-flavour transformation over O(N): flavour-space measures, their
// normalisation constants, and coefficient-level verification of the
// fermionic, bosonic and SO(N) identities.
//
// Left-hand sides are Haar Monte-Carlo averages over the colour group.
// Right-hand sides are self-normalised importance-sampling averages over the
// flavour matrices Z, so the constant term of every identity is 1 on both
// sides by construction.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ocft/errors.hpp"
#include "ocft/grassmann.hpp"
#include "ocft/haar.hpp"
#include "ocft/linalg.hpp"
#include "ocft/mc.hpp"
#include "ocft/quadrature.hpp"
#include "ocft/zspace.hpp"

namespace ocft {

// ---------------------------------------------------------------------------
// Fast coefficient maps
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<unsigned> bits_of(std::uint32_t mask) {
    std::vector<unsigned> out;
    while (mask) {
        out.push_back(unsigned(std::countr_zero(mask)));
        mask &= mask - 1;
    }
    return out;
}

/// Accumulates the sign of writing a generator sequence in canonical order.
struct SignTracker {
    Monomial mask = 0;
    int sign = 1;
    void push(unsigned bit) {
        const Monomial g = Monomial{1} << bit;
        if (mask & g) {
            sign = 0;
            return;
        }
        sign *= reorder_sign(mask, g);
        mask |= g;
    }
};

}  // namespace detail

/// Coefficients of exp(psibar O psi) as products of minors of O.
///
/// Flavours decouple: exp(sum_a X_a) = prod_a exp(X_a) and
/// exp(X_a) = sum_{R,C} det O[R,C] (psibar_{r1} psi_{c1})...(psibar_{rk} psi_{ck}),
/// so each coefficient is a signed product of one minor per flavour.
class LhsExpansion {
public:
    explicit LhsExpansion(Universe u) : u_(u) {
        const std::size_t n = u.colours();
        const std::uint32_t full = (std::uint32_t{1} << n) - 1;
        for (std::uint32_t r = 0; r <= full; ++r)
            for (std::uint32_t c = 0; c <= full; ++c)
                if (std::popcount(r) == std::popcount(c)) minors_.push_back({r, c});

        const std::size_t nm = minors_.size();
        std::vector<std::size_t> pick(u.flavours(), 0);
        while (true) {
            detail::SignTracker t;
            for (std::size_t a = 0; a < u.flavours(); ++a) {
                const auto rows = detail::bits_of(minors_[pick[a]].first);
                const auto cols = detail::bits_of(minors_[pick[a]].second);
                for (std::size_t k = 0; k < rows.size(); ++k) {
                    t.push(u.bar(rows[k], a));
                    t.push(u.psi(cols[k], a));
                }
            }
            terms_.push_back({t.mask, double(t.sign), pick});
            std::size_t a = 0;
            while (a < pick.size() && ++pick[a] == nm) pick[a++] = 0;
            if (a == pick.size()) break;
        }
    }

    const Universe& universe() const noexcept { return u_; }
    std::size_t size() const noexcept { return terms_.size(); }
    Monomial monomial(std::size_t k) const { return terms_[k].mono; }

    /// Writes all coefficients for the real matrix o into out (size()).
    void coefficients(const Eigen::MatrixXd& o, std::span<Complex> out) const {
        std::vector<double> minor_values(minors_.size());
        double buf[Universe::kMaxColourFlavour * Universe::kMaxColourFlavour];
        for (std::size_t m = 0; m < minors_.size(); ++m) {
            const auto rows = detail::bits_of(minors_[m].first);
            const auto cols = detail::bits_of(minors_[m].second);
            const std::size_t k = rows.size();
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j) buf[i * k + j] = o(rows[i], cols[j]);
            minor_values[m] = k == 0 ? 1.0 : small_real_determinant(buf, k);
        }
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            double v = terms_[t].sign;
            for (std::size_t idx : terms_[t].minor) v *= minor_values[idx];
            out[t] = v;
        }
    }

private:
    struct Term {
        Monomial mono;
        double sign;
        std::vector<std::size_t> minor;
    };
    Universe u_;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> minors_;
    std::vector<Term> terms_;
};

/// Coefficients of exp(1/2 (psibar Z psibar + psi Z^dagger psi)) as products
/// of Pfaffians of principal submatrices (even flavour subsets per colour).
class RhsExpansion {
public:
    explicit RhsExpansion(Universe u) : u_(u) {
        const std::size_t nf = u.flavours();
        for (std::uint32_t s = 0; s < (std::uint32_t{1} << nf); ++s)
            if (std::popcount(s) % 2 == 0) subsets_.push_back(s);

        const std::size_t ns = subsets_.size();
        std::vector<std::size_t> pick(2 * u.colours(), 0);
        while (true) {
            detail::SignTracker t;
            for (std::size_t i = 0; i < u.colours(); ++i) {
                for (unsigned a : detail::bits_of(subsets_[pick[2 * i]])) t.push(u.bar(i, a));
                for (unsigned b : detail::bits_of(subsets_[pick[2 * i + 1]])) t.push(u.psi(i, b));
            }
            terms_.push_back({t.mask, double(t.sign), pick});
            std::size_t a = 0;
            while (a < pick.size() && ++pick[a] == ns) pick[a++] = 0;
            if (a == pick.size()) break;
        }
    }

    const Universe& universe() const noexcept { return u_; }
    std::size_t size() const noexcept { return terms_.size(); }
    Monomial monomial(std::size_t k) const { return terms_[k].mono; }

    void coefficients(const ComplexMatrix& z, std::span<Complex> out) const {
        const ComplexMatrix zd = z.adjoint();
        std::vector<Complex> pz(subsets_.size()), pzd(subsets_.size());
        for (std::size_t s = 0; s < subsets_.size(); ++s) {
            const auto idx = detail::bits_of(subsets_[s]);
            std::vector<std::size_t> ix(idx.begin(), idx.end());
            if (ix.empty()) {
                pz[s] = pzd[s] = 1.0;
            } else if (ix.size() == 2) {
                pz[s] = z(ix[0], ix[1]);
                pzd[s] = zd(ix[0], ix[1]);
            } else {
                pz[s] = pfaffian(z.submatrix(ix, ix), 1e-10 * (1.0 + z.max_abs()));
                pzd[s] = pfaffian(zd.submatrix(ix, ix), 1e-10 * (1.0 + z.max_abs()));
            }
        }
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            Complex v = terms_[t].sign;
            for (std::size_t i = 0; i < u_.colours(); ++i)
                v *= pz[terms_[t].pick[2 * i]] * pzd[terms_[t].pick[2 * i + 1]];
            out[t] = v;
        }
    }

    Multivector to_multivector(const ComplexMatrix& z) const {
        std::vector<Complex> c(size());
        coefficients(z, c);
        Multivector m(u_);
        for (std::size_t t = 0; t < size(); ++t) m.set(terms_[t].mono, c[t]);
        m.prune();
        return m;
    }

private:
    struct Term {
        Monomial mono;
        double sign;
        std::vector<std::size_t> pick;
    };
    Universe u_;
    std::vector<std::uint32_t> subsets_;
    std::vector<Term> terms_;
};

// ---------------------------------------------------------------------------
// Normalisation constants
// ---------------------------------------------------------------------------

/// C_0^F = pi^{-n(n-1)/2} prod_{i=1}^{n-1} Gamma(N+2i) / Gamma(N+i).
inline double c0_fermionic_paper(std::size_t colours, std::size_t flavours) {
    if (colours == 0 || flavours == 0) throw DomainError("c0_fermionic_paper: N, n >= 1");
    const double nn = double(colours);
    double lg = -0.5 * double(flavours) * double(flavours - 1) * std::log(std::numbers::pi);
    for (std::size_t i = 1; i < flavours; ++i)
        lg += log_gamma(nn + 2.0 * double(i)) - log_gamma(nn + double(i));
    return std::exp(lg);
}

/// C_0^B = pi^{-n(n+1)/2} (N-2n)/2 prod_{i=1}^{n-1} (N/2-i) Gamma(N-1-i) / Gamma(N-1-2i).
inline double c0_bosonic_paper(std::size_t colours, std::size_t flavours) {
    if (flavours == 0) throw DomainError("c0_bosonic_paper: n >= 1");
    if (colours <= 2 * flavours)
        throw DomainError("c0_bosonic_paper: requires N > 2n (N=" + std::to_string(colours) +
                          ", n=" + std::to_string(flavours) + ")");
    const double nn = double(colours);
    double v = std::pow(std::numbers::pi, -0.5 * double(flavours) * double(flavours + 1)) *
               (nn - 2.0 * double(flavours)) / 2.0;
    for (std::size_t i = 1; i < flavours; ++i) {
        const double di = double(i);
        v *= (nn / 2.0 - di) *
             std::exp(log_gamma(nn - 1.0 - di) - log_gamma(nn - 1.0 - 2.0 * di));
    }
    return v;
}

/// Fermionic Z-measure dmu = dZ dZ^dagger / det^{N/2+n-1}(1 + Z Z^dagger).
struct FermionicMeasure {
    std::size_t colours = 1;
    std::size_t flavours = 1;

    double exponent() const { return 0.5 * double(colours) + double(flavours) - 1.0; }

    /// log of the (unnormalised) density at Z.
    double log_density(const ComplexMatrix& z) const {
        return -exponent() * log_det_one_plus(z, 1.0).value();
    }

    /// Real dimension of Z-space.
    std::size_t real_dim() const { return 2 * skew_entries(flavours); }
};

/// Bosonic Z-measure det^{N/2-n-1}(1 - Z Z^dagger) dZ dZ^dagger on 1 - ZZ^dagger > 0.
struct BosonicMeasure {
    std::size_t colours = 3;
    std::size_t flavours = 1;

    BosonicMeasure() = default;
    BosonicMeasure(std::size_t colours_, std::size_t flavours_)
        : colours(colours_), flavours(flavours_) {
        if (flavours == 0 || colours <= 2 * flavours)
            throw DomainError("BosonicMeasure: integrability requires N > 2n (N=" +
                              std::to_string(colours) + ", n=" + std::to_string(flavours) + ")");
    }

    double exponent() const { return 0.5 * double(colours) - double(flavours) - 1.0; }
};

/// Z sample with its importance weight. Weights are relative: average with
/// WeightedAccumulator (self-normalised).
struct ZSample {
    ComplexMatrix z;
    double weight = 1.0;
};

enum class ZProposal {
    exact,       // n = 2 only: inverse-CDF radial draw, unit weight
    heavy_tail,  // radial (1+r)^{-3/2} for n = 2, Student-t on entries for n >= 3
};

/// Draw from the fermionic measure. For n = 2 the Z-space is one complex
/// number a with density proportional to (1+|a|^2)^{-(N+2)}.
template <class Engine>
ZSample sample_fermionic_Z(const FermionicMeasure& mu, Engine& eng,
                           ZProposal proposal = ZProposal::heavy_tail) {
    const std::size_t nf = mu.flavours;
    if (nf == 1) return {ComplexMatrix(1, 1), 1.0};
    if (nf == 2) {
        const double nn = double(mu.colours);
        const double u = eng.uniform_open_zero();
        const double phase = 2.0 * std::numbers::pi * eng.uniform();
        double r = 0.0, w = 1.0;
        if (proposal == ZProposal::exact) {
            r = std::pow(u, -1.0 / (nn + 1.0)) - 1.0;
        } else {
            r = 1.0 / (u * u) - 1.0;
            // p(r) = (N+1)(1+r)^{-(N+2)}, q(r) = (1/2)(1+r)^{-3/2}
            w = 2.0 * (nn + 1.0) * std::pow(1.0 + r, -(nn + 2.0) + 1.5);
        }
        const Complex a = std::polar(std::sqrt(r), phase);
        ComplexMatrix z(2, 2);
        z(0, 1) = a;
        z(1, 0) = -a;
        return {z, w};
    }
    const StudentTProposal q{mu.real_dim(), 0.5, 0.35};
    const std::vector<double> x = q.draw(eng);
    ComplexMatrix z = skew_from_upper(nf, as_complex(x));
    return {z, std::exp(mu.log_density(z) - q.log_density_unnormalised(x))};
}

/// Draw from the bosonic measure by rejection from the box |Re|,|Im| <= 1 on
/// the independent entries, accepting with probability det^{e}(1 - ZZ^dagger)
/// (e >= 0). For -1 < e < 0 the density is returned as the weight instead.
template <class Engine>
ZSample sample_bosonic_Z(const BosonicMeasure& mu, Engine& eng) {
    const std::size_t nf = mu.flavours;
    const double e = mu.exponent();
    std::vector<Complex> upper(symmetric_entries(nf));
    for (;;) {
        for (auto& c : upper) c = Complex(2.0 * eng.uniform() - 1.0, 2.0 * eng.uniform() - 1.0);
        ComplexMatrix z = symmetric_from_upper(nf, upper);
        const auto ld = log_det_one_plus(z, -1.0);
        if (!ld) continue;
        if (e < 0.0) return {z, std::exp(e * *ld)};
        if (eng.uniform() < std::exp(e * *ld)) return {z, 1.0};
    }
}

/// (int dmu)^{-1} for the fermionic measure in the flat convention.
/// n = 1: Z-space is a point. n = 2: pi * int_0^inf (1+r)^{-(N+2)} dr by
/// Gauss-Legendre after r = t/(1-t). n >= 3: importance sampling with a
/// normalised Student-t proposal (requires cfg).
inline Estimate c0_fermionic_selfconsistent(std::size_t colours, std::size_t flavours,
                                            const std::optional<McConfig>& cfg = std::nullopt) {
    if (colours == 0 || flavours == 0) throw DomainError("c0_fermionic_selfconsistent: N, n >= 1");
    if (flavours == 1) return {1.0, 0.0, 0};
    const FermionicMeasure mu{colours, flavours};
    if (flavours == 2) {
        const double power = 2.0 * mu.exponent();
        if (power <= 1.0) throw DomainError("c0_fermionic_selfconsistent: divergent measure");
        const GaussLegendre gl(128);
        double integral = 0.0;
        for (std::size_t k = 0; k < gl.size(); ++k) {
            const double t = gl.nodes[k];
            // (1+r)^{-p} dr = (1-t)^{p-2} dt
            integral += gl.weights[k] * std::pow(1.0 - t, power - 2.0);
        }
        return {1.0 / (std::numbers::pi * integral), 0.0, gl.size()};
    }
    if (!cfg) throw ConfigError("c0_fermionic_selfconsistent: n >= 3 needs a Monte-Carlo config");
    const StudentTProposal q{mu.real_dim(), 0.5, 0.35};
    auto acc = run_monte_carlo(*cfg, MeanAccumulator(1), [&](Xoshiro256pp& eng, MeanAccumulator& a) {
        const std::vector<double> x = q.draw(eng);
        const ComplexMatrix z = skew_from_upper(flavours, as_complex(x));
        const Complex v = std::exp(mu.log_density(z) - q.log_density(x));
        a.add(std::span<const Complex>(&v, 1));
    });
    const Estimate vol = acc.estimates().front();
    const double m = vol.mean.real();
    return {1.0 / m, vol.std_error / (m * m), vol.samples};
}

/// (int dmu)^{-1} for the bosonic measure. n = 1 in closed form via the
/// radial integral pi * int_0^1 (1-r)^e dr; otherwise uniform-box Monte Carlo.
inline Estimate c0_bosonic_selfconsistent(std::size_t colours, std::size_t flavours,
                                          const std::optional<McConfig>& cfg = std::nullopt) {
    const BosonicMeasure mu(colours, flavours);
    const double e = mu.exponent();
    if (flavours == 1) return {(e + 1.0) / std::numbers::pi, 0.0, 0};
    if (!cfg) throw ConfigError("c0_bosonic_selfconsistent: n >= 2 needs a Monte-Carlo config");
    const std::size_t ne = symmetric_entries(flavours);
    const double box = std::pow(4.0, double(ne));
    auto acc = run_monte_carlo(*cfg, MeanAccumulator(1), [&](Xoshiro256pp& eng, MeanAccumulator& a) {
        std::vector<Complex> upper(ne);
        for (auto& c : upper) c = Complex(2.0 * eng.uniform() - 1.0, 2.0 * eng.uniform() - 1.0);
        const auto ld = log_det_one_plus(symmetric_from_upper(flavours, upper), -1.0);
        const Complex v = ld ? box * std::exp(e * *ld) : 0.0;
        a.add(std::span<const Complex>(&v, 1));
    });
    const Estimate vol = acc.estimates().front();
    const double m = vol.mean.real();
    return {1.0 / m, vol.std_error / (m * m), vol.samples};
}

// ---------------------------------------------------------------------------
// Verification reports
// ---------------------------------------------------------------------------

struct CoefficientRow {
    std::string label;
    Monomial monomial = 0;
    Estimate lhs;
    Estimate rhs;
    double z_score = 0.0;
};

struct NormalizationAudit {
    double paper = 0.0;
    Estimate self_consistent;
    double ratio = 0.0;  // paper / self-consistent
};

struct VerificationReport {
    std::string variant;
    std::size_t colours = 0;
    std::size_t flavours = 0;
    std::size_t samples = 0;
    double threshold = 4.0;
    std::vector<CoefficientRow> rows;
    double max_abs_z = 0.0;
    bool pass = false;
    double rhs_effective_samples = 0.0;
    std::optional<Complex> fitted_k;
    std::optional<NormalizationAudit> normalization;

    void finalize() {
        max_abs_z = 0.0;
        for (const auto& r : rows) max_abs_z = std::max(max_abs_z, std::abs(r.z_score));
        pass = max_abs_z <= threshold;
    }

    const CoefficientRow* find(Monomial m) const {
        for (const auto& r : rows)
            if (r.monomial == m) return &r;
        return nullptr;
    }
};

/// |lhs - rhs| / sqrt(se_lhs^2 + se_rhs^2); exact sides compare at 1e-12.
inline double z_score(const Estimate& a, const Estimate& b) {
    const double diff = std::abs(a.mean - b.mean);
    const double se = std::hypot(a.std_error, b.std_error);
    if (se > 0.0) return diff / se;
    const double scale = std::max({1.0, std::abs(a.mean), std::abs(b.mean)});
    return diff <= 1e-12 * scale ? 0.0 : std::numeric_limits<double>::infinity();
}

struct CftOptions {
    McConfig mc{1000000, {}, default_workers(), 64};
    double threshold = 4.0;
    /// Scale the right-hand side by C0(paper)/C0(self-consistent).
    bool paper_normalization = false;
    /// Minimum accepted sample count.
    std::size_t min_samples = 10000;
};

/// E[coefficients of exp(psibar O psi)] over Haar O in `group`; with
/// `reflected`, O is replaced by R O, R = diag(1,..,1,-1).
inline std::vector<Estimate> lhs_coefficient_estimates(const LhsExpansion& lhs, Group group,
                                                       const McConfig& cfg, bool reflected = false) {
    const std::size_t n = lhs.universe().colours();
    auto acc = run_monte_carlo(cfg, MeanAccumulator(lhs.size()),
                               [&](Xoshiro256pp& eng, MeanAccumulator& a) {
                                   Eigen::MatrixXd o = sample_group_real(group, n, eng);
                                   if (reflected) o.row(o.rows() - 1) *= -1.0;
                                   std::vector<Complex> c(lhs.size());
                                   lhs.coefficients(o, c);
                                   a.add(c);
                               });
    return acc.estimates();
}

namespace detail {

class RowIndex {
public:
    explicit RowIndex(const Universe& u) : u_(u) {}
    std::size_t operator()(Monomial m) {
        auto [it, inserted] = index_.try_emplace(m, rows_.size());
        if (inserted) {
            CoefficientRow r;
            r.monomial = m;
            r.label = u_.label(m);
            rows_.push_back(r);
        }
        return it->second;
    }
    std::vector<CoefficientRow>& rows() { return rows_; }

private:
    Universe u_;
    std::map<Monomial, std::size_t> index_;
    std::vector<CoefficientRow> rows_;
};

inline void check_samples(const CftOptions& opt, const char* who) {
    if (opt.mc.samples < opt.min_samples)
        throw ConfigError(std::string(who) + ": at least " + std::to_string(opt.min_samples) +
                          " samples required");
}

}  // namespace detail

/// Coefficient-wise check of
///   int_{O(N)} dO exp(psibar O psi) = C0 int dmu(Z) exp(1/2(psibar Z psibar + psi Z^dag psi)).
inline VerificationReport verify_fermionic_cft(std::size_t colours, std::size_t flavours,
                                               const CftOptions& opt = {}) {
    const Universe u(colours, flavours);
    detail::check_samples(opt, "verify_fermionic_cft");
    const LhsExpansion lhs(u);
    const RhsExpansion rhs(u);
    const FermionicMeasure mu{colours, flavours};

    McConfig lcfg = opt.mc;
    lcfg.rng = opt.mc.rng.substream(0);
    const auto lhs_est = lhs_coefficient_estimates(lhs, Group::O, lcfg);

    McConfig rcfg = opt.mc;
    rcfg.rng = opt.mc.rng.substream(1);
    auto racc = run_monte_carlo(rcfg, WeightedAccumulator(rhs.size()),
                                [&](Xoshiro256pp& eng, WeightedAccumulator& a) {
                                    const ZSample s = sample_fermionic_Z(mu, eng);
                                    std::vector<Complex> c(rhs.size());
                                    rhs.coefficients(s.z, c);
                                    a.add(s.weight, c);
                                });
    auto rhs_est = racc.estimates();

    NormalizationAudit audit;
    audit.paper = c0_fermionic_paper(colours, flavours);
    McConfig ncfg = opt.mc;
    ncfg.rng = opt.mc.rng.substream(2);
    audit.self_consistent = c0_fermionic_selfconsistent(colours, flavours, ncfg);
    audit.ratio = audit.paper / audit.self_consistent.mean.real();
    if (opt.paper_normalization)
        for (auto& e : rhs_est) {
            e.mean *= audit.ratio;
            e.std_error *= audit.ratio;
        }

    VerificationReport rep;
    rep.variant = "fermionic";
    rep.colours = colours;
    rep.flavours = flavours;
    rep.samples = opt.mc.samples;
    rep.threshold = opt.threshold;
    rep.rhs_effective_samples = racc.effective_samples();
    rep.normalization = audit;

    detail::RowIndex index(u);
    const Estimate zero{0.0, 0.0, opt.mc.samples};
    for (std::size_t k = 0; k < lhs.size(); ++k) {
        const std::size_t r = index(lhs.monomial(k));
        index.rows()[r].lhs = lhs_est[k];
        index.rows()[r].rhs = zero;
    }
    for (std::size_t k = 0; k < rhs.size(); ++k) {
        const std::size_t before = index.rows().size();
        const std::size_t r = index(rhs.monomial(k));
        if (index.rows().size() > before) index.rows()[r].lhs = zero;
        index.rows()[r].rhs = rhs_est[k];
    }
    rep.rows = std::move(index.rows());
    for (auto& r : rep.rows) r.z_score = z_score(r.lhs, r.rhs);
    rep.finalize();
    return rep;
}

/// Random probe vectors (phibar, phi), each N x n with Frobenius norm <= radius.
struct BosonicProbe {
    ComplexMatrix phibar;
    ComplexMatrix phi;
};

inline std::vector<BosonicProbe> random_bosonic_probes(std::size_t colours, std::size_t flavours,
                                                       std::size_t count, const RngStream& rng,
                                                       double radius = 0.5) {
    auto eng = rng.engine();
    std::normal_distribution<double> normal;
    auto draw = [&] {
        ComplexMatrix m(colours, flavours);
        double norm2 = 0.0;
        for (auto& v : m.entries()) {
            v = Complex(normal(eng), normal(eng));
            norm2 += std::norm(v);
        }
        m *= Complex(radius * eng.uniform() / std::sqrt(norm2));
        return m;
    };
    std::vector<BosonicProbe> probes;
    for (std::size_t k = 0; k < count; ++k) {
        BosonicProbe p;
        p.phibar = draw();
        p.phi = draw();
        probes.push_back(std::move(p));
    }
    return probes;
}

/// Function-value check of the bosonic identity at each probe point:
///   E_O exp(phibar^i_a O_ij phi^j_a) = E_mu exp(1/2(phibar Z phibar + phi Z^dag phi)).
inline VerificationReport verify_bosonic_cft(std::size_t colours, std::size_t flavours,
                                             const std::vector<BosonicProbe>& probes,
                                             const CftOptions& opt = {}) {
    const BosonicMeasure mu(colours, flavours);
    detail::check_samples(opt, "verify_bosonic_cft");
    for (const auto& p : probes)
        if (p.phi.rows() != colours || p.phi.cols() != flavours || p.phibar.rows() != colours ||
            p.phibar.cols() != flavours)
            throw ShapeError("verify_bosonic_cft: probe shape must be N x n");

    const std::size_t np = probes.size();
    // Colour contractions for the flavour side: A_ab = sum_i phibar^i_a phibar^i_b.
    std::vector<ComplexMatrix> abar, bvec;
    for (const auto& p : probes) {
        abar.push_back(p.phibar.transpose() * p.phibar);
        bvec.push_back(p.phi.transpose() * p.phi);
    }

    McConfig lcfg = opt.mc;
    lcfg.rng = opt.mc.rng.substream(0);
    auto lacc = run_monte_carlo(lcfg, MeanAccumulator(np), [&](Xoshiro256pp& eng, MeanAccumulator& a) {
        const Eigen::MatrixXd o = sample_orthogonal_real(colours, eng);
        std::vector<Complex> f(np);
        for (std::size_t k = 0; k < np; ++k) {
            Complex s = 0.0;
            for (std::size_t i = 0; i < colours; ++i)
                for (std::size_t j = 0; j < colours; ++j)
                    for (std::size_t a2 = 0; a2 < flavours; ++a2)
                        s += probes[k].phibar(i, a2) * o(Eigen::Index(i), Eigen::Index(j)) *
                             probes[k].phi(j, a2);
            f[k] = std::exp(s);
        }
        a.add(f);
    });

    McConfig rcfg = opt.mc;
    rcfg.rng = opt.mc.rng.substream(1);
    auto racc = run_monte_carlo(rcfg, WeightedAccumulator(np),
                                [&](Xoshiro256pp& eng, WeightedAccumulator& a) {
                                    const ZSample s = sample_bosonic_Z(mu, eng);
                                    const ComplexMatrix zd = s.z.adjoint();
                                    std::vector<Complex> f(np);
                                    for (std::size_t k = 0; k < np; ++k) {
                                        Complex e = 0.0;
                                        for (std::size_t x = 0; x < flavours; ++x)
                                            for (std::size_t y = 0; y < flavours; ++y)
                                                e += s.z(x, y) * abar[k](x, y) +
                                                     zd(x, y) * bvec[k](x, y);
                                        f[k] = std::exp(0.5 * e);
                                    }
                                    a.add(s.weight, f);
                                });

    const auto le = lacc.estimates();
    const auto re = racc.estimates();
    VerificationReport rep;
    rep.variant = "bosonic";
    rep.colours = colours;
    rep.flavours = flavours;
    rep.samples = opt.mc.samples;
    rep.threshold = opt.threshold;
    rep.rhs_effective_samples = racc.effective_samples();
    NormalizationAudit audit;
    audit.paper = c0_bosonic_paper(colours, flavours);
    McConfig ncfg = opt.mc;
    ncfg.rng = opt.mc.rng.substream(2);
    audit.self_consistent = c0_bosonic_selfconsistent(colours, flavours, ncfg);
    audit.ratio = audit.paper / audit.self_consistent.mean.real();
    rep.normalization = audit;
    for (std::size_t k = 0; k < np; ++k) {
        CoefficientRow r;
        r.label = "probe " + std::to_string(k);
        r.monomial = Monomial(k);
        r.lhs = le[k];
        r.rhs = re[k];
        if (opt.paper_normalization) {
            r.rhs.mean *= audit.ratio;
            r.rhs.std_error *= audit.ratio;
        }
        r.z_score = z_score(r.lhs, r.rhs);
        rep.rows.push_back(r);
    }
    rep.finalize();
    return rep;
}

/// SO(N) variant: LHS over SO(N) against
///   E_mu[exp(...)] + K * E_mu[exp(...) det M],  M_ij = psibar^i_a (1+ZZ^dag)_ab psi^j_b,
/// with the scalar K fitted by weighted least squares over all coefficients.
/// The right-hand side is sampled twice with the same stream: once to fit K,
/// once to estimate the combined coefficients and their standard errors.
inline VerificationReport verify_son_cft(std::size_t colours, std::size_t flavours,
                                         const CftOptions& opt = {}) {
    if (colours > 3) throw ConfigError("verify_son_cft: Leibniz expansion limited to N <= 3");
    const Universe u(colours, flavours);
    detail::check_samples(opt, "verify_son_cft");
    const LhsExpansion lhs(u);
    const RhsExpansion rhs(u);
    const FermionicMeasure mu{colours, flavours};

    McConfig lcfg = opt.mc;
    lcfg.rng = opt.mc.rng.substream(0);
    const auto lhs_est = lhs_coefficient_estimates(lhs, Group::SO, lcfg);

    // Rows: LHS monomials plus everything the two RHS pieces can reach.
    detail::RowIndex index(u);
    for (std::size_t k = 0; k < lhs.size(); ++k) index(lhs.monomial(k));
    for (std::size_t k = 0; k < rhs.size(); ++k) index(rhs.monomial(k));
    {
        // exp(...) det M: per colour an odd number of psibar and of psi generators.
        const std::size_t nf = flavours;
        std::vector<std::uint32_t> odd;
        for (std::uint32_t s = 0; s < (std::uint32_t{1} << nf); ++s)
            if (std::popcount(s) % 2 == 1) odd.push_back(s);
        std::vector<std::size_t> pick(2 * colours, 0);
        while (true) {
            Monomial m = 0;
            for (std::size_t i = 0; i < colours; ++i) {
                for (unsigned a : detail::bits_of(odd[pick[2 * i]])) m |= Monomial{1} << u.bar(i, a);
                for (unsigned b : detail::bits_of(odd[pick[2 * i + 1]]))
                    m |= Monomial{1} << u.psi(i, b);
            }
            index(m);
            std::size_t a = 0;
            while (a < pick.size() && ++pick[a] == odd.size()) pick[a++] = 0;
            if (a == pick.size()) break;
        }
    }
    auto& rows = index.rows();
    const std::size_t nr = rows.size();
    std::map<Monomial, std::size_t> row_of;
    for (std::size_t r = 0; r < nr; ++r) row_of[rows[r].monomial] = r;

    McConfig rcfg = opt.mc;
    rcfg.rng = opt.mc.rng.substream(1);
    auto rhs_pieces = [&](const ComplexMatrix& z, std::vector<Complex>& r0, std::vector<Complex>& r1) {
        const Multivector e = rhs.to_multivector(z);
        ComplexMatrix h = z * z.adjoint();
        for (std::size_t i = 0; i < h.rows(); ++i) h(i, i) += 1.0;
        const Multivector ed = gmul(e, grassmann_det(h, u));
        std::fill(r0.begin(), r0.end(), Complex{});
        std::fill(r1.begin(), r1.end(), Complex{});
        for (const auto& [m, c] : e.terms()) r0[row_of.at(m)] = c;
        for (const auto& [m, c] : ed.terms()) r1[row_of.at(m)] = c;
    };

    auto fit_acc = run_monte_carlo(rcfg, WeightedAccumulator(2 * nr),
                                   [&](Xoshiro256pp& eng, WeightedAccumulator& a) {
                                       const ZSample s = sample_fermionic_Z(mu, eng);
                                       std::vector<Complex> r0(nr), r1(nr);
                                       rhs_pieces(s.z, r0, r1);
                                       r0.insert(r0.end(), r1.begin(), r1.end());
                                       a.add(s.weight, r0);
                                   });
    const auto fit = fit_acc.estimates();

    std::vector<Estimate> lhs_row(nr, Estimate{0.0, 0.0, opt.mc.samples});
    for (std::size_t k = 0; k < lhs.size(); ++k) lhs_row[row_of.at(lhs.monomial(k))] = lhs_est[k];

    Complex num = 0.0;
    double den = 0.0;
    for (std::size_t r = 0; r < nr; ++r) {
        const Estimate& r0 = fit[r];
        const Estimate& r1 = fit[nr + r];
        const double var = std::pow(lhs_row[r].std_error, 2) + std::pow(r0.std_error, 2) + 1e-24;
        num += std::conj(r1.mean) * (lhs_row[r].mean - r0.mean) / var;
        den += std::norm(r1.mean) / var;
    }
    const Complex k_fit = den > 0.0 ? num / den : Complex{};

    auto comb_acc = run_monte_carlo(rcfg, WeightedAccumulator(nr),
                                    [&](Xoshiro256pp& eng, WeightedAccumulator& a) {
                                        const ZSample s = sample_fermionic_Z(mu, eng);
                                        std::vector<Complex> r0(nr), r1(nr);
                                        rhs_pieces(s.z, r0, r1);
                                        for (std::size_t r = 0; r < nr; ++r) r0[r] += k_fit * r1[r];
                                        a.add(s.weight, r0);
                                    });
    const auto comb = comb_acc.estimates();

    VerificationReport rep;
    rep.variant = "son";
    rep.colours = colours;
    rep.flavours = flavours;
    rep.samples = opt.mc.samples;
    rep.threshold = opt.threshold;
    rep.rhs_effective_samples = comb_acc.effective_samples();
    rep.fitted_k = k_fit;
    for (std::size_t r = 0; r < nr; ++r) {
        rows[r].lhs = lhs_row[r];
        rows[r].rhs = comb[r];
        rows[r].z_score = z_score(rows[r].lhs, rows[r].rhs);
    }
    rep.rows = std::move(rows);
    rep.finalize();
    return rep;
}

}  // namespace ocft
