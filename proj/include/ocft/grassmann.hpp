#pragma once

// Exact sparse exterior algebra over the 2*N*n generators
//   bar(i, a) = psibar^i_a  -> bit i*n + a
//   psi(i, a) = psi^i_a     -> bit N*n + i*n + a
// A monomial is a bit set; its coefficient refers to the product of its
// generators in increasing bit order (the psibar block precedes the psi block).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "ocft/errors.hpp"
#include "ocft/linalg.hpp"

namespace ocft {

using Monomial = std::uint32_t;

/// The generator set for N colours and n flavours. N*n <= 8.
class Universe {
public:
    static constexpr std::size_t kMaxColourFlavour = 8;

    Universe() = default;
    Universe(std::size_t colours, std::size_t flavours) : colours_(colours), flavours_(flavours) {
        if (colours == 0 || flavours == 0)
            throw ConfigError("Universe: colour and flavour counts must be positive");
        if (colours * flavours > kMaxColourFlavour)
            throw ConfigError("Universe: N*n = " + std::to_string(colours * flavours) +
                              " exceeds the cap of " + std::to_string(kMaxColourFlavour));
    }

    std::size_t colours() const noexcept { return colours_; }
    std::size_t flavours() const noexcept { return flavours_; }
    std::size_t generators() const noexcept { return 2 * colours_ * flavours_; }

    unsigned bar(std::size_t i, std::size_t a) const { return unsigned(i * flavours_ + a); }
    unsigned psi(std::size_t i, std::size_t a) const {
        return unsigned(colours_ * flavours_ + i * flavours_ + a);
    }

    bool operator==(const Universe&) const = default;

    /// Readable monomial name such as "b1.2*p2.1" (1-based colour.flavour).
    std::string label(Monomial m) const {
        if (m == 0) return "1";
        std::string s;
        const std::size_t half = colours_ * flavours_;
        for (unsigned bit = 0; bit < generators(); ++bit) {
            if (!(m & (Monomial{1} << bit))) continue;
            const std::size_t local = bit < half ? bit : bit - half;
            if (!s.empty()) s += '*';
            s += bit < half ? 'b' : 'p';
            s += std::to_string(local / flavours_ + 1) + "." + std::to_string(local % flavours_ + 1);
        }
        return s;
    }

private:
    std::size_t colours_ = 1;
    std::size_t flavours_ = 1;
};

/// Sign of moving the generators of `y` to the right of those of `x` into
/// canonical order: (-1)^(number of pairs p in x, q in y with p > q).
inline int reorder_sign(Monomial x, Monomial y) {
    unsigned crossings = 0;
    while (y) {
        const int q = std::countr_zero(y);
        crossings += unsigned(std::popcount(q >= 31 ? Monomial{0} : (x >> (q + 1))));
        y &= y - 1;
    }
    return (crossings & 1u) ? -1 : 1;
}

/// Element of the Grassmann algebra with complex coefficients.
class Multivector {
public:
    static constexpr double kPruneRelative = 1e-15;

    Multivector() = default;
    explicit Multivector(Universe u) : universe_(u) {}

    static Multivector scalar(Universe u, Complex c) {
        Multivector m(u);
        m.set(0, c);
        return m;
    }

    static Multivector generator(Universe u, unsigned bit, Complex c = 1.0) {
        if (bit >= u.generators()) throw IndexError("Multivector: generator index out of range");
        Multivector m(u);
        m.set(Monomial{1} << bit, c);
        return m;
    }

    const Universe& universe() const noexcept { return universe_; }
    const std::map<Monomial, Complex>& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }
    bool is_zero() const noexcept { return terms_.empty(); }

    Complex coefficient(Monomial m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? Complex{} : it->second;
    }

    void set(Monomial m, Complex c) {
        if (c == Complex{})
            terms_.erase(m);
        else
            terms_[m] = c;
    }

    Multivector& operator+=(const Multivector& o) {
        check_universe(o);
        for (const auto& [m, c] : o.terms_) terms_[m] += c;
        prune();
        return *this;
    }
    Multivector& operator-=(const Multivector& o) {
        check_universe(o);
        for (const auto& [m, c] : o.terms_) terms_[m] -= c;
        prune();
        return *this;
    }
    Multivector& operator*=(Complex s) {
        for (auto& [m, c] : terms_) c *= s;
        prune();
        return *this;
    }

    friend Multivector operator+(Multivector a, const Multivector& b) { return a += b; }
    friend Multivector operator-(Multivector a, const Multivector& b) { return a -= b; }
    friend Multivector operator*(Multivector a, Complex s) { return a *= s; }
    friend Multivector operator*(Complex s, Multivector a) { return a *= s; }
    Multivector operator-() const { return *this * Complex(-1.0); }

    int max_grade() const {
        int g = 0;
        for (const auto& [m, c] : terms_) g = std::max(g, std::popcount(m));
        return g;
    }

    void check_universe(const Multivector& o) const {
        if (!(universe_ == o.universe_)) throw ShapeError("Multivector: universe mismatch");
    }

    /// Drop coefficients below kPruneRelative times the largest magnitude.
    void prune() {
        double big = 0.0;
        for (const auto& [m, c] : terms_) big = std::max(big, std::abs(c));
        const double cut = kPruneRelative * big;
        std::erase_if(terms_, [cut](const auto& kv) { return std::abs(kv.second) <= cut; });
    }

private:
    Universe universe_;
    std::map<Monomial, Complex> terms_;
};

/// Graded product.
inline Multivector gmul(const Multivector& x, const Multivector& y) {
    x.check_universe(y);
    std::map<Monomial, Complex> acc;
    for (const auto& [mx, cx] : x.terms())
        for (const auto& [my, cy] : y.terms()) {
            if (mx & my) continue;
            acc[mx | my] += double(reorder_sign(mx, my)) * cx * cy;
        }
    Multivector out(x.universe());
    for (const auto& [m, c] : acc) out.set(m, c);
    out.prune();
    return out;
}

inline Multivector operator*(const Multivector& x, const Multivector& y) { return gmul(x, y); }

/// exp(x) for an even element without scalar part; the series terminates.
inline Multivector gexp(const Multivector& x) {
    for (const auto& [m, c] : x.terms()) {
        if (m == 0) throw DomainError("gexp: argument has a scalar part");
        if (std::popcount(m) % 2 != 0) throw DomainError("gexp: argument has odd-grade terms");
    }
    Multivector result = Multivector::scalar(x.universe(), 1.0);
    Multivector power = result;
    for (int k = 1; !x.is_zero(); ++k) {
        power = gmul(power, x) * Complex(1.0 / k);
        if (power.is_zero()) break;
        result += power;
    }
    return result;
}

/// exp(sum_{i,j,a} O_ij psibar^i_a psi^j_a).
inline Multivector lhs_integrand(const ComplexMatrix& o, const Universe& u) {
    const std::size_t n = u.colours();
    if (o.rows() != n || o.cols() != n)
        throw ShapeError("lhs_integrand: O must be " + std::to_string(n) + "x" + std::to_string(n));
    Multivector x(u);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (o(i, j) == Complex{}) continue;
            for (std::size_t a = 0; a < u.flavours(); ++a)
                x += gmul(Multivector::generator(u, u.bar(i, a), o(i, j)),
                          Multivector::generator(u, u.psi(j, a)));
        }
    return gexp(x);
}

/// exp( 1/2 (psibar^i_a Z_ab psibar^i_b + psi^i_a (Z^dagger)_ab psi^i_b) ).
inline Multivector rhs_integrand(const ComplexMatrix& z, const Universe& u) {
    const std::size_t nf = u.flavours();
    if (z.rows() != nf || z.cols() != nf)
        throw ShapeError("rhs_integrand: Z must be " + std::to_string(nf) + "x" + std::to_string(nf));
    if (!z.is_skew(std::max(1e-12 * z.max_abs(), 0.0)))
        throw ShapeError("rhs_integrand: Z is not skew-symmetric");
    const ComplexMatrix zd = z.adjoint();
    Multivector x(u);
    for (std::size_t i = 0; i < u.colours(); ++i)
        for (std::size_t a = 0; a < nf; ++a)
            for (std::size_t b = 0; b < nf; ++b) {
                if (a == b) continue;
                if (z(a, b) != Complex{})
                    x += gmul(Multivector::generator(u, u.bar(i, a), 0.5 * z(a, b)),
                              Multivector::generator(u, u.bar(i, b)));
                if (zd(a, b) != Complex{})
                    x += gmul(Multivector::generator(u, u.psi(i, a), 0.5 * zd(a, b)),
                              Multivector::generator(u, u.psi(i, b)));
            }
    return gexp(x);
}

/// det M with M_ij = psibar^i_a H_ab psi^j_b, expanded by the Leibniz formula.
/// Entries of M are even, hence mutually commuting.
inline Multivector grassmann_det(const ComplexMatrix& h, const Universe& u) {
    const std::size_t n = u.colours(), nf = u.flavours();
    if (h.rows() != nf || h.cols() != nf) throw ShapeError("grassmann_det: H must be n x n");
    std::vector<std::vector<Multivector>> m(n, std::vector<Multivector>(n, Multivector(u)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t a = 0; a < nf; ++a)
                for (std::size_t b = 0; b < nf; ++b) {
                    if (h(a, b) == Complex{}) continue;
                    m[i][j] += gmul(Multivector::generator(u, u.bar(i, a), h(a, b)),
                                    Multivector::generator(u, u.psi(j, b)));
                }

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Multivector det(u);
    do {
        int parity = 1;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                if (perm[p] > perm[q]) parity = -parity;
        Multivector term = Multivector::scalar(u, double(parity));
        for (std::size_t i = 0; i < n && !term.is_zero(); ++i) term = gmul(term, m[i][perm[i]]);
        det += term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return det;
}

}  // namespace ocft
