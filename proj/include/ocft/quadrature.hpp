#pragma once

// Gauss-Legendre rules and globally adaptive Gauss-Kronrod (G7/K15)
// integration, plus nested integration over ordered simplices
// lo <= x_1 <= x_2 <= ... <= x_d <= hi (hi may be +infinity).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

#include "ocft/errors.hpp"

namespace ocft {

/// Nodes and weights of an n-point Gauss-Legendre rule mapped to [0, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(std::size_t n) : nodes(n), weights(n) {
        if (n == 0) throw ConfigError("GaussLegendre: need at least one node");
        const std::size_t m = (n + 1) / 2;
        for (std::size_t i = 0; i < m; ++i) {
            double x = std::cos(std::numbers::pi * (double(i) + 0.75) / (double(n) + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (std::size_t k = 1; k <= n; ++k) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * double(k) - 1.0) * x * p1 - (double(k) - 1.0) * p2) / double(k);
                }
                dp = double(n) * (x * p0 - p1) / (x * x - 1.0);
                const double dx = p0 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = weights[n - 1 - i] = 0.5 * w;
        }
    }

    std::size_t size() const noexcept { return nodes.size(); }
};

struct QuadOptions {
    double rel_tol = 1e-11;
    double abs_tol = 1e-300;
    std::size_t max_intervals = 400;
};

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(std::complex<double> v) { return std::abs(v); }

// 7-point Gauss / 15-point Kronrod abscissae and weights on [-1, 1].
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class V, class F>
V gk15(F& f, double a, double b, double& err) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const V fc = f(c);
    V resk = fc * kWgk[7];
    V resg = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const V s = f(c - dx) + f(c + dx);
        resk += s * kWgk[j];
        if (j % 2 == 1) resg += s * kWg[j / 2];
    }
    err = magnitude(V((resk - resg) * h));
    return resk * h;
}

}  // namespace detail

/// Globally adaptive G7/K15 quadrature of f over [a, b]: the interval with the
/// largest error estimate is bisected until the total error is within
/// max(abs_tol, rel_tol * |integral|).
template <class V, class F>
V integrate_adaptive(F&& f, double a, double b, const QuadOptions& opt = {}) {
    struct Piece {
        double a, b, err;
        V value;
        bool operator<(const Piece& o) const { return err < o.err; }
    };
    if (a == b) return V{};
    std::priority_queue<Piece> heap;
    double err = 0.0;
    V v = detail::gk15<V>(f, a, b, err);
    heap.push({a, b, err, v});
    V total = v;
    double total_err = err;
    while (total_err > std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total)) &&
           heap.size() < opt.max_intervals) {
        Piece p = heap.top();
        heap.pop();
        const double mid = 0.5 * (p.a + p.b);
        double e1 = 0.0, e2 = 0.0;
        V v1 = detail::gk15<V>(f, p.a, mid, e1);
        V v2 = detail::gk15<V>(f, mid, p.b, e2);
        total += v1 + v2 - p.value;
        total_err += e1 + e2 - p.err;
        heap.push({p.a, mid, e1, v1});
        heap.push({mid, p.b, e2, v2});
    }
    return total;
}

/// Integral over [lo, +inf) via x = lo + u / (1 - u).
template <class V, class F>
V integrate_half_line(F&& f, double lo, const QuadOptions& opt = {}) {
    auto g = [&](double u) -> V {
        const double om = 1.0 - u;
        return f(lo + u / om) * (1.0 / (om * om));
    };
    return integrate_adaptive<V>(g, 0.0, 1.0, opt);
}

namespace detail {

template <class V, class F>
V ordered_level(F& f, std::vector<double>& x, std::size_t level, double lo, double hi,
                const QuadOptions& opt) {
    if (level == x.size()) return f(std::span<const double>(x));
    auto inner = [&](double v) -> V {
        x[level] = v;
        return ordered_level<V>(f, x, level + 1, v, hi, opt);
    };
    if (std::isinf(hi)) return integrate_half_line<V>(inner, lo, opt);
    return integrate_adaptive<V>(inner, lo, hi, opt);
}

}  // namespace detail

/// Integral of f(x_1..x_d) over lo <= x_1 <= ... <= x_d <= hi.
template <class V, class F>
V integrate_ordered(F&& f, std::size_t dims, double lo, double hi, const QuadOptions& opt = {}) {
    std::vector<double> x(dims);
    return detail::ordered_level<V>(f, x, 0, lo, hi, opt);
}

}  // namespace ocft
