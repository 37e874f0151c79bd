#pragma once

#include "sdde/common.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <vector>

namespace sdde {

struct QuadratureOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_intervals = 2000;
};

namespace quad_detail {

// Gauss-7 / Kronrod-15 nodes and weights (positive half).
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
void gk15(const F& f, double a, double b, double& result, double& err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f0 = f(mid);
    double k15 = kWgk[7] * f0;
    double g7 = kWg[3] * f0;
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kXgk[i];
        const double fsum = f(mid - dx) + f(mid + dx);
        k15 += kWgk[i] * fsum;
        if (i % 2 == 1) g7 += kWg[i / 2] * fsum;
    }
    result = k15 * half;
    err = std::abs((k15 - g7) * half);
}

struct Piece {
    double err, a, b, value;
    bool operator<(const Piece& o) const { return err < o.err; }
};

}  // namespace quad_detail

/// Adaptive Gauss-Kronrod integration of f over [a, b]. Refines the worst
/// interval until the summed error estimate meets tolerance; throws
/// QuadratureError with the residual when the interval budget runs out.
template <class F>
double integrate(const F& f, double a, double b, QuadratureOptions opts = {}) {
    if (a == b) return 0.0;
    double v, e;
    quad_detail::gk15(f, a, b, v, e);
    std::priority_queue<quad_detail::Piece> heap;
    heap.push({e, a, b, v});
    double total_v = v, total_e = e;
    int used = 1;
    while (total_e > std::max(opts.abs_tol, opts.rel_tol * std::abs(total_v))) {
        if (used >= opts.max_intervals || heap.empty())
            throw QuadratureError("adaptive quadrature did not converge", total_e);
        quad_detail::Piece p = heap.top();
        heap.pop();
        const double m = 0.5 * (p.a + p.b);
        double v1, e1, v2, e2;
        quad_detail::gk15(f, p.a, m, v1, e1);
        quad_detail::gk15(f, m, p.b, v2, e2);
        total_v += v1 + v2 - p.value;
        total_e += e1 + e2 - p.err;
        heap.push({e1, p.a, m, v1});
        heap.push({e2, m, p.b, v2});
        ++used;
        if (m == p.a || m == p.b)
            throw QuadratureError("interval collapsed below machine precision", total_e);
    }
    return total_v;
}

/// Integral over (0, b] of an integrand with an integrable power-type
/// singularity (or fast growth) at 0: dyadic pieces [b/2^{k+1}, b/2^k]
/// are integrated until their contribution is negligible and decaying.
template <class F>
double integrate_dyadic_to_zero(const F& f, double b, QuadratureOptions opts = {}) {
    double sum = 0.0;
    double hi = b;
    double prev = std::numeric_limits<double>::infinity();
    const int max_pieces = 1000;
    for (int k = 0; k < max_pieces && hi > 0.0; ++k) {
        const double lo = 0.5 * hi;
        const double piece = integrate(f, lo, hi, opts);
        sum += piece;
        const double ap = std::abs(piece);
        const double thr = 0.5 * std::max(opts.abs_tol, opts.rel_tol * std::abs(sum));
        if (k >= 3 && ap <= thr) {
            // geometric tail bound from the observed decay ratio
            const double ratio = ap / prev;
            if (ratio < 1.0 && ap * ratio / (1.0 - ratio) <= thr) return sum;
        }
        prev = ap;
        hi = lo;
    }
    throw QuadratureError("dyadic refinement toward 0 did not converge", prev);
}

}  // namespace sdde
