#pragma once

// Adaptive Gauss-Kronrod (G7,K15) quadrature with support for integrable
// endpoint singularities via power substitution.

#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>
#include <utility>
#include <stdexcept>

namespace efc::quad {

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0;   // estimated
    long evals = 0;
    bool converged = false;
};

namespace detail {

// 15-point Kronrod nodes/weights on [-1,1] with the embedded 7-point Gauss rule.
// Stored as {node, gauss weight, kronrod weight}; node 0 listed first, the rest
// are symmetric pairs.
inline constexpr double gk15[8][3] = {
    {0.000000000000000000, 0.417959183673469388, 0.209482141084727828},
    {0.405845151377397167, 0.381830050505118945, 0.190350578064785410},
    {0.741531185599394440, 0.279705391489276668, 0.140653259715525919},
    {0.949107912342758525, 0.129484966168869693, 0.063092092629978553},
    {0.207784955007898468, 0.0,                  0.204432940075298892},
    {0.586087235467691130, 0.0,                  0.169004726639267903},
    {0.864864423359769073, 0.0,                  0.104790010322250184},
    {0.991455371120812639, 0.0,                  0.022935322010529225},
};

template <class F>
inline void gk15_apply(const F& f, double a, double b, double& k15, double& err) {
    const double mid = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double y0 = f(mid);
    double g7 = gk15[0][1] * y0;
    double k = gk15[0][2] * y0;
    for (int i = 1; i < 8; ++i) {
        const double dx = h * gk15[i][0];
        const double yi = f(mid + dx) + f(mid - dx);
        g7 += gk15[i][1] * yi;
        k += gk15[i][2] * yi;
    }
    g7 *= h;
    k *= h;
    k15 = k;
    // QUADPACK-style error heuristic: superlinear shrink once the two rules agree
    const double e = 200.0 * std::fabs(g7 - k);
    err = e * std::fmin(1.0, std::sqrt(e));
}

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

} // namespace detail

// Globally adaptive integration of f over the finite interval [a, b].
// Subdivides the worst segment until the summed error estimate meets
// max(abs_tol, rel_tol * |value|) or the segment budget runs out.
template <class F>
QuadResult integrate_adaptive(const F& f, double a, double b,
                              double rel_tol = 1e-11, double abs_tol = 1e-300,
                              int max_segments = 4000,
                              const std::vector<double>& presplit = {}) {
    QuadResult out;
    if (!(b > a)) { out.converged = true; return out; }

    std::priority_queue<detail::Segment> heap;
    double total = 0.0, total_err = 0.0;

    auto push_seg = [&](double lo, double hi) {
        detail::Segment s{lo, hi, 0.0, 0.0};
        detail::gk15_apply(f, lo, hi, s.value, s.error);
        out.evals += 15;
        total += s.value;
        total_err += s.error;
        heap.push(s);
    };

    double prev = a;
    for (double p : presplit) {
        if (p > prev && p < b) { push_seg(prev, p); prev = p; }
    }
    push_seg(prev, b);

    int nseg = static_cast<int>(heap.size());
    while (nseg < max_segments) {
        if (total_err <= std::max(abs_tol, rel_tol * std::fabs(total))) break;
        detail::Segment worst = heap.top();
        heap.pop();
        total -= worst.value;
        total_err -= worst.error;
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // interval at rounding resolution; keep its estimate and drop it from play
            total += worst.value;
            heap.push(detail::Segment{worst.a, worst.b, worst.value, 0.0});
            ++nseg;
            continue;
        }
        push_seg(worst.a, mid);
        push_seg(mid, worst.b);
        ++nseg;
    }
    out.value = total;
    out.abs_error = total_err;
    out.converged = total_err <= std::max(abs_tol * 2, rel_tol * std::fabs(total) * 2) + 1e-305;
    return out;
}

// Integrate f over (0, b] when f(x) ~ x^{-p} * smooth near 0 with p in [0, 1).
// Substitutes x = u^{1/(1-p)} so the transformed integrand is bounded at 0:
//   \int_0^b f(x) dx = \int_0^{b^{1-p}} f(u^{1/(1-p)}) * (1/(1-p)) * u^{p/(1-p)} du.
template <class F>
QuadResult integrate_power_singular_at_zero(const F& f, double b, double p,
                                            double rel_tol = 1e-11, double abs_tol = 1e-300,
                                            int max_segments = 4000,
                                            const std::vector<double>& presplit_x = {}) {
    if (!(p >= 0.0 && p < 1.0))
        throw std::invalid_argument("singularity exponent must lie in [0,1)");
    if (p == 0.0)
        return integrate_adaptive(f, 0.0, b, rel_tol, abs_tol, max_segments, presplit_x);
    const double q = 1.0 - p;
    auto g = [&](double u) {
        const double x = std::pow(u, 1.0 / q);
        return f(x) * std::pow(u, p / q) / q;
    };
    std::vector<double> presplit_u;
    presplit_u.reserve(presplit_x.size());
    for (double x : presplit_x) presplit_u.push_back(std::pow(x, q));
    return integrate_adaptive(g, 0.0, std::pow(b, q), rel_tol, abs_tol, max_segments, presplit_u);
}

} // namespace efc::quad
