#pragma once

// Special-function and numerically-stable kernel helpers shared by the rate
// functionals, the G_a machinery, and the samplers.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "efc/quadrature.hpp"

namespace efc::sf {

inline constexpr double pi = 3.14159265358979323846;

inline double log_choose(double n, double k) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// (1+x)^y computed through log1p so x near 0 keeps full precision.
inline double pow1p(double x, double y) {
    return std::exp(y * std::log1p(x));
}

// phi kernel: (1-x)^n + n x - 1.  Direct evaluation cancels catastrophically
// when n*x is small (the value is ~ C(n,2) x^2), so switch to the binomial
// series there.
inline double phi_kernel(double n, double x) {
    if (x >= 1.0) return n - 1.0 + (x - 1.0) * n;
    const double nx = n * x;
    if (nx <= 0.5) {
        // sum_{j>=2} C(n,j) (-x)^j, terms shrink at least geometrically (ratio <= nx/j)
        double term = 0.5 * n * (n - 1.0) * x * x; // j = 2
        double acc = term;
        double jmax = std::fmin(n, 80.0);
        for (double j = 3.0; j <= jmax; ++j) {
            term *= -x * (n - j + 1.0) / j;
            acc += term;
            if (std::fabs(term) < 1e-18 * std::fabs(acc)) break;
        }
        return acc;
    }
    return std::expm1(n * std::log1p(-x)) + nx;
}

// psi kernel: exp(-n x) - 1 + n x, same stabilization.
inline double psi_kernel(double n, double x) {
    const double y = n * x;
    if (y <= 0.5) {
        double term = 0.5 * y * y; // j = 2
        double acc = term;
        for (int j = 3; j <= 40; ++j) {
            term *= -y / j;
            acc += term;
            if (std::fabs(term) < 1e-18 * std::fabs(acc)) break;
        }
        return acc;
    }
    return std::expm1(-y) + y;
}

// coalescence-event kernel: P(Binomial(n,x) >= 2) = 1 - (1-x)^n - n x (1-x)^{n-1}.
inline double coal_total_kernel(double n, double x) {
    if (n < 2.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double nx = n * x;
    if (nx <= 0.5) {
        // sum_{j>=2} (-1)^j (j-1) C(n,j) x^j
        double cnj = 0.5 * n * (n - 1.0) * x * x; // C(n,2) x^2
        double acc = cnj;                          // (j-1) factor = 1 at j=2
        double jmax = std::fmin(n, 80.0);
        for (double j = 3.0; j <= jmax; ++j) {
            cnj *= -x * (n - j + 1.0) / j;
            const double term = cnj * (j - 1.0);
            acc += term;
            if (std::fabs(term) < 1e-18 * std::fabs(acc)) break;
        }
        return acc;
    }
    // 1 - (1-x)^{n-1} (1 + (n-1)x) = -expm1((n-1)log1p(-x) + log1p((n-1)x))
    return -std::expm1((n - 1.0) * std::log1p(-x) + std::log1p((n - 1.0) * x));
}

// ---------------------------------------------------------------------------
// Upper incomplete gamma Gamma(a, x) for a > 0, x >= 0 (unnormalized).
// Series for x < a+1, Lentz continued fraction otherwise.
inline double upper_gamma(double a, double x) {
    if (x < 0 || a <= 0) throw std::invalid_argument("upper_gamma: bad arguments");
    if (x == 0) return std::tgamma(a);
    const double lg = std::lgamma(a);
    const double lpre = a * std::log(x) - x;
    if (x < a + 1.0) {
        // P(a,x) series, then Gamma(a,x) = Gamma(a)(1 - P)
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-17) break;
        }
        const double p = sum * std::exp(lpre - lg);
        return std::exp(lg) * (1.0 - p);
    }
    // modified Lentz for the continued fraction of Q(a,x)
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-17) break;
    }
    return std::exp(lpre) * h;
}

// ---------------------------------------------------------------------------
// Terms of the form C * x^p * (log x)^g and their Euler-Maclaurin sums.
// Used for closed-form tails of power-law and logarithmic splitting measures.

struct PowLogTerm {
    double C = 0.0;
    double p = 0.0; // power exponent
    double g = 0.0; // log exponent (>= 0)

    double eval(double x) const {
        if (C == 0.0) return 0.0;
        double v = C * std::pow(x, p);
        if (g != 0.0) v *= std::pow(std::log(x), g);
        return v;
    }
    // d/dx gives two PowLog terms
    std::vector<PowLogTerm> derivative() const {
        std::vector<PowLogTerm> out;
        if (C * p != 0.0) out.push_back({C * p, p - 1.0, g});
        if (C * g != 0.0) out.push_back({C * g, p - 1.0, g - 1.0});
        return out;
    }
};

// \int_A^B x^p (log x)^g dx for A >= 1 (B may be +inf when p < -1).
// Handled cases: g == 0 (pure power); p == -1 (closed); p < -1, g > -1
// (incomplete gamma after t = log x).
inline double powlog_integral(double p, double g, double A, double B) {
    const double inf = std::numeric_limits<double>::infinity();
    if (g == 0.0) {
        if (p == -1.0) return std::log(B) - std::log(A);
        const double q = p + 1.0;
        const double hiv = (B == inf) ? (q < 0 ? 0.0 : inf) : std::pow(B, q);
        return (hiv - std::pow(A, q)) / q;
    }
    if (p == -1.0) {
        const double q = g + 1.0;
        const double la = std::log(A), lb = (B == inf) ? inf : std::log(B);
        if (B == inf) {
            if (q < 0) return -std::pow(la, q) / q;
            throw std::invalid_argument("powlog_integral: divergent");
        }
        return (std::pow(lb, q) - std::pow(la, q)) / q;
    }
    if (p < -1.0 && g > -1.0 && A >= 1.0) {
        const double s = -(p + 1.0); // > 0
        const double ta = std::log(A);
        const double scale = std::pow(s, -(g + 1.0));
        const double top = upper_gamma(g + 1.0, s * ta);
        const double bot = (B == inf) ? 0.0 : upper_gamma(g + 1.0, s * std::log(B));
        return scale * (top - bot);
    }
    throw std::invalid_argument("powlog_integral: unsupported exponent combination");
}

// Euler-Maclaurin tail sum_{k >= K} t(k) for a smooth eventually-monotone
// PowLog term with p < -1 (or decaying fast enough). K should be >= 2 when
// g != 0 so log k > 0.
inline double powlog_tail_sum(const PowLogTerm& t, double K) {
    // exact head out to k = 256 keeps the truncated Euler-Maclaurin remainder
    // (next term ~ f^(5)/30240) far below 1e-13 relative for every tail family
    double head = 0.0;
    double k0 = std::ceil(K);
    const double kcut = std::fmax(k0, 256.0);
    for (; k0 < kcut; k0 += 1.0) head += t.eval(k0);
    const double inf = std::numeric_limits<double>::infinity();
    double v = t.C * powlog_integral(t.p, t.g, k0, inf);
    v += 0.5 * t.eval(k0);
    // -B_2/2! f'(k0) = -f'(k0)/12
    for (const auto& d1 : t.derivative()) {
        v -= d1.eval(k0) / 12.0;
        // +f'''(k0)/720
        for (const auto& d2 : d1.derivative())
            for (const auto& d3 : d2.derivative())
                v += d3.eval(k0) / 720.0;
    }
    return head + v;
}

// sum_{k=K}^{n} t(k) for finite n via EM between integer endpoints.
inline double powlog_range_sum(const PowLogTerm& t, double K, double n) {
    if (n < K) return 0.0;
    double v = t.C * powlog_integral(t.p, t.g, K, n);
    v += 0.5 * (t.eval(K) + t.eval(n));
    for (const auto& d1 : t.derivative()) {
        v += (d1.eval(n) - d1.eval(K)) / 12.0;
        for (const auto& d2 : d1.derivative())
            for (const auto& d3 : d2.derivative())
                v -= (d3.eval(n) - d3.eval(K)) / 720.0;
    }
    return v;
}

// Hurwitz-style tail sum_{k>=K} k^{-s}, s > 1: exact prefix to a comfortable
// cutoff then Euler-Maclaurin.
inline double zeta_tail(double s, double K) {
    if (!(s > 1.0)) throw std::invalid_argument("zeta_tail needs s > 1");
    if (K < 1.0) K = 1.0;
    double acc = 0.0;
    double k = K;
    const double kcut = std::fmax(K, 256.0);
    for (; k < kcut; ++k) acc += std::pow(k, -s);
    // EM from k on: integral + k^{-s}/2 + s k^{-s-1}/12 - s(s+1)(s+2) k^{-s-3}/720
    const double ks = std::pow(k, -s);
    acc += std::pow(k, 1.0 - s) / (s - 1.0) + 0.5 * ks + s * ks / k / 12.0
         - s * (s + 1.0) * (s + 2.0) * ks / (k * k * k) / 720.0;
    return acc;
}

// ---------------------------------------------------------------------------
// The boundary-classification integrals on (0, infinity):
//   big_I(alpha)        = \int_0^inf log(1+u) u^{-alpha-1} du = pi/(alpha sin(pi alpha))
//   i_alpha(alpha, a)   = \int_0^inf (1-(1+u)^{1-a}) u^{-alpha-1} du        (a > 1)
//   j_alpha(alpha, a)   = \int_0^inf ((1+u)^{1-a}-1) u^{-alpha-1} du  (1-alpha < a < 1)
// Each is split at u = 1; both pieces get a power substitution that removes the
// endpoint singularity.

inline double big_I(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("big_I: alpha in (0,1)");
    return pi / (alpha * std::sin(pi * alpha));
}

namespace detail {

// \int_0^inf h(u) u^{-alpha-1} du where h(u)/u -> h'(0) at 0 and |h(u)| grows
// slower than u^{alpha} at infinity; decay_exp gives the power p with
// h(1/v) v^{alpha-1} ~ v^{alpha-1-?}: we pass the explicit singularity
// exponents for the two transformed pieces.
template <class H>
double frag_integral(const H& h, double alpha, double sing_at_inf, double rel_tol) {
    // piece 1: u in (0,1]; integrand h(u) u^{-alpha-1} ~ u^{-alpha} near 0
    auto f1 = [&](double u) { return h(u) * std::pow(u, -alpha - 1.0); };
    auto r1 = efc::quad::integrate_power_singular_at_zero(f1, 1.0, alpha, rel_tol);
    // piece 2: u = 1/v, v in (0,1]; integrand h(1/v) v^{alpha-1}
    auto f2 = [&](double v) { return h(1.0 / v) * std::pow(v, alpha - 1.0); };
    auto r2 = efc::quad::integrate_power_singular_at_zero(f2, 1.0, sing_at_inf, rel_tol);
    return r1.value + r2.value;
}

} // namespace detail

// Quadrature route for big_I (the closed form above is the production value;
// this exists for cross-validation).
inline double big_I_quad(double alpha, double rel_tol = 1e-12) {
    auto h = [](double u) { return std::log1p(u); };
    // at infinity: log(1+1/v) v^{alpha-1} ~ log(1/v) v^{alpha-1}: exponent 1-alpha
    return detail::frag_integral(h, alpha, 1.0 - alpha, rel_tol);
}

inline double i_alpha(double alpha, double a, double rel_tol = 1e-12) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("i_alpha: alpha in (0,1)");
    if (!(a > 1.0)) throw std::invalid_argument("i_alpha: a > 1");
    auto h = [a](double u) { return -std::expm1((1.0 - a) * std::log1p(u)); };
    // at infinity h -> 1: exponent of v^{alpha-1} piece is 1-alpha
    return detail::frag_integral(h, alpha, 1.0 - alpha, rel_tol);
}

inline double j_alpha(double alpha, double a, double rel_tol = 1e-12) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("j_alpha: alpha in (0,1)");
    if (!(a > 1.0 - alpha && a < 1.0)) throw std::invalid_argument("j_alpha: a in (1-alpha,1)");
    auto h = [a](double u) { return std::expm1((1.0 - a) * std::log1p(u)); };
    // at infinity h ~ u^{1-a}: piece behaves like v^{a+alpha-2}: exponent 2-a-alpha in (0,1)
    return detail::frag_integral(h, alpha, 2.0 - a - alpha, rel_tol);
}

// ---------------------------------------------------------------------------
// Binomial pmf window sweep.  Calls visit(k, pmf) for every k in
// [kmin, kmax] carrying non-negligible Binomial(n, x) mass, walking outward
// from the mode so underflow never hides the bulk.  Returns the visited mass.
template <class Visit>
double binom_pmf_window(double n, double x, long kmin, long kmax, const Visit& visit,
                        double rel_cutoff = 1e-19) {
    if (kmax > static_cast<long>(n)) kmax = static_cast<long>(n);
    if (kmin < 0) kmin = 0;
    if (kmin > kmax || x <= 0.0) return 0.0;
    if (x >= 1.0) {
        if (static_cast<long>(n) >= kmin && static_cast<long>(n) <= kmax) {
            visit(static_cast<long>(n), 1.0);
            return 1.0;
        }
        return 0.0;
    }
    long mode = static_cast<long>(std::floor((n + 1.0) * x));
    if (mode < kmin) mode = kmin;
    if (mode > kmax) mode = kmax;
    const double lx = std::log(x), l1mx = std::log1p(-x);
    const double lp_mode = log_choose(n, static_cast<double>(mode))
                         + mode * lx + (n - mode) * l1mx;
    const double pm = std::exp(lp_mode);
    if (pm <= 0.0) return 0.0; // whole window is below double range
    const double cutoff = pm * rel_cutoff;
    double mass = pm;
    visit(mode, pm);
    // upward
    double p = pm;
    for (long k = mode + 1; k <= kmax; ++k) {
        p *= (n - k + 1.0) / static_cast<double>(k) * (x / (1.0 - x));
        if (p < cutoff) break;
        visit(k, p);
        mass += p;
    }
    // downward
    p = pm;
    for (long k = mode - 1; k >= kmin; --k) {
        p *= (k + 1.0) / (n - k) * ((1.0 - x) / x);
        if (p < cutoff) break;
        visit(k, p);
        mass += p;
    }
    return mass;
}

} // namespace efc::sf
