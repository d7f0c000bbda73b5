#pragma once

// Model inputs: the coagulation measure Lambda on [0,1) (Kingman atom at 0,
// point atoms in (0,1), an absolutely-continuous family) and the splitting
// measure mu on {1,2,...} (explicit head plus an analytic tail family).
// Everything downstream (rate functionals, Lyapunov machinery, simulator)
// consumes these two structs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "efc/quadrature.hpp"
#include "efc/rng.hpp"
#include "efc/special.hpp"

namespace efc {

// Certified enclosure [lo, hi] used wherever a test against a threshold has
// to survive truncation error.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double mid() const { return 0.5 * (lo + hi); }
    double width() const { return hi - lo; }
    Interval operator+(const Interval& o) const { return {lo + o.lo, hi + o.hi}; }
    Interval& operator+=(const Interval& o) { lo += o.lo; hi += o.hi; return *this; }
    Interval scaled(double c) const { return c >= 0 ? Interval{c * lo, c * hi} : Interval{c * hi, c * lo}; }
};

namespace measures {

struct Atom {
    double x = 0.0; // position in (0,1)
    double w = 0.0; // Lambda mass
};

enum class DensityFamily { None, Uniform, Power, LogSingular, CustomTable };

// Absolutely continuous part of Lambda:
//   Uniform:      f(x) = c                     on (0,1)
//   Power:        f(x) = c x^{-beta}           on (0,1),  beta in [0,1)
//   LogSingular:  f(x) = c (log(x0/x))^gamma   on (0,x0), gamma >= 0
//   CustomTable:  piecewise-linear interpolant of user-supplied (x, f) rows
struct Density {
    DensityFamily family = DensityFamily::None;
    double c = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double x0 = 1.0;
    std::vector<double> xs; // CustomTable knots, strictly increasing, in [0,1]
    std::vector<double> fs; // CustomTable values, >= 0

    static Density custom_table(std::vector<double> x, std::vector<double> f) {
        Density d;
        d.family = DensityFamily::CustomTable;
        d.c = 1.0;
        d.xs = std::move(x);
        d.fs = std::move(f);
        d.validate();
        return d;
    }

    bool present() const {
        if (family == DensityFamily::CustomTable) return xs.size() >= 2;
        return family != DensityFamily::None && c > 0.0;
    }

    double lower() const {
        return family == DensityFamily::CustomTable && !xs.empty() ? xs.front() : 0.0;
    }

    double upper() const {
        if (family == DensityFamily::CustomTable) return xs.empty() ? 0.0 : xs.back();
        return family == DensityFamily::LogSingular ? x0 : 1.0;
    }

    // exponent p of the x^{-p} blow-up of f at 0 (log factors not counted)
    double sing_exponent() const {
        return family == DensityFamily::Power ? beta : 0.0;
    }

    double eval(double x) const {
        if (!present() || x <= 0.0 || x >= upper()) return 0.0;
        switch (family) {
            case DensityFamily::Uniform: return c;
            case DensityFamily::Power: return c * std::pow(x, -beta);
            case DensityFamily::LogSingular: {
                const double L = std::log(x0 / x);
                return gamma == 0.0 ? c : c * std::pow(L, gamma);
            }
            case DensityFamily::CustomTable: {
                if (x < xs.front()) return 0.0;
                const auto it = std::upper_bound(xs.begin(), xs.end(), x);
                const std::size_t j = static_cast<std::size_t>(it - xs.begin());
                if (j == 0) return fs.front();
                if (j >= xs.size()) return fs.back();
                const double t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
                return fs[j - 1] + t * (fs[j] - fs[j - 1]);
            }
            default: return 0.0;
        }
    }

    double mass() const {
        if (!present()) return 0.0;
        switch (family) {
            case DensityFamily::Uniform: return c;
            case DensityFamily::Power: return c / (1.0 - beta);
            case DensityFamily::LogSingular: return c * x0 * std::tgamma(gamma + 1.0);
            case DensityFamily::CustomTable: {
                double m = 0.0; // exact trapezoid: the interpolant is linear per cell
                for (std::size_t i = 0; i + 1 < xs.size(); ++i)
                    m += 0.5 * (fs[i] + fs[i + 1]) * (xs[i + 1] - xs[i]);
                return m;
            }
            default: return 0.0;
        }
    }

    void validate() const {
        if (family == DensityFamily::CustomTable) {
            if (xs.size() < 2 || xs.size() != fs.size())
                throw std::invalid_argument("custom table needs >= 2 matched (x, f) rows");
            if (!(xs.front() >= 0.0 && xs.back() <= 1.0))
                throw std::invalid_argument("custom table support must lie in [0,1]");
            for (std::size_t i = 0; i + 1 < xs.size(); ++i)
                if (!(xs[i] < xs[i + 1]))
                    throw std::invalid_argument("custom table x column must be strictly increasing");
            for (double v : fs)
                if (!(v >= 0.0))
                    throw std::invalid_argument("custom table density values must be >= 0");
            return;
        }
        if (!present()) return;
        if (family == DensityFamily::Power && !(beta >= 0.0 && beta < 1.0))
            throw std::invalid_argument("power density needs beta in [0,1)");
        if (family == DensityFamily::LogSingular &&
            !(gamma >= 0.0 && x0 > 0.0 && x0 <= 1.0))
            throw std::invalid_argument("log-singular density needs gamma >= 0, x0 in (0,1]");
    }
};

struct ValidationCheck {
    std::string name;
    bool ok = true;
    std::string detail;
};

struct ValidationReport {
    bool ok = true;
    std::vector<ValidationCheck> checks;
    void add(std::string name, bool pass, std::string detail = "") {
        ok = ok && pass;
        checks.push_back({std::move(name), pass, std::move(detail)});
    }
};

// Leading-order growth of the coagulation rate functional Phi:
//   Poly:    Phi(n) ~ d n^{1+beta}
//   LogPoly: Phi(n) ~ d n (log n)^beta
struct PhiGrowth {
    enum class Kind { None, Poly, LogPoly } kind = Kind::None;
    double d = 0.0;
    double beta = 0.0;
};

struct CoalescenceMeasure {
    double kingman = 0.0;     // Lambda({0})
    std::vector<Atom> atoms;  // positions strictly inside (0,1)
    Density density;

    void validate() const {
        if (kingman < 0.0) throw std::invalid_argument("kingman mass must be >= 0");
        for (const auto& a : atoms)
            if (!(a.x > 0.0 && a.x < 1.0) || a.w < 0.0)
                throw std::invalid_argument("atoms must sit in (0,1) with w >= 0");
        density.validate();
    }

    double lambda_mass() const {
        double m = kingman + density.mass();
        for (const auto& a : atoms) m += a.w;
        return m;
    }

    bool has_coagulation() const { return lambda_mass() > 0.0; }

    // \int g(x) f(x) dx over the density support, with the x->0 power
    // singularity of f removed by substitution.  g carries the kernel and the
    // x^{-2} factor; callers pass presplit points (e.g. 1/n) when the kernel
    // has interior structure.
    template <class G>
    double integrate_density(const G& g, double rel_tol = 1e-11,
                             std::vector<double> presplit = {}) const {
        if (!density.present()) return 0.0;
        const double up = density.upper();
        auto integrand = [&](double x) { return g(x) * density.eval(x); };
        if (density.family == DensityFamily::CustomTable) {
            // split at the interpolation knots: the integrand has kinks there
            for (double k : density.xs)
                if (k > 0.0 && k < up) presplit.push_back(k);
        }
        // geometric ladder toward 0 keeps the adaptive pass from missing the
        // (integrable) log blow-up of the LogSingular family
        for (double s = up * 1e-2; s > 1e-18; s *= 1e-2) presplit.push_back(s);
        return efc::quad::integrate_power_singular_at_zero(
                   integrand, up, density.sing_exponent(), rel_tol, 1e-300, 4000,
                   presplit)
            .value;
    }

    // \int g(x) x^{-2} Lambda(dx) over (0,1): atoms summed exactly, the density
    // part by adaptive quadrature.  The Kingman atom at 0 is excluded; its
    // contribution enters through binomial coefficients, so callers handle it.
    template <class G>
    double integrate_weighted(const G& g, double rel_tol = 1e-11,
                              std::vector<double> presplit = {}) const {
        double acc = 0.0;
        for (const auto& a : atoms) acc += a.w * g(a.x) / (a.x * a.x);
        if (density.present())
            acc += integrate_density([&](double x) { return g(x) / (x * x); },
                                     rel_tol, std::move(presplit));
        return acc;
    }

    PhiGrowth phi_growth() const {
        PhiGrowth g;
        if (kingman > 0.0) {
            g.kind = PhiGrowth::Kind::Poly;
            g.beta = 1.0;
            g.d = 0.5 * kingman;
            return g;
        }
        if (density.present()) {
            if (density.family == DensityFamily::Power && density.beta > 0.0) {
                g.kind = PhiGrowth::Kind::Poly;
                g.beta = density.beta;
                g.d = density.c * std::tgamma(1.0 - density.beta)
                    / (density.beta * (density.beta + 1.0));
                return g;
            }
            if (density.family == DensityFamily::CustomTable) {
                if (density.lower() <= 0.0 && density.fs.front() > 0.0) {
                    // positive density at 0 acts like the uniform family there
                    g.kind = PhiGrowth::Kind::LogPoly;
                    g.beta = 1.0;
                    g.d = density.fs.front();
                    return g;
                }
                g.kind = PhiGrowth::Kind::Poly;
                g.beta = 0.0;
                g.d = integrate_density([](double x) { return 1.0 / x; });
                for (const auto& a : atoms) g.d += a.w / a.x;
                return g;
            }
            // Uniform and Power(beta = 0) behave like LogSingular(gamma = 0)
            const double gam =
                density.family == DensityFamily::LogSingular ? density.gamma : 0.0;
            g.kind = PhiGrowth::Kind::LogPoly;
            g.beta = gam + 1.0;
            g.d = density.c / (gam + 1.0);
            return g;
        }
        if (!atoms.empty()) {
            g.kind = PhiGrowth::Kind::Poly;
            g.beta = 0.0;
            for (const auto& a : atoms) g.d += a.w / a.x;
            return g;
        }
        return g;
    }
};

// Soft counterpart of CoalescenceMeasure::validate(): every check becomes a
// report entry (quadrature trouble included) instead of an exception, so a
// CLI can print the whole list.
inline ValidationReport validate_coalescence(const CoalescenceMeasure& lam) {
    ValidationReport r;
    bool structural = lam.kingman >= 0.0;
    std::string why = structural ? "" : "negative Kingman mass";
    for (const auto& a : lam.atoms)
        if (!(a.x > 0.0 && a.x < 1.0) || a.w < 0.0) {
            structural = false;
            why = "atom outside (0,1) or with negative weight";
        }
    r.add("atoms_inside_open_interval", structural, why);
    try {
        lam.density.validate();
        r.add("density_parameters", true);
    } catch (const std::exception& e) {
        r.add("density_parameters", false, e.what());
        return r; // the probes below would evaluate a malformed density
    }

    const double m = lam.lambda_mass();
    r.add("finite_total_mass", std::isfinite(m) && m >= 0.0,
          "Lambda[0,1) = " + std::to_string(m));

    if (lam.density.present()) {
        bool nonneg = true;
        double bad_x = 0.0;
        const double up = lam.density.upper();
        const double lo = std::fmax(lam.density.lower(), up * 1e-16);
        for (int i = 0; i <= 200 && nonneg; ++i) {
            const double x =
                std::fmin(lo * std::pow(up / lo, i / 200.0), up * (1.0 - 1e-12));
            if (lam.density.eval(x) < 0.0) {
                nonneg = false;
                bad_x = x;
            }
        }
        r.add("density_nonnegative_on_probe_grid", nonneg,
              nonneg ? "" : "f(" + std::to_string(bad_x) + ") < 0");
        try {
            const double pair = lam.integrate_weighted([](double x) { return x * x; });
            r.add("weighted_integral_quadrature", std::isfinite(pair),
                  "density/atom mass via x^{-2} weight = " + std::to_string(pair));
        } catch (const std::exception& e) {
            r.add("weighted_integral_quadrature", false, e.what());
        }
    }
    return r;
}

// ---------------------------------------------------------------------------

enum class TailFamily { None, Power, Log, Geometric };

// Leading-order growth of ell(n) = sum_{k<=n} k mu(k) + n mu_bar(n+1):
//   Finite: ell -> coef (the mean)
//   Poly:   ell(n) ~ coef n^{expo}
//   LogPow: ell(n) ~ coef (log n)^{expo}
struct EllGrowth {
    enum class Kind { Zero, Finite, Poly, LogPow } kind = Kind::Zero;
    double coef = 0.0;
    double expo = 0.0;
};

class SplittingMeasure {
public:
    SplittingMeasure() = default;

    static SplittingMeasure from_pmf(std::vector<double> head) {
        SplittingMeasure m;
        m.head_ = std::move(head);
        for (double v : m.head_)
            if (v < 0.0) throw std::invalid_argument("pmf entries must be >= 0");
        m.tail_ = TailFamily::None;
        m.finish();
        return m;
    }

    // mu(k) = b k^{-1-alpha} for k >= 1; alpha in (0,1) gives infinite mean
    static SplittingMeasure power_tail(double b, double alpha) {
        if (!(b > 0.0 && alpha > 0.0))
            throw std::invalid_argument("power tail needs b > 0, alpha > 0");
        SplittingMeasure m;
        m.tail_ = TailFamily::Power;
        m.b_ = b;
        m.alpha_ = alpha;
        m.finish();
        return m;
    }

    // mu(k) = b (log k)^alpha k^{-2} for k >= 2 (so mu(1) = 0)
    static SplittingMeasure log_tail(double b, double alpha) {
        if (!(b > 0.0 && alpha > 0.0))
            throw std::invalid_argument("log tail needs b > 0, alpha > 0");
        SplittingMeasure m;
        m.tail_ = TailFamily::Log;
        m.b_ = b;
        m.alpha_ = alpha;
        m.finish();
        return m;
    }

    // mu(k) = A r^k for k >= 1, 0 < r < 1 (finite mean)
    static SplittingMeasure geometric(double A, double r) {
        if (!(A > 0.0 && r > 0.0 && r < 1.0))
            throw std::invalid_argument("geometric tail needs A > 0, r in (0,1)");
        SplittingMeasure m;
        m.tail_ = TailFamily::Geometric;
        m.b_ = A;
        m.r_ = r;
        m.finish();
        return m;
    }

    TailFamily tail() const { return tail_; }
    double tail_b() const { return b_; }
    double tail_alpha() const { return alpha_; }
    double tail_r() const { return r_; }
    long head_end() const { return static_cast<long>(head_.size()); }

    double pmf_at(long k) const {
        if (k < 1) return 0.0;
        if (k <= head_end()) return head_[static_cast<std::size_t>(k - 1)];
        return tail_pmf(k);
    }

    double mass() const { return mass_; }
    bool trivial() const { return mass_ <= 0.0; }

    bool mean_finite() const {
        return tail_ == TailFamily::None || tail_ == TailFamily::Geometric ||
               (tail_ == TailFamily::Power && alpha_ > 1.0);
    }

    double mean() const {
        if (!mean_finite()) return std::numeric_limits<double>::infinity();
        return mean_;
    }

    // mu_bar(k) = sum_{j >= ceil(k)} mu(j); point value via Euler-Maclaurin on
    // the analytic tail (the certified two-sided bracket lives in mu_bar_encl).
    // Takes double so cutoffs far beyond the range of long stay well defined.
    double mu_bar(double k) const {
        k = std::fmax(std::ceil(k), 1.0);
        if (k <= static_cast<double>(cache_end_))
            return suffix_mu_[static_cast<std::size_t>(k)] +
                   tail_bar_point(static_cast<double>(cache_end_ + 1));
        return tail_bar_point(k);
    }

    Interval mu_bar_encl(double k) const {
        k = std::fmax(std::ceil(k), 1.0);
        if (k <= static_cast<double>(cache_end_)) {
            const Interval tail = tail_bar_encl(static_cast<double>(cache_end_ + 1));
            const double s = suffix_mu_[static_cast<std::size_t>(k)];
            return {s + tail.lo, s + tail.hi};
        }
        return tail_bar_encl(k);
    }

    // ell(n) = sum_{k<=n} k mu(k) + n mu_bar(n+1)
    double ell(double n) const {
        const long nn = static_cast<long>(n);
        if (nn < 1) return 0.0;
        double head;
        const long H = cache_end_;
        if (nn <= H) {
            head = cum_kmu_[static_cast<std::size_t>(nn)];
        } else {
            head = cum_kmu_[static_cast<std::size_t>(H)] + tail_kmu_range(H + 1, nn);
        }
        return head + n * mu_bar(nn + 1);
    }

    EllGrowth ell_growth() const {
        EllGrowth g;
        if (trivial()) return g;
        switch (tail_) {
            case TailFamily::Power:
                if (alpha_ > 1.0) {  // mean finite, ell levels off
                    g.kind = EllGrowth::Kind::Finite;
                    g.coef = mean_;
                    return g;
                }
                if (alpha_ == 1.0) {  // sum k * b k^{-2} ~ b log n
                    g.kind = EllGrowth::Kind::LogPow;
                    g.coef = b_;
                    g.expo = 1.0;
                    return g;
                }
                g.kind = EllGrowth::Kind::Poly;
                g.coef = b_ / (alpha_ * (1.0 - alpha_));
                g.expo = 1.0 - alpha_;
                return g;
            case TailFamily::Log:
                g.kind = EllGrowth::Kind::LogPow;
                g.coef = b_ / (alpha_ + 1.0);
                g.expo = alpha_ + 1.0;
                return g;
            default:
                g.kind = EllGrowth::Kind::Finite;
                g.coef = mean_;
                return g;
        }
    }

    // largest k with positive mass when the support is finite, else 0
    long support_end() const {
        if (tail_ != TailFamily::None) return 0;
        for (long k = head_end(); k >= 1; --k)
            if (head_[static_cast<std::size_t>(k - 1)] > 0.0) return k;
        return 0;
    }

private:
    double tail_pmf(long k) const {
        const double kk = static_cast<double>(k);
        switch (tail_) {
            case TailFamily::Power: return b_ * std::pow(kk, -1.0 - alpha_);
            case TailFamily::Log:
                return k >= 2 ? b_ * std::pow(std::log(kk), alpha_) / (kk * kk) : 0.0;
            case TailFamily::Geometric: return b_ * std::pow(r_, kk);
            default: return 0.0;
        }
    }

    // Euler-Maclaurin point value of sum_{j>=k} tail_pmf(j), k > head_end
    double tail_bar_point(double kk) const {
        switch (tail_) {
            case TailFamily::Power:
                return sf::powlog_tail_sum({b_, -1.0 - alpha_, 0.0}, kk);
            case TailFamily::Log:
                return sf::powlog_tail_sum({b_, -2.0, alpha_}, std::fmax(kk, 2.0));
            case TailFamily::Geometric:
                return b_ * std::pow(r_, kk) / (1.0 - r_);
            default:
                return 0.0;
        }
    }

    // enclosure of sum_{j>=kk} tail_pmf(j), valid for kk > head_end
    Interval tail_bar_encl(double kk) const {
        switch (tail_) {
            case TailFamily::Power: {
                // integrand convex decreasing: integral bracketing is rigorous
                const double lo = (b_ / alpha_) * std::pow(kk, -alpha_);
                const double hi = (b_ / alpha_) * std::pow(kk - 0.5, -alpha_);
                return {lo, hi};
            }
            case TailFamily::Log: {
                const double klo = std::fmax(kk, 2.0);
                const double lo = b_ * sf::powlog_integral(-2.0, alpha_, klo, std::numeric_limits<double>::infinity());
                const double hi = b_ * sf::powlog_integral(-2.0, alpha_, std::fmax(kk - 0.5, 2.0), std::numeric_limits<double>::infinity());
                return {lo, hi};
            }
            case TailFamily::Geometric: {
                const double v = b_ * std::pow(r_, kk) / (1.0 - r_);
                return {v, v};
            }
            default:
                return {0.0, 0.0};
        }
    }

    // sum_{k=K}^{n} k tail_pmf(k), K > head_end
    double tail_kmu_range(long K, long n) const {
        if (n < K) return 0.0;
        switch (tail_) {
            case TailFamily::Power:
                return sf::powlog_range_sum({b_, -alpha_, 0.0},
                                            static_cast<double>(K), static_cast<double>(n));
            case TailFamily::Log:
                return sf::powlog_range_sum({b_, -1.0, alpha_},
                                            static_cast<double>(std::max(K, 2L)), static_cast<double>(n));
            case TailFamily::Geometric: {
                double acc = 0.0, t = b_ * std::pow(r_, static_cast<double>(K));
                for (long k = K; k <= n; ++k) {
                    acc += static_cast<double>(k) * t;
                    t *= r_;
                    if (t * static_cast<double>(n) < 1e-18 * acc) break;
                }
                return acc;
            }
            default:
                return 0.0;
        }
    }

    void finish() {
        const long H = tail_ == TailFamily::None
                           ? head_end()
                           : exact_head_horizon(head_end());
        cache_end_ = H;
        cum_kmu_.assign(static_cast<std::size_t>(H) + 1, 0.0);
        suffix_mu_.assign(static_cast<std::size_t>(H) + 2, 0.0);
        long double acc = 0.0L;
        for (long k = 1; k <= H; ++k) {
            acc += static_cast<long double>(k) * pmf_raw(k);
            cum_kmu_[static_cast<std::size_t>(k)] = static_cast<double>(acc);
        }
        long double suf = 0.0L;
        for (long k = H; k >= 1; --k) {
            suf += pmf_raw(k);
            suffix_mu_[static_cast<std::size_t>(k)] = static_cast<double>(suf);
        }
        mass_ = suffix_mu_[1] + tail_bar_point(H + 1);
        if (mean_finite()) {
            mean_ = cum_kmu_[static_cast<std::size_t>(H)];
            if (tail_ == TailFamily::Geometric) {
                // sum_{k>H} k A r^k done by direct summation at build time
                double t = b_ * std::pow(r_, static_cast<double>(H + 1));
                for (long k = H + 1; ; ++k) {
                    const double term = static_cast<double>(k) * t;
                    mean_ += term;
                    t *= r_;
                    if (term < 1e-18 * mean_ || term == 0.0) break;
                }
            } else if (tail_ == TailFamily::Power && alpha_ > 1.0) {
                // sum_{k>H} k * b k^{-1-alpha} = b * zeta_tail(alpha, H+1)
                mean_ += b_ * sf::zeta_tail(alpha_, static_cast<double>(H + 1));
            }
        }
    }

    double pmf_raw(long k) const {
        if (k <= head_end()) return head_[static_cast<std::size_t>(k - 1)];
        return tail_pmf(k);
    }

    static long exact_head_horizon(long head) { // exact summation range for analytic tails
        return std::max<long>(head, 1L << 16);
    }

    std::vector<double> head_;
    TailFamily tail_ = TailFamily::None;
    double b_ = 0.0, alpha_ = 0.0, r_ = 0.0;

    long cache_end_ = 0;
    std::vector<double> cum_kmu_;   // cum_kmu_[k] = sum_{j<=k} j mu(j)
    std::vector<double> suffix_mu_; // suffix_mu_[k] = sum_{j=k}^{cache_end} mu(j)
    double mass_ = 0.0;
    double mean_ = 0.0;
};

inline ValidationReport validate_splitting(const SplittingMeasure& mu) {
    ValidationReport r;
    const double m = mu.mass();
    r.add("finite_total_mass", std::isfinite(m) && m >= 0.0,
          "mu(N) = " + std::to_string(m));
    r.add("mean", true,
          mu.mean_finite() ? "mean = " + std::to_string(mu.mean()) : "mean = +inf");
    return r;
}

// ---------------------------------------------------------------------------
// Alias-table sampler for mu with an aggregated tail bucket at k >= cut.
// Drawing the bucket means the jump size is at least `cut`; the simulator
// picks cut = ceiling + 1 so such jumps always cross the ceiling.

class JumpSampler {
public:
    static JumpSampler build(const SplittingMeasure& mu, long cut) {
        if (cut < 2) throw std::invalid_argument("JumpSampler: cut >= 2");
        JumpSampler s;
        s.cut_ = cut;
        const std::size_t m = static_cast<std::size_t>(cut); // k=1..cut-1 plus bucket
        std::vector<double> w(m, 0.0);
        for (long k = 1; k < cut; ++k) w[static_cast<std::size_t>(k - 1)] = mu.pmf_at(k);
        w[m - 1] = mu.mu_bar(cut);
        s.tail_prob_ = w[m - 1];
        double total = 0.0;
        for (double v : w) total += v;
        s.mass_ = total;
        s.prob_.assign(m, 0.0);
        s.alias_.assign(m, 0);
        if (total <= 0.0) return s;
        // Vose construction
        std::vector<std::uint32_t> small, large;
        std::vector<double> scaled(m);
        for (std::size_t i = 0; i < m; ++i) {
            scaled[i] = w[i] * static_cast<double>(m) / total;
            (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
        }
        while (!small.empty() && !large.empty()) {
            const std::uint32_t s_i = small.back(); small.pop_back();
            const std::uint32_t l_i = large.back(); large.pop_back();
            s.prob_[s_i] = scaled[s_i];
            s.alias_[s_i] = l_i;
            scaled[l_i] = (scaled[l_i] + scaled[s_i]) - 1.0;
            (scaled[l_i] < 1.0 ? small : large).push_back(l_i);
        }
        for (std::uint32_t i : large) s.prob_[i] = 1.0;
        for (std::uint32_t i : small) s.prob_[i] = 1.0;
        return s;
    }

    double mass() const { return mass_; }
    double tail_prob() const { return tail_prob_; }
    long cut() const { return cut_; }

    // returns the jump size; tail_bucket = true means "some k >= cut"
    long sample(rng::Rng& g, bool& tail_bucket) const {
        const std::size_t m = prob_.size();
        const std::size_t i = std::min<std::size_t>(
            static_cast<std::size_t>(g.uniform01() * static_cast<double>(m)), m - 1);
        const std::size_t j = g.uniform01() < prob_[i] ? i : alias_[i];
        if (j == m - 1) {
            tail_bucket = true;
            return cut_;
        }
        tail_bucket = false;
        return static_cast<long>(j) + 1;
    }

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
    long cut_ = 0;
    double mass_ = 0.0;
    double tail_prob_ = 0.0;
};

} // namespace measures
} // namespace efc
