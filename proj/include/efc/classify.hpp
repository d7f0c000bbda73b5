#pragma once
// Boundary classification for the block-counting chain of a simple
// exchangeable fragmentation-coalescence process.
//
// The state space is {1, 2, ...} with an added boundary point "infinity".
// Two independent questions decide the boundary type:
//   * explodes   — can the chain, started from a finite state, reach
//                  infinity in finite time?
//   * comes_down — can the chain, started at infinity, enter the finite
//                  states (come down from infinity)?
// The label is derived from the two axes and never asserted directly:
//   Exit = (Yes, No), Entrance = (No, Yes), Regular = (Yes, Yes),
//   NeitherAccessibleNorLeavable = (No, No).  "Critical" marks parameter
//   lines on which the classification is genuinely open; anything else
//   undecided is Unknown.
//
// Two entry points:
//   * classify_sufficient(lam, mu): rate-functional tests on the concrete
//     measure pair — vanishing ratio Phi/(n ell) with an integrable growth
//     floor (exit), summable series sum_n n mu_bar(n)/Phi(n) (non-explosion,
//     entrance when sum_n 1/Phi(n) also converges), bounded ratio
//     rho = limsup Phi/(n ell) (explosion when rho < 1/2, exit when
//     rho <= 1/4), and the theta bracket (coming down versus staying
//     infinite).
//   * classify_regular(spec): closed-form phase diagram for regularly
//     varying pairs; exact thresholds, including the open critical lines.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "efc/ga.hpp"
#include "efc/measures.hpp"
#include "efc/rates.hpp"

namespace efc::classify {

using measures::CoalescenceMeasure;
using measures::EllGrowth;
using measures::PhiGrowth;
using measures::SplittingMeasure;

enum class Ternary { Yes, No, Unknown };
enum class Label {
    Exit,
    Entrance,
    Regular,
    NeitherAccessibleNorLeavable,
    Critical,
    Unknown
};

inline const char* to_string(Ternary t) {
    switch (t) {
        case Ternary::Yes: return "yes";
        case Ternary::No: return "no";
        default: return "unknown";
    }
}

inline const char* to_string(Label l) {
    switch (l) {
        case Label::Exit: return "exit";
        case Label::Entrance: return "entrance";
        case Label::Regular: return "regular";
        case Label::NeitherAccessibleNorLeavable:
            return "neither_accessible_nor_leavable";
        case Label::Critical: return "critical";
        default: return "unknown";
    }
}

struct FiredRule {
    std::string id;      // stable machine-readable rule identifier
    std::string params;  // human-readable parameter trail
};

struct BoundaryVerdict {
    Ternary explodes = Ternary::Unknown;
    Ternary comes_down = Ternary::Unknown;
    Label label = Label::Unknown;
    std::vector<FiredRule> fired;
    std::vector<std::string> notes;
};

// Label from the two axes; Critical is assigned only by the phase-diagram
// classifier on its open lines, never here.
inline Label derive_label(Ternary explodes, Ternary comes_down) {
    if (explodes == Ternary::Yes && comes_down == Ternary::No) return Label::Exit;
    if (explodes == Ternary::No && comes_down == Ternary::Yes) return Label::Entrance;
    if (explodes == Ternary::Yes && comes_down == Ternary::Yes) return Label::Regular;
    if (explodes == Ternary::No && comes_down == Ternary::No)
        return Label::NeitherAccessibleNorLeavable;
    return Label::Unknown;
}

// ---------------------------------------------------------------------------
// Series checks.
// ---------------------------------------------------------------------------

enum class SeriesVerdict { Converges, Diverges, Unknown };

inline const char* to_string(SeriesVerdict v) {
    switch (v) {
        case SeriesVerdict::Converges: return "converges";
        case SeriesVerdict::Diverges: return "diverges";
        default: return "unknown";
    }
}

struct SeriesCheck {
    SeriesVerdict verdict = SeriesVerdict::Unknown;
    std::string why;
    double model_ratio = std::numeric_limits<double>::quiet_NaN();
    double n_checked = 0.0;
};

namespace detail {

using ga::detail::fmt;

// Growth-model sanity: value/model at the top of the window must sit in
// [0.25, 4]; asymptotic statements are only trusted once this holds.
inline bool ratio_sane(double ratio) { return ratio > 0.25 && ratio < 4.0; }

inline double phi_model_at(const PhiGrowth& pg, double n) {
    switch (pg.kind) {
        case PhiGrowth::Kind::Poly: return pg.d * std::pow(n, 1.0 + pg.beta);
        case PhiGrowth::Kind::LogPoly:
            return pg.d * n * std::pow(std::log(n), pg.beta);
        default: return 0.0;
    }
}

inline double ell_model_at(const EllGrowth& eg, double n) {
    switch (eg.kind) {
        case EllGrowth::Kind::Finite: return eg.coef;
        case EllGrowth::Kind::Poly: return eg.coef * std::pow(n, eg.expo);
        case EllGrowth::Kind::LogPow:
            return eg.coef * std::pow(std::log(n), eg.expo);
        default: return 0.0;
    }
}

inline std::string phi_model_text(const PhiGrowth& pg) {
    switch (pg.kind) {
        case PhiGrowth::Kind::Poly:
            return "Phi(n) ~ " + fmt(pg.d) + " n^" + fmt(1.0 + pg.beta);
        case PhiGrowth::Kind::LogPoly:
            return "Phi(n) ~ " + fmt(pg.d) + " n (log n)^" + fmt(pg.beta);
        default: return "Phi = 0";
    }
}

inline std::string ell_model_text(const EllGrowth& eg) {
    switch (eg.kind) {
        case EllGrowth::Kind::Finite: return "ell(n) -> " + fmt(eg.coef);
        case EllGrowth::Kind::Poly:
            return "ell(n) ~ " + fmt(eg.coef) + " n^" + fmt(eg.expo);
        case EllGrowth::Kind::LogPow:
            return "ell(n) ~ " + fmt(eg.coef) + " (log n)^" + fmt(eg.expo);
        default: return "ell = 0";
    }
}

}  // namespace detail

// Does sum_n 1/Phi(n) converge?  Decides whether a pure coalescent comes
// down from infinity, and is one half of the entrance test.
inline SeriesCheck check_schweinsberg(const CoalescenceMeasure& lam,
                                      double n_top = 1e6) {
    SeriesCheck out;
    const PhiGrowth pg = lam.phi_growth();
    if (pg.kind == PhiGrowth::Kind::None) {
        out.verdict = SeriesVerdict::Diverges;
        out.why = "no coagulation: Phi = 0 and the series has no finite terms";
        return out;
    }
    const double model = detail::phi_model_at(pg, n_top);
    out.model_ratio = rates::phi(lam, n_top) / model;
    out.n_checked = n_top;
    if (!detail::ratio_sane(out.model_ratio)) {
        out.why = "growth model " + detail::phi_model_text(pg) +
                  " not confirmed at n = " + detail::fmt(n_top) + " (ratio " +
                  detail::fmt(out.model_ratio) + ")";
        return out;
    }
    const bool converges = pg.kind == PhiGrowth::Kind::Poly ? pg.beta > 0.0
                                                            : pg.beta > 1.0;
    out.verdict = converges ? SeriesVerdict::Converges : SeriesVerdict::Diverges;
    out.why = detail::phi_model_text(pg) + (converges
        ? ": sum_n 1/Phi(n) converges by tail comparison"
        : ": sum_n 1/Phi(n) diverges by tail comparison");
    out.why += "; model verified at n = " + detail::fmt(n_top) + " (ratio " +
               detail::fmt(out.model_ratio) + ")";
    return out;
}

// Does the pure branching chain with split measure mu explode?  Equivalent
// to convergence of sum_n 1/(n ell(n)).
inline SeriesCheck check_doney(const SplittingMeasure& mu, double n_top = 1e6) {
    SeriesCheck out;
    if (mu.trivial()) {
        out.verdict = SeriesVerdict::Diverges;
        out.why = "no splitting: the chain never moves up";
        return out;
    }
    const EllGrowth eg = mu.ell_growth();
    if (eg.kind == EllGrowth::Kind::Finite) {
        // ell(n) <= mean exactly, so the series dominates a harmonic tail
        out.verdict = SeriesVerdict::Diverges;
        out.why = "ell(n) <= " + detail::fmt(eg.coef) +
                  " (finite mean): sum_n 1/(n ell(n)) diverges";
        return out;
    }
    const double model = detail::ell_model_at(eg, n_top);
    out.model_ratio = mu.ell(n_top) / model;
    out.n_checked = n_top;
    if (!detail::ratio_sane(out.model_ratio)) {
        out.why = "growth model " + detail::ell_model_text(eg) +
                  " not confirmed at n = " + detail::fmt(n_top);
        return out;
    }
    const bool converges =
        eg.kind == EllGrowth::Kind::Poly ? eg.expo > 0.0 : eg.expo > 1.0;
    out.verdict = converges ? SeriesVerdict::Converges : SeriesVerdict::Diverges;
    out.why = detail::ell_model_text(eg) + (converges
        ? ": sum_n 1/(n ell(n)) converges (branching chain explodes)"
        : ": sum_n 1/(n ell(n)) diverges (branching chain does not explode)");
    out.why += "; model verified at n = " + detail::fmt(n_top) + " (ratio " +
               detail::fmt(out.model_ratio) + ")";
    return out;
}

// ---------------------------------------------------------------------------
// Growth-floor condition on ell: there must be an eventually non-decreasing
// g with int^inf dx/(x g(x)) < infinity and ell(n) >= g(log n) log n for all
// large n.  For the parametric ell models the answer is a dichotomy: if the
// natural candidate g(x) = ell-model(e^x)/(2x) fails the integral test, so
// does every admissible floor (any g below ell-model(e^x)/x inherits a
// divergent integral).
// ---------------------------------------------------------------------------

enum class HVerdict { Holds, Fails, Unknown };

inline const char* to_string(HVerdict v) {
    switch (v) {
        case HVerdict::Holds: return "holds";
        case HVerdict::Fails: return "fails";
        default: return "unknown";
    }
}

struct HCheck {
    HVerdict verdict = HVerdict::Unknown;
    ga::GFamily g;        // the certified floor when verdict == Holds
    double n_floor = 0.0; // smallest window point from which the floor held
    std::string why;
};

// ell(n) = c n^{n_pow} (log n)^{log_pow} (log log n)^{loglog_pow}; covers the
// power, poly-log and iterated-log catalogue.
struct EllModel {
    double c = 1.0;
    double n_pow = 0.0;
    double log_pow = 0.0;
    double loglog_pow = 0.0;
};

inline HCheck check_condition_H(const EllModel& m) {
    if (!(m.c > 0.0)) throw std::invalid_argument("ell model needs c > 0");
    HCheck out;
    // Half the constant: the model is only asymptotic, the floor must sit
    // strictly below it.  ell(n) >= g(log n) log n with
    //   g(x) = (c/2) e^{n_pow x} x^{log_pow - 1} (log x)^{loglog_pow}.
    out.g = ga::GFamily{0.5 * m.c, m.log_pow, m.loglog_pow, m.n_pow};
    if (out.g.valid()) {
        out.verdict = HVerdict::Holds;
        out.why = "integrable floor " + out.g.describe();
        return out;
    }
    out.verdict = HVerdict::Fails;
    out.why = "every admissible floor under this ell model has a divergent "
              "integral (need n_pow > 0, log_pow > 1, or log_pow = 1 with "
              "loglog_pow > 1)";
    out.g = {};
    return out;
}

inline EllModel ell_model_of(const EllGrowth& eg) {
    switch (eg.kind) {
        case EllGrowth::Kind::Poly: return {eg.coef, eg.expo, 0.0, 0.0};
        case EllGrowth::Kind::LogPow: return {eg.coef, 0.0, eg.expo, 0.0};
        case EllGrowth::Kind::Finite: return {eg.coef, 0.0, 0.0, 0.0};
        default: return {0.0, 0.0, 0.0, 0.0};
    }
}

inline HCheck check_condition_H(const SplittingMeasure& mu,
                                double n_lo = 1e3, double n_top = 1e6) {
    HCheck out;
    if (mu.trivial()) {
        out.verdict = HVerdict::Fails;
        out.why = "no splitting: ell = 0";
        return out;
    }
    const EllGrowth eg = mu.ell_growth();
    if (eg.kind == EllGrowth::Kind::Finite) {
        out.verdict = HVerdict::Fails;
        out.why = "ell is bounded (" + detail::ell_model_text(eg) +
                  "): every admissible floor has a divergent integral";
        return out;
    }
    out = check_condition_H(ell_model_of(eg));
    if (out.verdict != HVerdict::Holds) return out;
    // numeric floor verification: the half-constant model must sit below the
    // actual ell from some window point onward
    double n_ok = 0.0;
    bool holding = false;
    for (double n = n_lo; n <= 1.0001 * n_top; n *= std::sqrt(10.0)) {
        const double lx = std::log(n);
        const bool ok = mu.ell(n) >= out.g.eval(lx) * lx;
        if (ok && !holding) { n_ok = n; holding = true; }
        if (!ok) holding = false;
    }
    if (!holding) {
        out.verdict = HVerdict::Unknown;
        out.why += "; but ell(n) < g(log n) log n still at n = " +
                   detail::fmt(n_top);
        return out;
    }
    out.n_floor = n_ok;
    out.why += "; floor verified numerically for n >= " + detail::fmt(n_ok);
    return out;
}

// ---------------------------------------------------------------------------
// rho = limsup Phi(n) / (n ell(n)) from the growth models of both sides.
// ---------------------------------------------------------------------------

struct RhoModel {
    bool known = false;
    double value = std::numeric_limits<double>::quiet_NaN();
    std::string note;
};

inline RhoModel rho_model(const PhiGrowth& pg, const EllGrowth& eg) {
    RhoModel out;
    const double inf = std::numeric_limits<double>::infinity();
    if (eg.kind == EllGrowth::Kind::Zero) {
        if (pg.kind == PhiGrowth::Kind::None) return out;  // 0/0: undefined
        out.known = true;
        out.value = inf;
        out.note = "ell = 0 while Phi > 0";
        return out;
    }
    if (pg.kind == PhiGrowth::Kind::None) {
        out.known = true;
        out.value = 0.0;
        out.note = "Phi = 0";
        return out;
    }
    // n ell(n) growth exponents: n^{1+e} (log n)^{q}
    double e = 0.0, q = 0.0, c = eg.coef;
    if (eg.kind == EllGrowth::Kind::Poly) e = eg.expo;
    if (eg.kind == EllGrowth::Kind::LogPow) q = eg.expo;
    // Phi growth exponents: n^{1+b} (log n)^{p}
    const double b = pg.kind == PhiGrowth::Kind::Poly ? pg.beta : 0.0;
    const double p = pg.kind == PhiGrowth::Kind::LogPoly ? pg.beta : 0.0;
    out.known = true;
    if (b < e || (b == e && p < q)) out.value = 0.0;
    else if (b > e || p > q) out.value = inf;
    else out.value = pg.d / c;
    out.note = detail::phi_model_text(pg) + ", n " + detail::ell_model_text(eg);
    return out;
}

// ---------------------------------------------------------------------------
// Sufficient-condition classifier for a concrete measure pair.
// ---------------------------------------------------------------------------

struct ClassifyOptions {
    double margin = 0.05;   // numeric tests must clear thresholds by this
    double n_lo = 1e3;      // verification window
    double n_top = 1e6;
    double theta_n_max = 1e6;  // largest n for the theta bracket
};

namespace detail {

// Verify the rho growth-model value against Phi(n)/(n ell(n)) on the window:
// finite positive limits must match within [1/4, 4] at the top; a zero limit
// must show a ratio that decayed along the window top half.
inline bool rho_verified(const CoalescenceMeasure& lam, const SplittingMeasure& mu,
                         const RhoModel& rho, const ClassifyOptions& opt,
                         std::string* evidence) {
    if (!rho.known) return false;
    auto ratio = [&](double n) { return rates::phi(lam, n) / (n * mu.ell(n)); };
    const double top = ratio(opt.n_top);
    if (rho.value == 0.0) {
        const double mid = ratio(std::sqrt(opt.n_lo * opt.n_top));
        const bool ok = top < 0.75 * mid;
        if (ok && evidence)
            *evidence = "Phi/(n ell) fell from " + fmt(mid) + " to " + fmt(top) +
                        " across the window top half";
        return ok;
    }
    if (!std::isfinite(rho.value)) return false;
    const double r = top / rho.value;
    const bool ok = ratio_sane(r);
    if (ok && evidence)
        *evidence = "Phi/(n ell) = " + fmt(top) + " at n = " + fmt(opt.n_top) +
                    " vs model " + fmt(rho.value);
    return ok;
}

}  // namespace detail

inline BoundaryVerdict classify_sufficient(const CoalescenceMeasure& lam,
                                           const SplittingMeasure& mu,
                                           const ClassifyOptions& opt = {}) {
    BoundaryVerdict v;

    // Degenerate pairs first: one-sided dynamics admit exact answers.
    if (mu.trivial()) {
        v.explodes = Ternary::No;
        v.fired.push_back({"no_fragmentation",
                           "block count is non-increasing; infinity unreachable"});
        const SeriesCheck sc = check_schweinsberg(lam, opt.n_top);
        if (sc.verdict == SeriesVerdict::Converges) v.comes_down = Ternary::Yes;
        if (sc.verdict == SeriesVerdict::Diverges) v.comes_down = Ternary::No;
        v.fired.push_back({"pure_coalescent_series", sc.why});
        v.notes.push_back("pure coalescent: sum_n 1/Phi(n) < infinity decides "
                          "coming down exactly");
        v.label = derive_label(v.explodes, v.comes_down);
        return v;
    }
    if (!lam.has_coagulation()) {
        v.comes_down = Ternary::No;
        v.fired.push_back({"no_coagulation",
                           "block count is non-decreasing; started infinite it stays infinite"});
        const SeriesCheck dc = check_doney(mu, opt.n_top);
        if (dc.verdict == SeriesVerdict::Converges) v.explodes = Ternary::Yes;
        if (dc.verdict == SeriesVerdict::Diverges) v.explodes = Ternary::No;
        v.fired.push_back({"pure_branching_series", dc.why});
        v.notes.push_back("pure fragmentation: sum_n 1/(n ell(n)) < infinity "
                          "decides explosion exactly");
        v.label = derive_label(v.explodes, v.comes_down);
        return v;
    }

    const HCheck h = check_condition_H(mu, opt.n_lo, opt.n_top);
    const RhoModel rho = rho_model(lam.phi_growth(), mu.ell_growth());
    const SeriesCheck schw = check_schweinsberg(lam, opt.n_top);

    // Exit by vanishing rate ratio: growth floor on ell plus
    // Phi(n)/(n ell(n)) -> 0.
    if (h.verdict == HVerdict::Holds && rho.known && rho.value == 0.0) {
        std::string ev;
        if (detail::rho_verified(lam, mu, rho, opt, &ev)) {
            v.explodes = Ternary::Yes;
            v.comes_down = Ternary::No;
            v.fired.push_back({"exit_by_vanishing_rate_ratio",
                               "Phi/(n ell) -> 0 (" + rho.note + "; " + ev +
                                   "); " + h.why});
            v.label = derive_label(v.explodes, v.comes_down);
            return v;
        }
        v.notes.push_back("rho model is 0 but the window ratio did not confirm "
                          "the decay; rate-ratio tests skipped");
    }

    // Non-explosion by the summable series sum_n n mu_bar(n)/Phi(n); the
    // Phi-side series upgrade makes it an entrance.
    const auto series = ga::detail::series_certificate(lam.phi_growth(), mu);
    if (series.ok && std::isfinite(schw.model_ratio) &&
        detail::ratio_sane(schw.model_ratio)) {
        v.explodes = Ternary::No;
        v.fired.push_back({"nonexplosion_by_summable_series",
                           "sum_n n mu_bar(n)/Phi(n) < infinity: " + series.why});
        if (schw.verdict == SeriesVerdict::Converges) {
            v.comes_down = Ternary::Yes;
            v.fired.push_back({"entrance_by_series_pair",
                               "additionally sum_n 1/Phi(n) < infinity (" +
                                   schw.why + "), which forces theta = 0"});
        }
    }

    // Explosion by bounded rate ratio: growth floor plus
    // rho = limsup Phi/(n ell) below 1/2 (below 1/4: exit).
    if (v.explodes == Ternary::Unknown && h.verdict == HVerdict::Holds &&
        rho.known && std::isfinite(rho.value)) {
        std::string ev;
        if (detail::rho_verified(lam, mu, rho, opt, &ev)) {
            if (rho.value < 0.5 * (1.0 - opt.margin)) {
                v.explodes = Ternary::Yes;
                v.fired.push_back({"explosion_by_rate_ratio",
                                   "rho = " + detail::fmt(rho.value) +
                                       " < 1/2 (" + ev + "); " + h.why});
                if (rho.value <= 0.25 * (1.0 - opt.margin)) {
                    v.comes_down = Ternary::No;
                    v.fired.push_back({"exit_by_rate_ratio",
                                       "rho = " + detail::fmt(rho.value) +
                                           " <= 1/4"});
                }
            }
        }
    }

    // Coming down versus staying infinite through the theta functional; the
    // test needs sum_n 1/Phi(n) < infinity.  Since sum_{k<=n} mu_bar(k) =
    // ell(n), theta(n) is asymptotic to n ell(n)/Phi(n) = 1/rho(n) for
    // regularly varying pairs, so when the rho growth model is available its
    // reciprocal pins the limit and the numeric bracket only corroborates the
    // window.  A bare numeric bracket cannot tell a (log n)^epsilon climb
    // from convergence, so without a model the estimator's own convergence
    // certificate is required.
    if (v.comes_down == Ternary::Unknown &&
        schw.verdict == SeriesVerdict::Converges) {
        const double inf = std::numeric_limits<double>::infinity();
        double theta_mdl = std::numeric_limits<double>::quiet_NaN();
        if (rho.known)
            theta_mdl = rho.value == 0.0
                            ? inf
                            : (std::isinf(rho.value) ? 0.0 : 1.0 / rho.value);
        const rates::ThetaEstimate th =
            rates::theta_estimates(lam, mu, opt.theta_n_max);
        const std::string bracket = "theta in [" + detail::fmt(th.lo) + ", " +
                                    detail::fmt(th.hi) + "] at n = " +
                                    detail::fmt(th.n_used);
        if (rho.known && theta_mdl < 1.0 - opt.margin) {
            if (th.hi < 1.0 - opt.margin) {
                v.comes_down = Ternary::Yes;
                v.fired.push_back({"comes_down_by_theta",
                                   "model theta = " + detail::fmt(theta_mdl) +
                                       " < 1; " + bracket});
            } else {
                v.notes.push_back("theta model " + detail::fmt(theta_mdl) +
                                  " < 1 but the window bracket disagrees (" +
                                  bracket + "); theta test skipped");
            }
        } else if (rho.known && theta_mdl > 1.0 + opt.margin) {
            if (th.lo > 1.0 + opt.margin) {
                v.comes_down = Ternary::No;
                v.fired.push_back({"stays_infinite_by_theta",
                                   "model theta = " + detail::fmt(theta_mdl) +
                                       " > 1; " + bracket});
            } else {
                v.notes.push_back("theta model " + detail::fmt(theta_mdl) +
                                  " > 1 but the window bracket has not risen "
                                  "past it (" + bracket + "); theta test "
                                  "skipped");
            }
        } else if (rho.known) {
            v.notes.push_back("theta model " + detail::fmt(theta_mdl) +
                              " within margin of 1: too close to the critical "
                              "line for a sufficient test");
        } else if (th.converged && th.hi < 1.0 - opt.margin) {
            v.comes_down = Ternary::Yes;
            v.fired.push_back({"comes_down_by_theta", bracket + " < 1"});
        } else if (th.converged && th.lo > 1.0 + opt.margin) {
            v.comes_down = Ternary::No;
            v.fired.push_back({"stays_infinite_by_theta", bracket + " > 1"});
        } else {
            v.notes.push_back("theta bracket inconclusive: " + bracket +
                              (th.note.empty() ? "" : "; " + th.note));
        }
    } else if (v.comes_down == Ternary::Unknown) {
        v.notes.push_back("theta test skipped: sum_n 1/Phi(n) not certified "
                          "convergent (" + schw.why + ")");
    }

    if (h.verdict != HVerdict::Holds)
        v.notes.push_back("ell growth floor: " + h.why);
    v.label = derive_label(v.explodes, v.comes_down);
    return v;
}

// ---------------------------------------------------------------------------
// Closed-form phase diagram for regularly varying pairs.
// ---------------------------------------------------------------------------

struct RegularVariationSpec {
    enum class Family { Poly, Log };
    // Coalescence: Poly means Phi(n) ~ d n^{1+beta} (beta in (0,1], d > 0);
    // Log means Phi(n) ~ d n (log n)^beta (beta > 0, d > 0).
    Family coal = Family::Poly;
    double beta = 0.0;
    double d = 0.0;
    // Fragmentation: Poly means mu(n) ~ b n^{-1-alpha} (alpha > 0, b > 0);
    // Log means mu(n) ~ b (log n)^alpha / n^2 (alpha > 0, b > 0).
    Family frag = Family::Poly;
    double alpha = 0.0;
    double b = 0.0;
    // True when the pair is known to have the exact product form for which
    // the lower critical line of the balanced polynomial case is settled
    // (entrance): density c x^{-beta} h(x) with h >= 1 and exactly
    // mu(n) = b n^{-1-alpha}.
    bool settled_lower_critical = false;

    void validate() const {
        if (!(d > 0.0 && b > 0.0))
            throw std::invalid_argument("regular-variation spec needs b, d > 0");
        if (!(alpha > 0.0))
            throw std::invalid_argument("regular-variation spec needs alpha > 0");
        if (coal == Family::Poly && !(beta > 0.0 && beta <= 1.0))
            throw std::invalid_argument(
                "polynomial coalescence needs beta in (0, 1]");
        if (coal == Family::Log && !(beta > 0.0))
            throw std::invalid_argument("logarithmic coalescence needs beta > 0");
    }
};

// Balanced-line functionals of the polynomial/polynomial diagram.  Both grow
// linearly in b/d; theta crosses 1 on the upper line b/d = alpha(1-alpha),
// sigma crosses 1 on the lower line b/d = alpha sin(pi alpha)/pi, and
// sigma > theta throughout alpha in (0,1).
inline double balanced_theta(double alpha, double b_over_d) {
    return b_over_d / (alpha * (1.0 - alpha));
}
inline double balanced_sigma(double alpha, double b_over_d) {
    return b_over_d * sf::pi / (alpha * std::sin(sf::pi * alpha));
}

inline BoundaryVerdict classify_regular(const RegularVariationSpec& spec) {
    spec.validate();
    BoundaryVerdict v;
    const double reltol = 1e-12;  // width of the critical lines
    auto near = [&](double x, double y) { return std::fabs(x - y) <= reltol * std::fabs(y); };
    auto conclude = [&](Ternary e, Ternary c, const char* id, std::string params) {
        v.explodes = e;
        v.comes_down = c;
        v.fired.push_back({id, std::move(params)});
        v.label = derive_label(e, c);
    };

    if (spec.coal != spec.frag) {
        v.notes.push_back("mixed pairing (polynomial coalescence with "
                          "logarithmic fragmentation or vice versa) is not "
                          "covered by the phase diagram");
        return v;
    }

    if (spec.coal == RegularVariationSpec::Family::Poly) {
        const double s = spec.alpha + spec.beta;
        const double r = spec.b / spec.d;
        if (!near(s, 1.0)) {
            if (s < 1.0)
                conclude(Ternary::Yes, Ternary::No, "poly_pair_unbalanced",
                         "alpha + beta = " + detail::fmt(s) + " < 1: exit");
            else
                conclude(Ternary::No, Ternary::Yes, "poly_pair_unbalanced",
                         "alpha + beta = " + detail::fmt(s) + " > 1: entrance");
            return v;
        }
        const double thr_hi = spec.alpha * (1.0 - spec.alpha);
        const double thr_lo = spec.alpha * std::sin(sf::pi * spec.alpha) / sf::pi;
        const std::string trail =
            "alpha + beta = 1; b/d = " + detail::fmt(r) + ", theta = " +
            detail::fmt(balanced_theta(spec.alpha, r)) + ", sigma = " +
            detail::fmt(balanced_sigma(spec.alpha, r));
        if (near(r, thr_hi)) {
            v.label = Label::Critical;
            v.fired.push_back({"poly_pair_balanced_upper_line", trail});
            v.notes.push_back("open case: b/d = alpha(1-alpha) (theta = 1)");
            return v;
        }
        if (near(r, thr_lo)) {
            if (spec.settled_lower_critical) {
                conclude(Ternary::No, Ternary::Yes,
                         "poly_pair_balanced_lower_line_settled",
                         trail + "; exact product-form pair: entrance");
                return v;
            }
            v.label = Label::Critical;
            v.fired.push_back({"poly_pair_balanced_lower_line", trail});
            v.notes.push_back(
                "open case: b/d = alpha sin(pi alpha)/pi (sigma = 1); settled "
                "(entrance) only for the exact product-form pairs");
            return v;
        }
        if (r > thr_hi)
            conclude(Ternary::Yes, Ternary::No, "poly_pair_balanced", trail + ": exit");
        else if (r > thr_lo)
            conclude(Ternary::Yes, Ternary::Yes, "poly_pair_balanced",
                     trail + ": regular");
        else
            conclude(Ternary::No, Ternary::Yes, "poly_pair_balanced",
                     trail + ": entrance");
        return v;
    }

    // Logarithmic pair: thresholds on beta versus 1 + alpha.
    const double t = 1.0 + spec.alpha;
    const double r = spec.b / spec.d;
    if (!near(spec.beta, t)) {
        if (spec.beta < t)
            conclude(Ternary::Yes, Ternary::No, "log_pair_unbalanced",
                     "beta = " + detail::fmt(spec.beta) + " < 1 + alpha: exit");
        else
            conclude(Ternary::No, Ternary::Yes, "log_pair_unbalanced",
                     "beta = " + detail::fmt(spec.beta) + " > 1 + alpha: entrance");
        return v;
    }
    const std::string trail = "beta = 1 + alpha; b/d = " + detail::fmt(r) +
                              " vs threshold " + detail::fmt(t);
    if (near(r, t)) {
        v.label = Label::Critical;
        v.fired.push_back({"log_pair_balanced_line", trail});
        v.notes.push_back("open case: b/d = 1 + alpha");
        return v;
    }
    if (r > t)
        conclude(Ternary::Yes, Ternary::No, "log_pair_balanced", trail + ": exit");
    else
        conclude(Ternary::No, Ternary::Yes, "log_pair_balanced",
                 trail + ": entrance");
    return v;
}

// ---------------------------------------------------------------------------
// Bridging helpers: extract a regular-variation spec from a measure pair,
// and a combined classifier that tries the sufficient conditions first and
// falls back on the phase diagram.
// ---------------------------------------------------------------------------

struct RegularSpecExtraction {
    bool ok = false;
    RegularVariationSpec spec;
    std::string why;
};

inline RegularSpecExtraction regular_spec_from(const CoalescenceMeasure& lam,
                                               const SplittingMeasure& mu) {
    RegularSpecExtraction out;
    const PhiGrowth pg = lam.phi_growth();
    const EllGrowth eg = mu.ell_growth();
    using F = RegularVariationSpec::Family;
    if (pg.kind == PhiGrowth::Kind::Poly && pg.beta > 0.0 &&
        mu.tail() == measures::TailFamily::Power &&
        mu.tail_alpha() > 0.0) {
        out.spec.coal = F::Poly;
        out.spec.beta = pg.beta;
        out.spec.d = pg.d;
        out.spec.frag = F::Poly;
        out.spec.alpha = mu.tail_alpha();
        out.spec.b = mu.tail_b();
        // exact product form: pure power density (no Kingman mass, no atoms)
        // against an unmodified power split law
        out.spec.settled_lower_critical =
            lam.kingman == 0.0 && lam.atoms.empty() &&
            lam.density.family == measures::DensityFamily::Power &&
            mu.head_end() == 0;
        out.ok = true;
        return out;
    }
    if (pg.kind == PhiGrowth::Kind::LogPoly && pg.beta > 0.0 &&
        mu.tail() == measures::TailFamily::Log && mu.tail_alpha() > 0.0) {
        out.spec.coal = F::Log;
        out.spec.beta = pg.beta;
        out.spec.d = pg.d;
        out.spec.frag = F::Log;
        out.spec.alpha = mu.tail_alpha();
        out.spec.b = mu.tail_b();
        out.ok = true;
        return out;
    }
    out.why = "no regularly varying pairing: " + detail::phi_model_text(pg) +
              " with " + detail::ell_model_text(eg);
    return out;
}

// Sufficient conditions first; phase diagram to fill what they left open.
// The two sources never contradict each other — if they do, that is a bug,
// and the verdict reports it loudly in the notes.
inline BoundaryVerdict classify_auto(const CoalescenceMeasure& lam,
                                     const SplittingMeasure& mu,
                                     const ClassifyOptions& opt = {}) {
    BoundaryVerdict v = classify_sufficient(lam, mu, opt);
    if (v.explodes != Ternary::Unknown && v.comes_down != Ternary::Unknown)
        return v;
    const RegularSpecExtraction ex = regular_spec_from(lam, mu);
    if (!ex.ok) {
        if (!ex.why.empty()) v.notes.push_back(ex.why);
        return v;
    }
    const BoundaryVerdict r = classify_regular(ex.spec);
    auto merge = [&](Ternary& mine, Ternary theirs, const char* axis) {
        if (theirs == Ternary::Unknown) return;
        if (mine == Ternary::Unknown) mine = theirs;
        else if (mine != theirs)
            v.notes.push_back(std::string("CONTRADICTION on ") + axis +
                              ": sufficient tests vs phase diagram");
    };
    merge(v.explodes, r.explodes, "explodes");
    merge(v.comes_down, r.comes_down, "comes_down");
    for (const auto& f : r.fired) v.fired.push_back(f);
    for (const auto& n : r.notes) v.notes.push_back(n);
    if (r.label == Label::Critical) {
        v.label = Label::Critical;
        return v;
    }
    v.label = derive_label(v.explodes, v.comes_down);
    return v;
}

}  // namespace efc::classify
