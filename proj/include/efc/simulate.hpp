#pragma once
// Event-driven simulation of the block-counting chain.  A state n >= 2 merges
// k of its n blocks at rate C(n,k) lambda_{n,k} (state n-k+1) and splits one
// block at rate n mu(k) (state n+k).  Everything here is exact in
// distribution with respect to the node-discretized coagulation measure:
//   * states n <= row threshold sample merge sizes from exact categorical
//     rows (RateTable);
//   * larger states use envelope thinning on the NodeGrid (O(log #nodes) per
//     attempt, acceptance bounded away from 0), then draw the merge size from
//     Binomial(n, x_node) conditioned on >= 2;
//   * fragmentation sizes come from an exact head table plus an analytic
//     tail bucket inverted through mu_bar.
// On top of the stepper: run_path (ceiling proxy for infinity, floor
// detection, optional single-merge stopping), a come-down ladder with common
// random numbers, and first-passage band statistics with the matching
// analytic bounds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "efc/ga.hpp"
#include "efc/measures.hpp"
#include "efc/rates.hpp"
#include "efc/rng.hpp"

namespace efc::sim {

using measures::CoalescenceMeasure;
using measures::SplittingMeasure;

// ---------------------------------------------------------------------------
// Fragmentation size sampler: exact prefix sums over the head, plus a tail
// bucket inverted through the analytic mu_bar.  Draws beyond k_clamp (far
// outside any ceiling) are clamped and always reported as tail draws.
// ---------------------------------------------------------------------------

class FragSampler {
public:
    FragSampler() = default;

    explicit FragSampler(SplittingMeasure mu, long head = 1 << 16)
        : mu_(std::move(mu)), head_(std::max(head, mu_.head_end())) {
        cum_.resize(static_cast<std::size_t>(head_));
        long double acc = 0.0L;
        for (long k = 1; k <= head_; ++k) {
            acc += mu_.pmf_at(k);
            cum_[static_cast<std::size_t>(k - 1)] = static_cast<double>(acc);
        }
        tail_mass_ = mu_.mu_bar(static_cast<double>(head_) + 1.0);
        mass_ = static_cast<double>(acc) + tail_mass_;
    }

    bool trivial() const { return mass_ <= 0.0; }
    double mass() const { return mass_; }

    long draw(rng::Rng& g, bool* via_tail = nullptr) const {
        if (trivial()) throw std::logic_error("FragSampler: no splitting mass");
        const double u = g.uniform01_open0() * mass_;
        if (u <= cum_.back() || tail_mass_ <= 0.0) {
            const auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
            if (via_tail) *via_tail = false;
            return static_cast<long>(it - cum_.begin()) + 1;
        }
        if (via_tail) *via_tail = true;
        // smallest j > head with mu_bar(j+1) < v <= mu_bar(j), i.e. P(K = j)
        // = mu(j) given the tail bucket; bisection over integers in doubles
        const double v = std::min(u - cum_.back(), tail_mass_);
        double lo = static_cast<double>(head_) + 1.0, hi = lo;
        while (mu_.mu_bar(hi + 1.0) >= v) {
            hi = hi * 2.0 + 1.0;
            if (hi >= kClamp) return static_cast<long>(kClamp);
        }
        while (hi - lo >= 0.5) {
            const double mid = std::floor(0.5 * (lo + hi));
            if (mu_.mu_bar(mid + 1.0) < v)
                hi = mid;
            else
                lo = mid + 1.0;
        }
        return static_cast<long>(lo);
    }

private:
    static constexpr double kClamp = 4.0e18;  // < 2^63, beyond any ceiling

    SplittingMeasure mu_;
    long head_ = 0;
    std::vector<double> cum_;  // cum_[i] = sum_{k <= i+1} mu(k)
    double mass_ = 0.0, tail_mass_ = 0.0;
};

// ---------------------------------------------------------------------------
// Stepper: one jump of the chain, exact in distribution.  Thinning rejections
// are resolved internally, so the returned waiting time is Exponential in the
// state's true total rate and callers never see phantom events.
// ---------------------------------------------------------------------------

enum class JumpKind { Coal, Frag };

struct Step {
    double dt = 0.0;   // waiting time to this jump
    long next = 0;     // state after the jump
    JumpKind kind = JumpKind::Coal;
    long k = 0;        // merge size (>= 2) or split count (>= 1)
    bool via_tail = false;     // split size drawn from the analytic tail bucket
    bool absorbed = false;     // total rate zero: no jump ever happens
    long long attempts = 0;    // thinning attempts consumed (>= 1)
};

class Stepper {
public:
    Stepper(const CoalescenceMeasure& lam, const SplittingMeasure& mu,
            double n_max, long row_threshold = 2048)
        : grid_(rates::NodeGrid::build(lam, n_max)),
          table_(&grid_, row_threshold),
          frag_(mu),
          kingman_(lam.kingman) {}

    Stepper(const Stepper&) = delete;
    Stepper& operator=(const Stepper&) = delete;

    double n_max() const { return grid_.n_max(); }
    const rates::NodeGrid& grid() const { return grid_; }
    rates::RateTable& table() { return table_; }
    const FragSampler& frag() const { return frag_; }

    // true total jump rate at n (coalescence + fragmentation)
    double total_rate(long n) {
        const double fr = frag_.trivial()
                              ? 0.0
                              : frag_.mass() * static_cast<double>(n);
        if (n <= 1) return fr;
        if (n <= table_.threshold()) return table_.row(n).total + fr;
        const double nn = static_cast<double>(n);
        return grid_.total_rate(nn) + 0.5 * kingman_ * nn * (nn - 1.0) + fr;
    }

    Step step(long n, rng::Rng& g) {
        if (n < 1) throw std::invalid_argument("Stepper::step: n >= 1 required");
        if (static_cast<double>(n) > grid_.n_max() + 0.5)
            throw std::invalid_argument("Stepper::step: n above the grid's n_max");
        Step s;
        const double fr =
            frag_.trivial() ? 0.0 : frag_.mass() * static_cast<double>(n);
        for (;;) {
            ++s.attempts;
            if (n == 1 || n <= table_.threshold()) {
                const double cr =
                    n == 1 ? 0.0 : table_.row(n).total;  // includes Kingman
                const double total = cr + fr;
                if (total <= 0.0) {
                    s.absorbed = true;
                    return s;
                }
                s.dt += g.exponential(total);
                if (g.uniform01() * total < cr) {
                    s.kind = JumpKind::Coal;
                    s.k = table_.row(n).sample(g);
                    s.next = n - s.k + 1;
                } else {
                    s.kind = JumpKind::Frag;
                    s.k = frag_.draw(g, &s.via_tail);
                    s.next = n + s.k;
                }
                return s;
            }
            const double nn = static_cast<double>(n);
            const auto env = grid_.envelope(nn);
            const double kr = 0.5 * kingman_ * nn * (nn - 1.0);
            const double bar = env.total + kr + fr;
            if (bar <= 0.0) {
                s.absorbed = true;
                return s;
            }
            s.dt += g.exponential(bar);
            const double u = g.uniform01() * bar;
            if (u < fr) {
                s.kind = JumpKind::Frag;
                s.k = frag_.draw(g, &s.via_tail);
                s.next = n + s.k;
                return s;
            }
            if (u < fr + kr) {
                s.kind = JumpKind::Coal;
                s.k = 2;
                s.next = n - 1;
                return s;
            }
            const std::size_t q = grid_.sample_node(g, env);
            if (g.uniform01() > grid_.accept_ratio(q, nn)) continue;  // phantom
            s.kind = JumpKind::Coal;
            s.k = std::min<long>(g.binomial_ge2(n, grid_.x_at(q)), n);
            s.next = n - s.k + 1;
            return s;
        }
    }

private:
    rates::NodeGrid grid_;
    rates::RateTable table_;
    FragSampler frag_;
    double kingman_ = 0.0;
};

// ---------------------------------------------------------------------------
// Single-path run against a ceiling (stand-in for the boundary at infinity)
// and a floor (the finite states a come-down must reach).
// ---------------------------------------------------------------------------

struct SimConfig {
    long initial_n = 2;
    double horizon_T = 1e300;
    long ceiling = 1000000;  // absorbing stand-in for infinity
    long floor_m = 1;        // come-down detection level
    double stop_p = 0.0;     // in (0,1): stop at the first merge of more than
                             // floor(n * stop_p) blocks; 0 means free mode
    bool absorb_at_floor = true;  // false: floor crossings are only recorded
    bool record_path = false;
    std::uint64_t rng_seed = 1;
    long long budget = 1000000000;    // total sampling attempts
    std::size_t path_cap = 1u << 20;  // recorded events before truncation

    void validate() const {
        if (!(horizon_T > 0.0))
            throw std::invalid_argument("SimConfig: horizon_T must be positive");
        if (!(1 <= floor_m && floor_m < initial_n && initial_n <= ceiling))
            throw std::invalid_argument(
                "SimConfig: need 1 <= floor_m < initial_n <= ceiling");
        if (!(stop_p >= 0.0 && stop_p < 1.0))
            throw std::invalid_argument("SimConfig: stop_p must lie in [0, 1)");
        if (budget <= 0) throw std::invalid_argument("SimConfig: budget <= 0");
    }
};

enum class TerminalKind {
    ExplodedProxy,    // reached the ceiling
    HitFloor,         // reached the floor with absorption enabled
    Censored,         // horizon passed before the next jump
    SigmaPFired,      // stopped mode: an oversized merge was sampled
    Absorbed,         // zero total rate (no coagulation and no splitting left)
    BudgetExhausted,  // sampling-attempt budget ran out; outcome is partial
};

inline const char* to_string(TerminalKind t) {
    switch (t) {
        case TerminalKind::ExplodedProxy: return "exploded_proxy";
        case TerminalKind::HitFloor: return "hit_floor";
        case TerminalKind::Censored: return "censored";
        case TerminalKind::SigmaPFired: return "sigma_p_fired";
        case TerminalKind::Absorbed: return "absorbed";
        default: return "budget_exhausted";
    }
}

struct Event {
    double t = 0.0;
    long from = 0, to = 0;
    JumpKind kind = JumpKind::Coal;
    long k = 0;
};

struct SimOutcome {
    TerminalKind terminal = TerminalKind::Censored;
    double t_end = 0.0;
    bool via_tail_bucket = false;  // the ceiling crossing came from a tail draw
    long long jump_count = 0;      // jumps actually taken
    long long phantom_count = 0;   // internal thinning rejections (diagnostic)
    long max_state = 0, min_state = 0, final_state = 0;
    double floor_time = std::numeric_limits<double>::quiet_NaN();
    bool path_truncated = false;
    std::vector<Event> path;
};

inline SimOutcome run_path(const SimConfig& cfg, Stepper& st) {
    cfg.validate();
    if (static_cast<double>(cfg.ceiling) > st.n_max() + 0.5)
        throw std::invalid_argument("run_path: stepper grid built below ceiling");
    rng::Rng g(cfg.rng_seed);
    SimOutcome out;
    long n = cfg.initial_n;
    double t = 0.0;
    out.min_state = out.max_state = n;
    long long attempts = 0;
    for (;;) {
        Step s = st.step(n, g);
        attempts += s.attempts;
        out.phantom_count += s.attempts - 1;
        if (s.absorbed) {
            out.terminal = TerminalKind::Absorbed;
            break;
        }
        if (attempts > cfg.budget) {  // the pending jump is not taken
            out.terminal = TerminalKind::BudgetExhausted;
            break;
        }
        const double tj = t + s.dt;
        if (tj > cfg.horizon_T) {
            out.terminal = TerminalKind::Censored;
            t = cfg.horizon_T;
            break;
        }
        if (cfg.stop_p > 0.0 && s.kind == JumpKind::Coal &&
            s.k > static_cast<long>(std::floor(static_cast<double>(n) *
                                               cfg.stop_p))) {
            // the stopped chain freezes at the oversized merge's jump time;
            // the merge itself is not a transition of the stopped chain
            out.terminal = TerminalKind::SigmaPFired;
            t = tj;
            break;
        }
        t = tj;
        ++out.jump_count;
        if (cfg.record_path) {
            if (out.path.size() < cfg.path_cap)
                out.path.push_back({t, n, s.next, s.kind, s.k});
            else
                out.path_truncated = true;
        }
        n = s.next;
        out.max_state = std::max(out.max_state, n);
        out.min_state = std::min(out.min_state, n);
        if (n <= cfg.floor_m && std::isnan(out.floor_time)) out.floor_time = t;
        if (n <= cfg.floor_m && cfg.absorb_at_floor) {
            out.terminal = TerminalKind::HitFloor;
            break;
        }
        if (n >= cfg.ceiling) {
            out.terminal = TerminalKind::ExplodedProxy;
            out.via_tail_bucket = s.via_tail;
            break;
        }
    }
    out.t_end = t;
    out.final_state = n;
    return out;
}

// convenience form: builds the stepper for exactly this configuration
inline SimOutcome run_path(const SimConfig& cfg, const CoalescenceMeasure& lam,
                           const SplittingMeasure& mu) {
    Stepper st(lam, mu, static_cast<double>(cfg.ceiling));
    return run_path(cfg, st);
}

// ---------------------------------------------------------------------------
// Wilson score interval (95% default).
// ---------------------------------------------------------------------------

struct WilsonInterval {
    double p_hat = 0.0, lo = 0.0, hi = 1.0;
};

inline WilsonInterval wilson(double hits, double n, double z = 1.959964) {
    WilsonInterval w;
    if (n <= 0.0) return w;
    const double p = hits / n, z2 = z * z;
    w.p_hat = p;
    const double den = 1.0 + z2 / n;
    const double mid = p + z2 / (2.0 * n);
    const double rad = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    w.lo = std::max(0.0, (mid - rad) / den);
    w.hi = std::min(1.0, (mid + rad) / den);
    return w;
}

// ---------------------------------------------------------------------------
// Come-down ladder: increasing starts as a proxy for starting from infinity
// (the chain started higher stays above the chain started lower under the
// natural coupling, so stabilization of the hit probability along the ladder
// is evidence for a come-down, and decay toward 0 evidence against).
// Common random numbers: replica r consumes the same stream at every rung.
// ---------------------------------------------------------------------------

struct LadderRung {
    long n0 = 0;
    long replicas = 0, hits = 0, exploded = 0, other = 0;
    WilsonInterval p;
    double mean_hit_time = std::numeric_limits<double>::quiet_NaN();
};

struct LadderReport {
    std::vector<LadderRung> rungs;
    long long coupling_violations = 0;  // lower rung missed, higher rung hit
    std::string verdict;  // "cdi-evidence" | "stays-infinite-evidence" | "mixed"
    double effective_ceiling = 0.0;
    std::vector<std::string> notes;
};

inline LadderReport ladder_from_infinity(const SimConfig& cfg,
                                         const CoalescenceMeasure& lam,
                                         const SplittingMeasure& mu,
                                         const std::vector<long>& ladder,
                                         long replicas,
                                         double ceil_mult = 16.0) {
    if (ladder.empty()) throw std::invalid_argument("ladder: no rungs");
    for (std::size_t i = 0; i + 1 < ladder.size(); ++i)
        if (ladder[i] >= ladder[i + 1])
            throw std::invalid_argument("ladder: rungs must increase");
    if (ladder.back() > cfg.ceiling)
        throw std::invalid_argument("ladder: rung above ceiling");
    if (replicas <= 0) throw std::invalid_argument("ladder: replicas <= 0");

    LadderReport rep;
    // headroom above the top rung: a rung starting at the ceiling must be
    // able to wander up before the explosion proxy absorbs it
    const double eff = std::max<double>(
        cfg.ceiling, ceil_mult * static_cast<double>(ladder.back()));
    rep.effective_ceiling = eff;
    if (eff > static_cast<double>(cfg.ceiling))
        rep.notes.push_back(
            "explosion proxy raised to " + std::to_string(eff) +
            " so that top rungs are not absorbed immediately");
    Stepper st(lam, mu, eff);

    std::vector<std::vector<char>> hit(
        ladder.size(), std::vector<char>(static_cast<std::size_t>(replicas), 0));
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        LadderRung rung;
        rung.n0 = ladder[i];
        rung.replicas = replicas;
        double time_sum = 0.0;
        for (long r = 0; r < replicas; ++r) {
            SimConfig c = cfg;
            c.initial_n = ladder[i];
            c.ceiling = static_cast<long>(eff);
            c.absorb_at_floor = true;
            c.record_path = false;
            c.rng_seed = rng::mix_seed(cfg.rng_seed, static_cast<std::uint64_t>(r));
            const SimOutcome o = run_path(c, st);
            if (o.terminal == TerminalKind::HitFloor ||
                (o.terminal == TerminalKind::Absorbed &&
                 o.final_state <= cfg.floor_m)) {
                ++rung.hits;
                hit[i][static_cast<std::size_t>(r)] = 1;
                time_sum += o.t_end;
            } else if (o.terminal == TerminalKind::ExplodedProxy) {
                ++rung.exploded;
            } else {
                ++rung.other;
            }
        }
        rung.p = wilson(static_cast<double>(rung.hits),
                        static_cast<double>(replicas));
        if (rung.hits > 0) rung.mean_hit_time = time_sum / rung.hits;
        rep.rungs.push_back(rung);
    }

    for (std::size_t i = 0; i + 1 < hit.size(); ++i)
        for (long r = 0; r < replicas; ++r)
            if (!hit[i][static_cast<std::size_t>(r)] &&
                hit[i + 1][static_cast<std::size_t>(r)])
                ++rep.coupling_violations;
    if (rep.coupling_violations > 0)
        rep.notes.push_back("coupling-scheme failures: " +
                            std::to_string(rep.coupling_violations) +
                            " replica/rung pairs hit from the higher rung "
                            "only (event-sharing artifact, not a model "
                            "statement)");

    // evidence labels, not proofs: stabilization high vs decay toward 0
    const LadderRung& first = rep.rungs.front();
    const LadderRung& last = rep.rungs.back();
    const LadderRung& prev =
        rep.rungs.size() >= 2 ? rep.rungs[rep.rungs.size() - 2] : last;
    const double se_pair = 0.5 * (last.p.hi - last.p.lo) +
                           0.5 * (prev.p.hi - prev.p.lo);
    const bool stable = std::fabs(last.p.p_hat - prev.p.p_hat) <=
                        0.05 + se_pair;
    if (stable && last.p.p_hat >= 0.5)
        rep.verdict = "cdi-evidence";
    else if (last.p.p_hat < 0.25 &&
             last.p.p_hat <= 0.5 * first.p.p_hat + 0.05)
        rep.verdict = "stays-infinite-evidence";
    else
        rep.verdict = "mixed";
    return rep;
}

// ---------------------------------------------------------------------------
// First-passage band statistics.  Start the chain inside the band
// (n_low, m_high); measure which side is left first and how long the upward
// crossing takes, next to the analytic bounds that hold when the drift
// functional admits the floor G_a(n) >= g(log n) log n:
//     P(down first)                    <= (n_low / start)^(a-1)
//     P(up first, later than u)        <= (start / m_high)^(1-a)
//                                           * exp(-u g(log n_low) log n_low)
//     P(up crossing later than t(start)) <= (1 + 2^(a-1)) start^(delta (1-a))
// with delta from m_high = start^(1+delta) and t(y) = 1/g((1-delta) log y).
// ---------------------------------------------------------------------------

struct BandOptions {
    double u = 1.0;  // lateness threshold for the second bound
    double horizon = std::numeric_limits<double>::quiet_NaN();  // auto
    long long budget = 1000000000;
    std::uint64_t seed = 1;
    const ga::GFamily* g = nullptr;  // drift floor; bounds needing it are NaN
                                     // when absent
    double z = 1.959964;
};

struct EmpiricalExitReport {
    long n_low = 0, start = 0, m_high = 0;
    double a = 0.0;
    long replicas = 0;

    long low_first = 0, high_first = 0, neither = 0;
    WilsonInterval p_low_first, p_neither;
    double bound_low_first = 0.0;

    long high_after_u = 0;
    WilsonInterval p_high_after_u;
    double u = 0.0;
    double bound_high_after_u = std::numeric_limits<double>::quiet_NaN();

    long high_late = 0;
    WilsonInterval p_high_late;
    double t_start = std::numeric_limits<double>::quiet_NaN();
    double delta = 0.0;
    double bound_high_late = std::numeric_limits<double>::quiet_NaN();
    bool setup_matches_late_bound = false;

    long long budget_hits = 0;
    std::string note;
};

inline EmpiricalExitReport first_passage_stats(const CoalescenceMeasure& lam,
                                               const SplittingMeasure& mu,
                                               double a, long n_low, long start,
                                               long m_high, long replicas,
                                               const BandOptions& opt = {}) {
    if (!(a > 1.0))
        throw std::invalid_argument("first_passage_stats: a > 1 required");
    if (!(1 <= n_low && n_low < start && start < m_high))
        throw std::invalid_argument(
            "first_passage_stats: need 1 <= n_low < start < m_high");
    if (replicas <= 0)
        throw std::invalid_argument("first_passage_stats: replicas <= 0");

    EmpiricalExitReport rep;
    rep.n_low = n_low;
    rep.start = start;
    rep.m_high = m_high;
    rep.a = a;
    rep.replicas = replicas;
    rep.u = opt.u;

    const double ls = std::log(static_cast<double>(start));
    rep.delta = std::log(static_cast<double>(m_high)) / ls - 1.0;
    rep.bound_low_first = std::pow(
        static_cast<double>(n_low) / static_cast<double>(start), a - 1.0);
    if (opt.g != nullptr) {
        const double ln = std::log(static_cast<double>(n_low));
        rep.bound_high_after_u =
            std::pow(static_cast<double>(start) / static_cast<double>(m_high),
                     1.0 - a) *
            std::exp(-opt.u * opt.g->eval(ln) * ln);
        const double gl = opt.g->eval((1.0 - rep.delta) * ls);
        if (gl > 0.0) rep.t_start = 1.0 / gl;
        rep.bound_high_late =
            (1.0 + std::pow(2.0, a - 1.0)) * std::pow(static_cast<double>(start),
                                                      rep.delta * (1.0 - a));
        rep.setup_matches_late_bound =
            rep.delta > 0.0 && rep.delta < 1.0 / (2.0 * a - 1.0) &&
            n_low == static_cast<long>(std::floor(std::pow(
                         static_cast<double>(start), 1.0 - rep.delta))) +
                         1 &&
            m_high == static_cast<long>(std::floor(std::pow(
                          static_cast<double>(start), 1.0 + rep.delta)));
    } else {
        rep.note = "no drift floor supplied: time-based bounds omitted";
    }

    double cap = opt.horizon;
    if (std::isnan(cap)) {
        cap = 4.0 * std::max(opt.u, 1.0);
        if (std::isfinite(rep.t_start)) cap = std::max(cap, 4.0 * rep.t_start);
    }

    Stepper st(lam, mu, static_cast<double>(m_high));
    for (long r = 0; r < replicas; ++r) {
        rng::Rng g = rng::Rng::stream(opt.seed, static_cast<std::uint64_t>(r));
        long n = start;
        double t = 0.0;
        double t_low = std::numeric_limits<double>::infinity();
        double t_high = std::numeric_limits<double>::infinity();
        long long attempts = 0;
        for (;;) {
            Step s = st.step(n, g);
            attempts += s.attempts;
            if (s.absorbed) break;
            if (attempts > opt.budget) {
                ++rep.budget_hits;
                break;
            }
            t += s.dt;
            if (t > cap) break;
            n = s.next;
            if (n <= n_low && !std::isfinite(t_low)) t_low = t;
            if (n >= m_high) {
                t_high = t;
                break;
            }
        }
        const bool low_first = std::isfinite(t_low);  // recorded before any
                                                      // upward crossing ended
                                                      // the loop
        const bool high_first = std::isfinite(t_high) && !low_first;
        if (low_first)
            ++rep.low_first;
        else if (high_first)
            ++rep.high_first;
        else
            ++rep.neither;
        if (high_first && t_high > opt.u) ++rep.high_after_u;
        if (std::isfinite(rep.t_start) &&
            !(std::isfinite(t_high) && t_high <= rep.t_start))
            ++rep.high_late;
    }

    const double nrep = static_cast<double>(replicas);
    rep.p_low_first = wilson(static_cast<double>(rep.low_first), nrep, opt.z);
    rep.p_neither = wilson(static_cast<double>(rep.neither), nrep, opt.z);
    rep.p_high_after_u =
        wilson(static_cast<double>(rep.high_after_u), nrep, opt.z);
    rep.p_high_late = wilson(static_cast<double>(rep.high_late), nrep, opt.z);
    return rep;
}

}  // namespace efc::sim
