#pragma once

// Rate functionals of the block-counting chain.  A state n >= 2 merges k of
// its n blocks at rate C(n,k) lambda_{n,k} and splits one block into m + 1
// pieces at rate n mu(m).  This header provides
//   * exact single entries lambda_{n,k} and the total merge rate,
//   * the drift functionals Phi (mean blocks lost per unit time) and Psi
//     (its Laplace-kernel companion), plus a slow merge-sum oracle for Phi,
//   * NodeGrid: a fixed quadrature discretization of the coagulation measure
//     that powers the O(log) envelope sampler and per-state rate rows,
//   * RateTable: cached per-state merge-size distributions for small n,
//   * theta_estimates: certified two-sided brackets of
//         theta(n) = sum_{k>=1} n mu_bar(k) / Phi(n+k),
//     whose limit decides whether the partition chain can stay infinite.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <list>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "efc/measures.hpp"
#include "efc/quadrature.hpp"
#include "efc/rng.hpp"
#include "efc/special.hpp"

namespace efc {
namespace rates {

using measures::CoalescenceMeasure;
using measures::SplittingMeasure;

inline double log_choose(double n, double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// ---------------------------------------------------------------------------
// Exact single entries.

// lambda_{n,k} = Lambda({0}) 1_{k=2} + int_(0,1) x^{k-2} (1-x)^{n-k} Lambda(dx)
inline double lambda_nk(const CoalescenceMeasure& lam, long n, long k,
                        double rel_tol = 1e-12) {
    if (!(n >= 2 && k >= 2 && k <= n))
        throw std::invalid_argument("lambda_nk needs 2 <= k <= n");
    const double nn = static_cast<double>(n), kk = static_cast<double>(k);
    auto g = [nn, kk](double x) {
        return std::exp((kk - 2.0) * std::log(x) + (nn - kk) * std::log1p(-x));
    };
    double v = (k == 2) ? lam.kingman : 0.0;
    for (const auto& a : lam.atoms) v += a.w * g(a.x);
    if (lam.density.present()) {
        std::vector<double> presplit;
        if (k > 2 && n > 2)
            presplit.push_back((kk - 2.0) / (nn - 2.0)); // integrand mode
        else
            presplit.push_back(std::min(0.5, 1.0 / nn));
        v += lam.integrate_density(g, rel_tol, std::move(presplit));
    }
    return v;
}

// sum_{k=2}^{n} C(n,k) lambda_{n,k} = Lambda({0}) C(n,2)
//                                   + int P(Bin(n,x) >= 2) x^{-2} Lambda(dx)
inline double total_coalescence_rate(const CoalescenceMeasure& lam, double n,
                                     double rel_tol = 1e-11) {
    if (n < 2.0) return 0.0;
    double v = 0.5 * lam.kingman * n * (n - 1.0);
    v += lam.integrate_weighted(
        [n](double x) { return sf::coal_total_kernel(n, x); }, rel_tol,
        {std::min(0.5, 2.0 / n)});
    return v;
}

// Phi(n) = sum_{k=2}^{n} (k-1) C(n,k) lambda_{n,k}
//        = Lambda({0}) n(n-1)/2 + int ((1-x)^n + nx - 1) x^{-2} Lambda(dx)
inline double phi(const CoalescenceMeasure& lam, double n,
                  double rel_tol = 1e-11) {
    if (n < 2.0) return 0.0;
    double v = 0.5 * lam.kingman * n * (n - 1.0);
    v += lam.integrate_weighted([n](double x) { return sf::phi_kernel(n, x); },
                                rel_tol, {std::min(0.5, 1.0 / n)});
    return v;
}

// Psi(n) = Lambda({0}) n^2/2 + int (e^{-nx} - 1 + nx) x^{-2} Lambda(dx),
// the continuous-state companion of Phi; Phi <= Psi everywhere.
inline double psi(const CoalescenceMeasure& lam, double n,
                  double rel_tol = 1e-11) {
    if (n <= 0.0) return 0.0;
    double v = 0.5 * lam.kingman * n * n;
    v += lam.integrate_weighted([n](double x) { return sf::psi_kernel(n, x); },
                                rel_tol, {std::min(0.5, 1.0 / n)});
    return v;
}

// Merge-sum oracle for Phi: each of the n-1 terms (k-1) C(n,k) lambda_{n,k}
// is integrated separately in log space.  Slow by design; use phi() above for
// anything but cross-checks at moderate n.
inline double phi_by_merge_sum(const CoalescenceMeasure& lam, long n,
                               double rel_tol = 1e-12) {
    if (n < 2) return 0.0;
    const double nn = static_cast<double>(n);
    long double acc = 0.5L * static_cast<long double>(lam.kingman) * n * (n - 1);
    for (long k = 2; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double lc = log_choose(nn, kk);
        auto g = [nn, kk, lc](double x) {
            return std::exp(lc + (kk - 2.0) * std::log(x) +
                            (nn - kk) * std::log1p(-x));
        };
        double term = 0.0;
        for (const auto& a : lam.atoms) term += a.w * g(a.x);
        if (lam.density.present()) {
            std::vector<double> presplit;
            if (k > 2 && n > 2)
                presplit.push_back((kk - 2.0) / (nn - 2.0));
            else
                presplit.push_back(std::min(0.5, 1.0 / nn));
            term += lam.integrate_density(g, rel_tol, std::move(presplit));
        }
        acc += (kk - 1.0) * static_cast<long double>(term);
    }
    return static_cast<double>(acc);
}

inline double ell(const SplittingMeasure& mu, double n) { return mu.ell(n); }

// ---------------------------------------------------------------------------
// NodeGrid: the coagulation measure x^{-2} Lambda(dx) restricted to (0,1),
// discretized once into weighted nodes {(x_q, V_q)}.  Panels are geometric
// (ratio 2) with 16-point Gauss-Legendre rules, refined enough that the mass
// discarded below x_min stays under rel_floor of Phi(n_max); atoms enter as
// exact nodes.  The Kingman atom is kept out (it has its own exact channel).
//
// The envelope machinery implements, per node,
//     V_q * P(Bin(n, x_q) >= 2)  <=  V_q * min(1, n^2 x_q^2 / 2),
// splitting nodes at x = sqrt(2)/n into a "quadratic" bucket (left) and a
// "saturated" bucket (right).  Both buckets sample in O(log #nodes) from
// prefix-sum arrays, which is what keeps simulation cost per event flat in n.

class NodeGrid {
public:
    static NodeGrid build(const CoalescenceMeasure& lam, double n_max,
                          double rel_floor = 1e-12) {
        if (n_max < 2.0) n_max = 2.0;
        NodeGrid grid;
        grid.kingman_ = lam.kingman;
        grid.n_max_ = n_max;

        std::vector<double> xs, ws; // density nodes and Lambda-mass weights
        if (lam.density.present()) {
            const double up = lam.density.upper();
            double x_min = lam.density.lower();
            if (x_min <= 0.0) {
                const double budget = rel_floor * std::max(phi(lam, n_max), 1e-300);
                x_min = solve_x_min(lam.density, 0.5 * n_max * n_max, budget, up);
            }
            // panel boundaries: geometric ladders toward both endpoints plus
            // any interpolation knots.  The lower ladder resolves the x^{-2}
            // mass blow-up; the upper one resolves the O(1/n) boundary layer
            // that kernels like x^{k-2}(1-x)^{n-k} develop at the top edge.
            std::vector<double> edges;
            for (double e = up;; e *= 0.5) {
                edges.push_back(e);
                if (e <= x_min) break;
            }
            const double x_lo = edges.back();
            const double u_min = 0.25 * up / n_max;
            for (double u = 0.25 * up; u > u_min; u *= 0.5)
                edges.push_back(up - u);
            for (double k : lam.density.xs)
                if (k > x_lo && k < up) edges.push_back(k);
            std::sort(edges.begin(), edges.end());
            edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
            for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
                const double a = edges[i], b = edges[i + 1];
                const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
                for (int j = 0; j < 16; ++j) {
                    const double x = mid + half * kGl16Node[j];
                    xs.push_back(x);
                    ws.push_back(half * kGl16Weight[j] * lam.density.eval(x));
                }
            }
        }
        for (const auto& a : lam.atoms) {
            xs.push_back(a.x);
            ws.push_back(a.w);
        }
        // sort by position and build the sampling arrays
        std::vector<std::size_t> order(xs.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
        const std::size_t m = order.size();
        grid.x_.resize(m);
        grid.V_.resize(m);
        grid.log1mx_.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double x = xs[order[i]];
            grid.x_[i] = x;
            grid.V_[i] = ws[order[i]] / (x * x);
            grid.log1mx_[i] = std::log1p(-x);
        }
        grid.cum_x2V_.assign(m + 1, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            grid.cum_x2V_[i + 1] =
                grid.cum_x2V_[i] + grid.V_[i] * grid.x_[i] * grid.x_[i];
        // V_q prefix sums only from the lowest index any envelope cut can
        // reach: below that, V_q can overflow for strongly singular densities
        // and is never needed (those nodes always sit in the quadratic bucket)
        const double x_cut_min = std::sqrt(2.0) / (2.0 * n_max);
        grid.cut_min_ = static_cast<std::size_t>(
            std::lower_bound(grid.x_.begin(), grid.x_.end(), x_cut_min) -
            grid.x_.begin());
        grid.cum_V_.assign(m + 1, 0.0);
        for (std::size_t i = grid.cut_min_; i < m; ++i)
            grid.cum_V_[i + 1] = grid.cum_V_[i] + grid.V_[i];
        return grid;
    }

    std::size_t size() const { return x_.size(); }
    double kingman() const { return kingman_; }
    double n_max() const { return n_max_; }
    double x_at(std::size_t q) const { return x_[q]; }
    double v_at(std::size_t q) const { return V_[q]; }

    // P(Bin(n, x_q) >= 2) with the node's cached log(1 - x_q)
    double ctk_at(std::size_t q, double n) const {
        const double x = x_[q];
        const double y = n * x;
        if (y > 45.0) return 1.0; // complement below 1e-18
        if (y <= 0.5) return sf::coal_total_kernel(n, x);
        return -std::expm1((n - 1.0) * log1mx_[q] + std::log1p((n - 1.0) * x));
    }

    // sum_q V_q g(x_q): the grid's value of int g(x) x^{-2} Lambda(dx)
    template <class G>
    double sum_kernel(const G& g) const {
        double s = 0.0;
        for (std::size_t q = 0; q < x_.size(); ++q) s += V_[q] * g(x_[q]);
        return s;
    }

    // exact merge rate of the discretized measure (Kingman excluded)
    double total_rate(double n) const {
        double s = 0.0;
        for (std::size_t q = 0; q < x_.size(); ++q) s += V_[q] * ctk_at(q, n);
        return s;
    }

    struct Envelope {
        double n = 0.0;
        std::size_t cut = 0; // first node with x >= sqrt(2)/n
        double wA = 0.0;     // quadratic bucket: 0.5 n^2 sum_{q<cut} V x^2
        double wB = 0.0;     // saturated bucket: sum_{q>=cut} V
        double total = 0.0;
    };

    Envelope envelope(double n) const {
        Envelope e;
        e.n = n;
        const double xc = std::sqrt(2.0) / n;
        e.cut = static_cast<std::size_t>(
            std::lower_bound(x_.begin(), x_.end(), xc) - x_.begin());
        e.wA = 0.5 * n * n * cum_x2V_[e.cut];
        e.wB = cum_V_[x_.size()] - cum_V_[e.cut];
        e.total = e.wA + e.wB;
        return e;
    }

    std::size_t sample_node(rng::Rng& g, const Envelope& e) const {
        const double u = g.uniform01() * e.total;
        if (u < e.wA || e.wB <= 0.0) {
            const double target =
                std::min(u, e.wA) / (0.5 * e.n * e.n); // in [0, cum_x2V_[cut])
            const auto it = std::upper_bound(cum_x2V_.begin() + 1,
                                             cum_x2V_.begin() +
                                                 static_cast<long>(e.cut) + 1,
                                             target);
            return static_cast<std::size_t>(it - (cum_x2V_.begin() + 1));
        }
        const double target = cum_V_[e.cut] + (u - e.wA);
        const auto it = std::upper_bound(cum_V_.begin() + 1 + static_cast<long>(e.cut),
                                         cum_V_.end(), target);
        std::size_t q = static_cast<std::size_t>(it - (cum_V_.begin() + 1));
        return std::min(q, x_.size() - 1);
    }

    // thinning acceptance: true rate over envelope bound at node q, level n
    double accept_ratio(std::size_t q, double n) const {
        const double bound = std::min(1.0, 0.5 * n * n * x_[q] * x_[q]);
        return ctk_at(q, n) / bound;
    }

    // merge-size row: calls vis(k, w) with w = V_q P(Bin(n,x_q) = k) for every
    // node and every k >= 2 carrying non-negligible probability
    template <class Visit>
    void row_visit(double n, Visit&& vis) const {
        const long nl = static_cast<long>(n);
        for (std::size_t q = 0; q < x_.size(); ++q) {
            const double w = V_[q];
            sf::binom_pmf_window(n, x_[q], 2, nl,
                                 [&](long k, double p) { vis(k, w * p); });
        }
    }

private:
    // largest x with 0.5 n_max^2 * int_0^x f <= budget (density families with
    // support reaching 0); closed-form truncated masses per family
    static double solve_x_min(const measures::Density& f, double half_n2,
                              double budget, double up) {
        auto trunc_mass = [&f, up](double x) -> double {
            switch (f.family) {
                case measures::DensityFamily::Uniform:
                    return f.c * std::min(x, up);
                case measures::DensityFamily::Power:
                    return f.c * std::pow(std::min(x, up), 1.0 - f.beta) /
                           (1.0 - f.beta);
                case measures::DensityFamily::LogSingular:
                    return x >= up
                               ? f.mass()
                               : f.c * f.x0 *
                                     sf::upper_gamma(f.gamma + 1.0,
                                                     std::log(f.x0 / x));
                default: // CustomTable handled by its support lower edge
                    return 0.0;
            }
        };
        double lo = std::log(1e-300), hi = std::log(up);
        if (trunc_mass(std::exp(lo)) * half_n2 > budget) return 1e-300;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (trunc_mass(std::exp(mid)) * half_n2 <= budget ? lo : hi) = mid;
        }
        return std::exp(lo);
    }

    static constexpr double kGl16Node[16] = {
        -0.9894009349916499, -0.9445750230732326, -0.8656312023878318,
        -0.7554044083550030, -0.6178762444026438, -0.4580167776572274,
        -0.2816035507792589, -0.0950125098376374, 0.0950125098376374,
        0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
        0.7554044083550030,  0.8656312023878318,  0.9445750230732326,
        0.9894009349916499};
    static constexpr double kGl16Weight[16] = {
        0.0271524594117541, 0.0622535239386479, 0.0951585116824928,
        0.1246289712555339, 0.1495959888165767, 0.1691565193950025,
        0.1826034150449236, 0.1894506104550685, 0.1894506104550685,
        0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
        0.1246289712555339, 0.0951585116824928, 0.0622535239386479,
        0.0271524594117541};

    std::vector<double> x_, V_, log1mx_;
    std::vector<double> cum_x2V_; // cum_x2V_[j] = sum_{q<j} V_q x_q^2
    std::vector<double> cum_V_;   // cum_V_[j] = sum_{cut_min<=q<j} V_q
    std::size_t cut_min_ = 0;
    double kingman_ = 0.0;
    double n_max_ = 2.0;
};

// ---------------------------------------------------------------------------
// RateTable: exact merge-size distributions for states n <= threshold, built
// on demand from the NodeGrid and kept in an LRU cache.  Above the threshold
// the simulator switches to envelope thinning, so rows are never needed there.

class RateTable {
public:
    struct Row {
        long n = 0;
        double total = 0.0;      // includes the Kingman channel at k = 2
        std::vector<double> cum; // cum[i] = rate of merge sizes <= i + 2

        double rate_at(long k) const {
            if (k < 2 || k > n) return 0.0;
            const std::size_t i = static_cast<std::size_t>(k - 2);
            return i == 0 ? cum[0] : cum[i] - cum[i - 1];
        }

        long sample(rng::Rng& g) const {
            const double u = g.uniform01() * total;
            const auto it = std::upper_bound(cum.begin(), cum.end(), u);
            return std::min<long>(static_cast<long>(it - cum.begin()) + 2, n);
        }
    };

    RateTable(const NodeGrid* grid, long threshold = 2048,
              std::size_t capacity = 4096)
        : grid_(grid), threshold_(threshold), capacity_(capacity) {}

    long threshold() const { return threshold_; }
    std::size_t rows_built() const { return rows_built_; }
    std::size_t evictions() const { return evictions_; }

    const Row& row(long n) {
        if (n < 2 || n > threshold_)
            throw std::invalid_argument("RateTable::row: n outside [2, threshold]");
        auto hit = index_.find(n);
        if (hit != index_.end()) {
            lru_.splice(lru_.begin(), lru_, hit->second);
            return *hit->second;
        }
        if (lru_.size() >= capacity_) {
            index_.erase(lru_.back().n);
            lru_.pop_back();
            ++evictions_;
        }
        lru_.push_front(build_row(n));
        index_[n] = lru_.begin();
        ++rows_built_;
        return lru_.front();
    }

    double total_rate(long n) { return row(n).total; }

private:
    Row build_row(long n) const {
        Row r;
        r.n = n;
        std::vector<double> rate(static_cast<std::size_t>(n - 1), 0.0);
        grid_->row_visit(static_cast<double>(n), [&](long k, double w) {
            rate[static_cast<std::size_t>(k - 2)] += w;
        });
        rate[0] += grid_->kingman() * 0.5 * static_cast<double>(n) *
                   static_cast<double>(n - 1);
        r.cum.resize(rate.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < rate.size(); ++i) {
            acc += rate[i];
            r.cum[i] = acc;
        }
        r.total = acc;
        return r;
    }

    const NodeGrid* grid_;
    long threshold_;
    std::size_t capacity_;
    std::list<Row> lru_;
    std::unordered_map<long, std::list<Row>::iterator> index_;
    std::size_t rows_built_ = 0;
    std::size_t evictions_ = 0;
};

// ---------------------------------------------------------------------------
// theta_estimates: two-sided brackets of theta(n) = sum_k n mu_bar(k)/Phi(n+k)
// on a geometric n-grid.  Certification strategy:
//   * k is cut into geometric blocks whose mu_bar masses are exact differences
//     of ell (ell(n) = sum_{k<=n} mu_bar(k));
//   * Phi is evaluated on a dense geometric cache and bracketed between grid
//     points using two monotonicity facts: Phi increases, and Phi(n)/n is
//     non-decreasing;
//   * the k > K remainder is bounded through Phi(n+k) >= Phi(n+K) (n+k)/(n+K)
//     plus a closed-form tail bound on sum_{k>K} mu_bar(k)/k.

struct ThetaEstimate {
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    bool converged = false;
    double n_used = 0.0;  // largest n at which theta(n) was evaluated
    std::string note;
};

class PhiCache {
public:
    PhiCache(const CoalescenceMeasure& lam, double n_hi, int per_decade = 128) {
        const double r = std::pow(10.0, 1.0 / per_decade);
        double n = 2.0;
        while (true) {
            n_.push_back(n);
            phi_.push_back(phi(lam, n));
            if (n >= n_hi) break;
            n *= r;
        }
    }

    double top() const { return n_.back(); }

    // certified enclosure of Phi(t) for t in [2, top]
    Interval bracket(double t) const {
        if (t <= n_.front()) return {phi_.front() * t / n_.front(), phi_.front()};
        if (t > n_.back())
            throw std::logic_error("PhiCache::bracket: t beyond the cached grid");
        const auto it = std::lower_bound(n_.begin(), n_.end(), t);
        const std::size_t j = static_cast<std::size_t>(it - n_.begin());
        if (n_[j] == t) return {phi_[j], phi_[j]};
        // n_[j-1] < t < n_[j]: Phi increases and Phi(n)/n is non-decreasing, so
        //   Phi(t) >= Phi(n_{j-1}) t / n_{j-1}  and  Phi(t) <= Phi(n_j) t / n_j
        return {phi_[j - 1] * t / n_[j - 1], phi_[j] * t / n_[j]};
    }

private:
    std::vector<double> n_, phi_;
};

namespace detail {

// certified upper bound of sum_{k>K} mu_bar(k)/k (K beyond the pmf head)
inline double mu_bar_over_k_tail_bound(const SplittingMeasure& mu, double K) {
    const double b = mu.tail_b(), alpha = mu.tail_alpha();
    switch (mu.tail()) {
        case measures::TailFamily::None:
            return mu.support_end() > static_cast<long>(K)
                       ? mu.mass() * static_cast<double>(mu.support_end())
                       : 0.0;
        case measures::TailFamily::Power: {
            // mu_bar(k) <= (b/alpha)(k - 1/2)^{-alpha} <= cK (b/alpha) k^{-alpha}
            const double cK = std::pow(1.0 - 0.5 / (K + 1.0), -alpha);
            return cK * (b / alpha) * std::pow(K, -alpha) / alpha;
        }
        case measures::TailFamily::Log: {
            // mu_bar(k) <= b (1 + cfac) (log k)^alpha / k with
            // cfac = 1/(1 - alpha/log K), from Gamma(a,L) <= L^{a-1}e^{-L} cfac
            if (K < 64.0) K = 64.0;
            const double L0 = std::log(K);
            if (L0 <= 1.25 * alpha)
                return std::numeric_limits<double>::infinity(); // K too small
            const double cfac = 1.0 / (1.0 - alpha / L0);
            return (1.0 + cfac) * b *
                   (sf::upper_gamma(alpha + 1.0, L0) +
                    std::pow(std::log(K + 1.0), alpha) / ((K + 1.0) * (K + 1.0)));
        }
        case measures::TailFamily::Geometric: {
            const double r = mu.tail_r();
            return b * std::pow(r, K + 1.0) /
                   ((1.0 - r) * (1.0 - r) * (K + 1.0));
        }
    }
    return 0.0;
}

} // namespace detail

// Enclosure of theta(n) for one n; K is the explicit-sum horizon.
inline Interval theta_at(const SplittingMeasure& mu, const PhiCache& cache,
                         double n, double K) {
    Interval s{0.0, 0.0};
    double k_lo = 1.0;
    const double rb = 1.02;
    while (k_lo <= K) {
        // block of integer jump sizes [k_lo, k_next)
        double k_next = std::min(K + 1.0, std::floor(k_lo * rb) + 1.0);
        if (k_next <= k_lo) k_next = k_lo + 1.0;
        const double block_mass = mu.ell(k_next - 1.0) - mu.ell(k_lo - 1.0);
        if (block_mass > 0.0) {
            const Interval p_lo = cache.bracket(n + k_lo);
            const Interval p_hi = cache.bracket(n + k_next - 1.0);
            s.lo += n * block_mass / p_hi.hi;
            s.hi += n * block_mass / p_lo.lo;
        }
        k_lo = k_next;
    }
    const Interval pK = cache.bracket(n + K);
    s.hi += n * (n + K) / pK.lo * detail::mu_bar_over_k_tail_bound(mu, K);
    return s;
}

inline ThetaEstimate theta_estimates(const CoalescenceMeasure& lam,
                                     const SplittingMeasure& mu,
                                     double n_eval_max = 1e7,
                                     int n_per_decade = 16) {
    ThetaEstimate out;
    if (mu.trivial()) {
        out.lo = out.hi = 0.0;
        out.converged = true;
        out.note = "splitting measure is zero";
        return out;
    }
    if (!lam.has_coagulation()) {
        out.lo = out.hi = std::numeric_limits<double>::infinity();
        out.converged = true;
        out.note = "no coagulation: Phi = 0";
        return out;
    }
    if (n_eval_max < 1e3) n_eval_max = 1e3;
    const double k_factor = 1000.0;
    const PhiCache cache(lam, 1.05 * n_eval_max * (k_factor + 1.0));
    std::vector<double> s_lo, s_hi, ns;
    const double r = std::pow(10.0, 1.0 / n_per_decade);
    for (double n = 100.0; n <= n_eval_max; n *= r) {
        const Interval s = theta_at(mu, cache, n, std::floor(k_factor * n));
        ns.push_back(n);
        s_lo.push_back(s.lo);
        s_hi.push_back(s.hi);
    }
    out.n_used = ns.back();
    // the limit is approached along the tail half of the grid
    const std::size_t half = ns.size() / 2;
    double lo = 0.0, hi = 0.0, lo_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = half; i < ns.size(); ++i) {
        lo = std::max(lo, s_lo[i]);
        hi = std::max(hi, s_hi[i]);
        lo_min = std::min(lo_min, s_lo[i]);
    }
    out.lo = lo;
    out.hi = hi;
    const double spread = hi - lo_min; // bracket width plus drift along tail
    out.converged = spread < 0.05 * std::max(1.0, hi);
    if (!out.converged) {
        const double mid_early = 0.5 * (s_lo[half] + s_hi[half]);
        const double mid_late = 0.5 * (s_lo.back() + s_hi.back());
        if (mid_late > 2.0 * mid_early && mid_late > 1.0)
            out.note = "theta(n) still climbing at n_eval_max: likely divergent";
        else if (mid_late < 0.5 * mid_early)
            out.note = "theta(n) still falling at n_eval_max: likely 0";
        else
            out.note = "bracket not tight at n_eval_max";
    }
    return out;
}

} // namespace rates
} // namespace efc
