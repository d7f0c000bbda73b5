#pragma once

// Deterministic random-number machinery: xoshiro256++ core, splitmix64
// seeding, and the small set of samplers the simulator needs.  Everything is
// hand-rolled so replica streams are bit-identical across platforms and
// standard-library versions.

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "efc/special.hpp"

namespace efc::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stable 64-bit combine for (root seed, stream index) -> substream seed.
inline std::uint64_t mix_seed(std::uint64_t root, std::uint64_t stream) {
    std::uint64_t s = root ^ (0x517cc1b727220a95ULL * (stream + 1));
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed = 0xefc0ffee12345678ULL) { reseed(seed); }

    static Rng stream(std::uint64_t root, std::uint64_t stream_index) {
        return Rng(mix_seed(root, stream_index));
    }

    void reseed(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform on [0,1) with 53 random bits
    double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

    // uniform on (0,1] - safe to take logs of
    double uniform01_open0() { return 1.0 - uniform01(); }

    double exponential(double rate) {
        return -std::log(uniform01_open0()) / rate;
    }

    double normal() {
        const double u1 = uniform01_open0();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * sf::pi * u2);
    }

    // Marsaglia-Tsang; boosted through shape+1 when shape < 1.
    double gamma(double shape) {
        if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape > 0");
        if (shape < 1.0) {
            const double u = uniform01_open0();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform01_open0();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
        }
    }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

    // Binomial(n, p).  Inversion from the lighter tail when the expected
    // count there is small; otherwise a beta-splitting recursion that needs
    // only O(log n) beta draws, so n up to 1e6+ stays cheap.
    long binomial(long n, double p) {
        if (n <= 0 || p <= 0.0) return 0;
        if (p >= 1.0) return n;
        if (p > 0.5) return n - binomial(n, 1.0 - p);
        if (static_cast<double>(n) * p <= 30.0 || n <= 64) return binom_inversion(n, p);
        const long i = (n + 1) / 2;
        const double x = beta(static_cast<double>(i), static_cast<double>(n + 1 - i));
        if (x <= p) return i + binomial(n - i, (p - x) / (1.0 - x));
        return binomial(i - 1, p / x);
    }

    // Binomial(n, p) conditioned on the outcome being >= 2.  Used after an
    // event has already been accepted with probability P(Bin >= 2), so the
    // conditional law must be sampled even when that probability is tiny.
    long binomial_ge2(long n, double p) {
        if (n < 2) throw std::invalid_argument("binomial_ge2: n >= 2 required");
        if (p >= 1.0) return n;
        const double total = sf::coal_total_kernel(static_cast<double>(n), p);
        if (total > 0.1) {
            // plain rejection is cheap here
            for (;;) {
                const long k = binomial(n, p);
                if (k >= 2) return k;
            }
        }
        // inversion on the conditional pmf, walking up from k = 2
        const double target = uniform01() * total;
        double t = std::exp(sf::log_choose(static_cast<double>(n), 2.0)
                            + 2.0 * std::log(p)
                            + (n - 2.0) * std::log1p(-p));
        double cum = t;
        long k = 2;
        while (cum < target && k < n) {
            t *= (static_cast<double>(n - k) / static_cast<double>(k + 1)) * (p / (1.0 - p));
            cum += t;
            ++k;
        }
        return k;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    long binom_inversion(long n, double p) {
        const double q = 1.0 - p;
        const double ratio = p / q;
        double f = std::exp(n * std::log1p(-p)); // P(K = 0)
        double u = uniform01();
        long k = 0;
        while (u > f && k < n) {
            u -= f;
            f *= ratio * (static_cast<double>(n - k) / static_cast<double>(k + 1));
            ++k;
        }
        return k;
    }

    std::uint64_t s_[4];
};

} // namespace efc::rng
