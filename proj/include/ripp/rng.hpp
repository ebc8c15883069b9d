#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace ripp {

// Counter-style key derivation (splitmix64 finalizer).  All parallel work in
// the engine draws from substreams keyed by (master seed, iteration index),
// so results do not depend on thread scheduling.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_key(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 1)) ^ mix64(b));
}

// xoshiro256++ seeded through splitmix64.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = mix64(s++);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }

    result_type operator()() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

inline Rng substream(std::uint64_t master, std::uint64_t index) {
    return Rng(derive_key(master, index));
}

inline Rng substream(std::uint64_t master, std::uint64_t index, std::uint64_t salt) {
    return Rng(derive_key(derive_key(master, index), salt));
}

// Uniform double in [0, 1).
inline double runif01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool rbernoulli(Rng& rng, double p) {
    return runif01(rng) < p;
}

// Uniform integer in [0, n).  Lemire's multiply-shift with rejection.
inline std::uint64_t rbelow(Rng& rng, std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(rng()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
        const std::uint64_t threshold = -n % n;
        while (lo < threshold) {
            m = static_cast<unsigned __int128>(rng()) * n;
            lo = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

// Standard normal via Marsaglia's polar method (stateless, one value per call).
inline double rnorm(Rng& rng) {
    for (;;) {
        const double u = 2.0 * runif01(rng) - 1.0;
        const double v = 2.0 * runif01(rng) - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
}

// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 boosted through shape + 1.
inline double rgamma(Rng& rng, double shape) {
    if (shape < 1.0) {
        const double u = 1.0 - runif01(rng);  // (0, 1]
        return rgamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double x = rnorm(rng);
        const double t = 1.0 + c * x;
        if (t <= 0.0) continue;
        const double v = t * t * t;
        const double u = runif01(rng);
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

inline double rbeta(Rng& rng, double a, double b) {
    const double ga = rgamma(rng, a);
    const double gb = rgamma(rng, b);
    const double sum = ga + gb;
    return sum > 0.0 ? ga / sum : 0.5;
}

// Dirichlet draw; out and alpha have the same length.
inline void rdirichlet(Rng& rng, std::span<const double> alpha, std::span<double> out) {
    double sum = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        out[i] = rgamma(rng, alpha[i]);
        sum += out[i];
    }
    if (sum <= 0.0) {  // cannot happen with positive alphas short of total underflow
        const double flat = 1.0 / static_cast<double>(alpha.size());
        for (auto& v : out) v = flat;
        return;
    }
    for (auto& v : out) v /= sum;
}

// Binomial(n, p).  Small n counts Bernoullis; otherwise the pmf is enumerated
// outward from the mode (expected O(sqrt(n p q)) terms), which stays exact for
// the large skewed groups seen in by-pattern Gibbs updates.
inline long rbinom(Rng& rng, long n, double p) {
    if (n <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    if (n <= 32) {
        long s = 0;
        for (long i = 0; i < n; ++i) s += rbernoulli(rng, p) ? 1 : 0;
        return s;
    }
    const bool flip = p > 0.5;
    const double q = flip ? 1.0 - p : p;
    const auto nd = static_cast<double>(n);
    const long mode = static_cast<long>(std::floor((nd + 1.0) * q));
    const double log_pmf_mode = std::lgamma(nd + 1.0) - std::lgamma(static_cast<double>(mode) + 1.0) -
                                std::lgamma(nd - static_cast<double>(mode) + 1.0) +
                                static_cast<double>(mode) * std::log(q) +
                                (nd - static_cast<double>(mode)) * std::log1p(-q);
    const double odds = q / (1.0 - q);
    const double u = runif01(rng);
    long lo = mode, hi = mode;
    double p_lo = std::exp(log_pmf_mode), p_hi = p_lo;
    double acc = p_lo;
    long k = mode;
    while (acc < u && (lo > 0 || hi < n)) {
        if (hi < n) {
            p_hi *= (nd - static_cast<double>(hi)) / (static_cast<double>(hi) + 1.0) * odds;
            ++hi;
            acc += p_hi;
            if (acc >= u) { k = hi; break; }
        }
        if (lo > 0) {
            p_lo *= static_cast<double>(lo) / (nd - static_cast<double>(lo) + 1.0) / odds;
            --lo;
            acc += p_lo;
            if (acc >= u) { k = lo; break; }
        }
    }
    return flip ? n - k : k;
}

}  // namespace ripp
