// Deterministic counter-based random generator. Every stochastic choice in
// the simulator (init, shuffling, noise, availability) draws from an Rng
// seeded through derive_seed, so runs are reproducible bit-for-bit and
// independent of host parallelism. Standard-library distributions are
// avoided on purpose: their output is implementation-defined.
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace fedsim {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Mixes stream identifiers (client id, round, purpose tag) into a master
// seed. Each id is whitened through the splitmix64 finalizer (a bijection)
// before being folded in, so dense grids of small integers (user seeds x
// client ids x rounds) cannot alias. Order-sensitive, so
// derive_seed({a,b}) != derive_seed({b,a}).
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> ids) {
    std::uint64_t s = master;
    for (std::uint64_t id : ids) {
        std::uint64_t t = id;
        std::uint64_t state = s ^ splitmix64(t);
        s = splitmix64(state);
    }
    return s;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t id) {
    return derive_seed(master, {id});
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Standard normal via Box-Muller; the paired draw is cached.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    // Marsaglia-Tsang; supports any alpha > 0 (the alpha < 1 case boosts
    // through gamma(alpha + 1)).
    double gamma(double alpha) {
        if (alpha < 1.0) {
            const double u = uniform();
            return gamma(alpha + 1.0) * std::pow(u > 0.0 ? u : 0x1.0p-53, 1.0 / alpha);
        }
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // Proportions summing to 1, drawn Dirichlet(alpha,...,alpha).
    std::vector<double> dirichlet(double alpha, std::size_t k) {
        std::vector<double> draws(k);
        double total = 0.0;
        for (auto& g : draws) {
            g = gamma(alpha);
            total += g;
        }
        if (total <= 0.0) {
            for (auto& g : draws) g = 1.0 / static_cast<double>(k);
            return draws;
        }
        for (auto& g : draws) g /= total;
        return draws;
    }

    // In-place Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace fedsim
