#ifndef WLCB_MATH_RNG_HPP
#define WLCB_MATH_RNG_HPP

#include <cmath>
#include <cstdint>

namespace wlcb {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Self-contained xoshiro256++ generator. Sampling routines are written out
// explicitly (no std::*_distribution) so that a fixed seed produces the same
// stream on every platform we build on.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) {
            s = splitmix64(s);
            w = s;
        }
        spare_valid_ = false;
    }

    // Independent substream: used for per-replication / per-task generators.
    Rng(std::uint64_t seed, std::uint64_t stream)
        : Rng(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

    std::uint64_t next_u64() {
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

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // Marsaglia polar method; one spare kept per instance.
    double normal() {
        if (spare_valid_) {
            spare_valid_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        spare_valid_ = true;
        return u * f;
    }

    // Y = mu - sigma or mu + sigma, each with probability 1/2.
    double two_point(double mu, double sigma) {
        return bernoulli(0.5) ? mu + sigma : mu - sigma;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool spare_valid_ = false;
};

}  // namespace wlcb

#endif
