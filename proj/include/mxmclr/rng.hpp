#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "mxmclr/errors.hpp"

namespace mxmclr {

/// splitmix64 finalizer, used to derive independent seeds from (seed, tag).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic random stream. The generator is mt19937_64 and every
/// output mapping (uniform doubles, Box-Muller gaussians, unbiased bounded
/// integers) is spelled out here rather than delegated to the standard
/// distributions, so a given seed yields the same sequence on every
/// platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; draws two uniforms and caches the
    /// second variate.
    double gaussian() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    /// Uniform integer in [0, n), unbiased via rejection. n = 1 returns 0
    /// without consuming generator state.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw ContractError("Rng::below requires n >= 1");
        if (n == 1) return 0;
        const std::uint64_t threshold = (0ULL - n) % n;  // 2^64 mod n
        for (;;) {
            const std::uint64_t r = gen_();
            if (r >= threshold) return r % n;
        }
    }

    /// Independent stream derived from this stream's original seed and a
    /// tag; unaffected by how much of this stream has been consumed.
    Rng substream(std::uint64_t tag) const { return Rng(mix_seed(seed_, tag)); }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace mxmclr
