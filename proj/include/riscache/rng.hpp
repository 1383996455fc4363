#pragma once

#include <complex>
#include <cstdint>
#include <cmath>

namespace riscache {

/// Counter-based deterministic generator. Streams are derived by mixing the
/// master seed with (stream, counter) indices, so adding experiment points
/// never perturbs the draws of existing ones. Bit-identical across runs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(mix(seed ^ 0x9e3779b97f4a7c15ULL)) {}

    /// Derive an independent sub-stream from (seed, stream, counter).
    static Rng derive(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
        std::uint64_t s = mix(seed);
        s = mix(s ^ mix(stream + 0x632be59bd9b4e019ULL));
        s = mix(s ^ mix(counter + 0xd1b54a32d192ed03ULL));
        return Rng(s);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (pairs cached).
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double phi = 2.0 * M_PI * u2;
        cached_ = r * std::sin(phi);
        have_cached_ = true;
        return r * std::cos(phi);
    }

    /// Circularly symmetric complex normal CN(0, 1).
    std::complex<double> cgaussian() {
        const double inv_sqrt2 = 0.7071067811865475244;
        double re = gaussian();
        double im = gaussian();
        return {re * inv_sqrt2, im * inv_sqrt2};
    }

private:
    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace riscache
