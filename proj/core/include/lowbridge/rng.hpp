#pragma once

#include <cmath>
#include <cstdint>

namespace lowbridge {

// PCG32: small deterministic generator with independent streams. Used for
// parameter init, data synthesis, shuffling and augmentation sampling so that
// results do not depend on the standard library's distribution internals.
class Pcg32 {
public:
    Pcg32() : Pcg32(0x853c49e6748fea9bULL, 0xda3e39cb94b95bdbULL) {}

    Pcg32(std::uint64_t seed, std::uint64_t stream) {
        state_ = 0u;
        inc_ = (stream << 1u) | 1u;
        next_u32();
        state_ += seed;
        next_u32();
    }

    std::uint32_t next_u32() {
        std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        std::uint32_t xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u32()) * (1.0 / 4294967296.0);
    }

    float next_float() { return static_cast<float>(next_double()); }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n).
    std::uint32_t next_below(std::uint32_t n) {
        if (n == 0) return 0;
        return static_cast<std::uint32_t>(next_double() * n) % n;
    }

    // Standard normal via Box-Muller. Stateless across calls (no spare cached)
    // so the draw sequence is a pure function of the u32 stream.
    double normal() {
        double u1 = 0.0;
        do {
            u1 = next_double();
        } while (u1 <= 1e-12);
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    std::uint64_t state_;
    std::uint64_t inc_;
};

// Mixer for deriving per-(epoch, sample) streams from one run seed.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

} // namespace lowbridge
