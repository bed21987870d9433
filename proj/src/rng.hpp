#pragma once

#include <cmath>
#include <cstdint>

#include "constants.hpp"

namespace trapsim {

// Counter-based keyed RNG. Every logical noise source (atom, pixel,
// detection event) owns its stream derived from (seed, indices), so results
// cannot depend on evaluation order or thread count.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a,
                                std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = mix64(seed ^ 0x6A09E667F3BCC909ull);
    h = mix64(h ^ (a * 0x9E3779B97F4A7C15ull));
    h = mix64(h ^ (b * 0xC2B2AE3D27D4EB4Full));
    h = mix64(h ^ (c * 0x165667B19E3779F9ull));
    return h;
}

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform on the open interval (0, 1); never returns 0 or 1, so it is
    // safe under log().
    double uniform01() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    double exponential() { return -std::log(uniform01()); }

    double normal() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }

    long poisson(double lambda);
    long binomial(long n, double p);

private:
    std::uint64_t state_;
};

} // namespace trapsim
