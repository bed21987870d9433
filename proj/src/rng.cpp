#include "rng.hpp"

#include "errors.hpp"

namespace trapsim {

namespace {

long poisson_knuth(SplitMix64& rng, double lambda) {
    const double limit = std::exp(-lambda);
    long k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= rng.uniform01();
    } while (p > limit);
    return k - 1;
}

// Transformed-rejection sampler (Hormann's PTRS), valid for lambda >= 10.
long poisson_ptrs(SplitMix64& rng, double lambda) {
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.uniform01() - 0.5;
        double v = rng.uniform01();
        const double us = 0.5 - std::abs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<long>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            kf * loglam - lambda - std::lgamma(kf + 1.0)) {
            return static_cast<long>(kf);
        }
    }
}

} // namespace

long SplitMix64::poisson(double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw InvalidArgument("poisson: mean must be finite and non-negative");
    }
    if (lambda == 0.0) return 0;
    if (lambda < 10.0) return poisson_knuth(*this, lambda);
    return poisson_ptrs(*this, lambda);
}

long SplitMix64::binomial(long n, double p) {
    if (n < 0 || !(p >= 0.0 && p <= 1.0)) {
        throw InvalidArgument("binomial: need n >= 0 and p in [0, 1]");
    }
    if (p == 0.0 || n == 0) return 0;
    if (p == 1.0) return n;
    long k = 0;
    for (long i = 0; i < n; ++i) {
        if (uniform01() < p) ++k;
    }
    return k;
}

} // namespace trapsim
