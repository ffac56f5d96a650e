#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace darcy {

/// 64-bit finalizer of the splitmix64 generator; good avalanche, cheap.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Derive an independent sub-stream seed from (seed, a, b). Counter-based:
/// the result depends only on the arguments, never on call order, which keeps
/// parallel sweeps reproducible regardless of scheduling.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ (a * 0xD6E8FEB86659FD93ull + 1));
    h = mix64(h ^ (b * 0xCA5A826395121157ull + 1));
    return h;
}

/// Random stream with hand-rolled distributions.
///
/// std::mt19937_64 output is pinned by the standard, but the standard
/// distributions are not; every variate here is generated from raw 64-bit
/// draws so that identical seeds give bit-identical results on any platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    static Rng stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
        return Rng(derive_seed(seed, a, b));
    }

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform on (0,1]: never returns 0, safe for logs and inverse powers.
    double uniform01() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Shifted Pareto on [1, inf): survival P(X > t) = t^{-shape}.
    double pareto_shifted(double shape) {
        return std::pow(uniform01(), -1.0 / shape);
    }

    double exponential(double rate) { return -std::log(uniform01()) / rate; }

    /// Poisson by inversion for small means, Hormann's PTRS transformed
    /// rejection for large ones. Exact distribution, deterministic stream use.
    std::uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean < 10.0) {
            const double l = std::exp(-mean);
            std::uint64_t k = 0;
            double p = uniform01();
            while (p > l) {
                ++k;
                p *= uniform01();
            }
            return k;
        }
        // PTRS (W. Hormann, 1993).
        const double b = 0.931 + 2.53 * std::sqrt(mean);
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        const double log_mean = std::log(mean);
        for (;;) {
            double u = uniform01() - 0.5;
            double v = uniform01();
            double us = 0.5 - std::abs(u);
            double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            double k = kf;
            if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
                k * log_mean - mean - std::lgamma(k + 1.0)) {
                return static_cast<std::uint64_t>(kf);
            }
        }
    }

  private:
    std::mt19937_64 eng_;
};

} // namespace darcy
