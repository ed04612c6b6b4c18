#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace gpvol {

/// Seedable random stream.
///
/// Wraps mt19937_64 and derives uniforms/indices with fixed arithmetic
/// instead of <random> distributions, whose output is implementation-defined.
/// The same seed therefore yields the same stream on every toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0, 1).
    double uniform_open() {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return u;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t index(std::size_t n) {
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % bound);
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal by inverse-CDF transform of one uniform draw.
    double normal();

private:
    std::mt19937_64 engine_;
};

}  // namespace gpvol
