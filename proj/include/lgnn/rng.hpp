#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace lgnn {

/// Deterministic random source used by every generator in the library.
///
/// The engine is std::mt19937_64 seeded directly with the 64-bit seed. The
/// engine's output sequence is fixed by the C++ standard; the conversions to
/// uniform and normal variates are implemented here (not via <random>
/// distributions, whose algorithms are implementation-defined) so that a
/// given seed yields the same graphs and features on every toolchain.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// True with probability p. p = 0 never fires, p = 1 always fires.
    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, bound) by rejection, free of modulo bias.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace lgnn
