#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "qcl/errors.hpp"

namespace qcl {

// Seeded random source used everywhere instead of <random> distributions.
// The standard only pins down the engines; distribution output is
// implementation-defined, which would break byte-identical replays across
// toolchains. All transforms are therefore done by hand on top of
// mt19937_64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // Uniform on [0, 1) with 53 random mantissa bits.
    double uniform01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Uniform on [0, n). Modulo bias is below 2^-53 for any n that fits
    // in a container size, which is far under anything we can observe.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0)
            throw invalid_argument("uniform_int: n must be positive");
        return eng_() % n;
    }

    // Standard normal via Box-Muller; the second deviate of each pair is
    // cached so consecutive calls consume one engine pair on average.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01(); // (0, 1], keeps log() finite
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace qcl
