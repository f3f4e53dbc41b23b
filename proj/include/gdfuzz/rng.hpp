#pragma once

#include <cstdint>
#include <random>

namespace gdfuzz {

/// Seeded random stream with a fixed, engine-independent draw encoding.
/// All stochastic operations in the project consume exactly one logical
/// draw per documented decision point, so runs with equal seeds replay
/// byte-identically.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform double in [0, 1), 53 mantissa bits.
    double next_double() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform index in [0, n). n must be > 0.
    std::size_t next_index(std::size_t n) {
        const std::uint64_t span = n;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t v = eng_();
        while (v >= limit) v = eng_();
        return static_cast<std::size_t>(v % span);
    }

private:
    std::mt19937_64 eng_;
};

} // namespace gdfuzz
