#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "brp/errors.hpp"
#include "brp/matrix.hpp"

namespace brp {

// Seed for the deterministic generator.  Identical seed and shape yield a
// bit-identical matrix on a given platform (and across platforms sharing a
// libm for log/cos/sin).
struct RandomSeed {
    std::uint64_t value = 0;
};

// SplitMix64: 64-bit state advanced by the golden-ratio increment, output
// finalized by two xor-shift multiplies.  Chosen for trivial portability and
// exact reproducibility; the constants below are load-bearing and the
// selftest guards them against accidental edits.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    // Uniform draw in (0, 1]: 53 mantissa bits, shifted away from zero so a
    // following log() is always finite.
    double next_unit() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

  private:
    std::uint64_t state_;
};

/// Derive a decorrelated child seed for an independent stream (0, 1, ...).
/// Used to give A1/A2 and per-trial pipelines disjoint sequences.
inline RandomSeed derive(RandomSeed seed, std::uint64_t stream) {
    std::uint64_t x = seed.value + 0x9E3779B97F4A7C15ull * (stream + 1);
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return RandomSeed{x ^ (x >> 31)};
}

/// rows x cols matrix of i.i.d. standard normal entries, filled row-major
/// from a Box-Muller transform that consumes both outputs of each pair.
inline DenseMatrix gaussian_matrix(Index rows, Index cols, RandomSeed seed) {
    if (rows < 1 || cols < 1)
        throw shape_error("gaussian_matrix: dimensions must be positive, got " +
                          std::to_string(rows) + "x" + std::to_string(cols));
    DenseMatrix m(rows, cols);
    double* out = m.data();
    const Index total = rows * cols;
    SplitMix64 eng(seed.value);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (Index i = 0; i < total; i += 2) {
        const double u1 = eng.next_unit();
        const double u2 = eng.next_unit();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = two_pi * u2;
        out[i] = radius * std::cos(angle);
        if (i + 1 < total) out[i + 1] = radius * std::sin(angle);
    }
    return m;
}

} // namespace brp
