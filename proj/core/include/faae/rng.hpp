#pragma once

#include <cstdint>
#include <vector>

#include "faae/matrix.hpp"

namespace faae {

/// Seeded random stream with a fixed algorithm (splitmix64 for the integer
/// sequence, Box-Muller for normals) so sequences depend on nothing but the
/// seed. Identical seed gives an identical sample sequence on every run.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), state_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// splitmix64 step.
    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased uniform integer in [0, n), n > 0. Rejection sampling keeps the
    /// draw exact for any n.
    std::uint64_t uniform_below(std::uint64_t n);

    /// One standard-normal draw (Box-Muller; the paired value is cached).
    double normal();

    /// Fresh stream for an independent unit of work (bootstrap replicate,
    /// sweep cell). The derived seed is a hash of (seed, index) so streams
    /// stay disjoint even when callers use adjacent base seeds.
    RngStream derive(std::uint64_t index) const;

private:
    std::uint64_t seed_;
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// n independent standard-normal draws, advancing the stream.
Vec sample_standard_normal(RngStream& rng, std::size_t n);

}  // namespace faae
