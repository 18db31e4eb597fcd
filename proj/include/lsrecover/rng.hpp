#pragma once

#include <cstdint>
#include <random>

namespace lsr {

/// SplitMix64 finalizer. Used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Mixes several 64-bit words into one seed; order matters.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept;
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) noexcept;

/// The single random source used everywhere: a 64-bit Mersenne Twister with
/// locally defined transforms (53-bit uniforms, Lemire bounded integers,
/// Marsaglia polar Gaussians), so a seed pins every draw within a build.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform01();
    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    /// Uniform integer on [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound);
    /// Standard normal.
    double normal();
    /// +1 or -1 with equal probability.
    double sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace lsr
