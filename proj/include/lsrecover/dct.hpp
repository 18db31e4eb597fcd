#pragma once

#include <memory>
#include <span>

#include "lsrecover/types.hpp"

namespace lsr {

/// Orthonormal 1-D DCT-II of fixed length and its inverse (DCT-III), backed
/// by FFTW in O(N log N) for every N. Instances are immutable after
/// construction; forward/inverse may be called concurrently.
class Dct {
public:
    explicit Dct(Index n);
    ~Dct();
    Dct(const Dct&) = delete;
    Dct& operator=(const Dct&) = delete;
    Dct(Dct&&) noexcept;
    Dct& operator=(Dct&&) noexcept;

    Index size() const noexcept { return n_; }

    /// out = H in. in and out must have length size(); they may alias.
    void forward(std::span<const double> in, std::span<double> out) const;
    /// out = H^T in.
    void inverse(std::span<const double> in, std::span<double> out) const;

private:
    struct Plans;
    Index n_ = 0;
    std::unique_ptr<Plans> plans_;
};

}  // namespace lsr
