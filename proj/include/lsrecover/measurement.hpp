#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lsrecover/types.hpp"

namespace lsr {

enum class OperatorKind { Gaussian, Fjlt };

std::string to_string(OperatorKind kind);
/// Accepts "gaussian" and "fjlt" (case-insensitive).
OperatorKind operator_kind_from_string(const std::string& name);

/// Everything needed to rebuild an operator; the payload is regenerated from seed.
struct OperatorSpec {
    OperatorKind kind = OperatorKind::Gaussian;
    Index m = 0;
    Index n = 0;
    Index p = 0;
    std::uint64_t seed = 0;
};

/// Linear map A: R^{m x n} -> R^p with adjoint. Immutable and cheap to copy;
/// copies share the payload.
class MeasurementOp {
public:
    OperatorKind kind() const;
    Index m() const;
    Index n() const;
    Index p() const;
    std::uint64_t seed() const;
    OperatorSpec spec() const;

    Vector apply(const Matrix& x) const;
    Matrix adjoint(const Vector& y) const;

    /// Gaussian payload: p x mn, row l is vec(A^(l)). Throws for FJLT.
    const Matrix& sensing_rows() const;
    /// FJLT payload: signs d, sorted selected rows R, and the scale sqrt(mn/p).
    const std::vector<double>& signs() const;
    const std::vector<Index>& selection() const;
    double scale() const;

    struct Impl;

private:
    explicit MeasurementOp(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;

    friend MeasurementOp make_gaussian(Index, Index, Index, std::uint64_t);
    friend MeasurementOp make_fjlt(Index, Index, Index, std::uint64_t);
};

/// Entries of every sensing matrix i.i.d. N(0, 1/p).
MeasurementOp make_gaussian(Index m, Index n, Index p, std::uint64_t seed);
/// A(X) = sqrt(mn/p) R H D vec(X) with orthonormal DCT-II H, random signs D and
/// p rows R drawn uniformly without replacement.
MeasurementOp make_fjlt(Index m, Index n, Index p, std::uint64_t seed);
MeasurementOp make_operator(const OperatorSpec& spec);

/// Estimates ||A(X)||^2 / ||X||_F^2 ratio statistics.
struct IsometryStats {
    std::size_t trials = 0;
    double worst_lower = 0.0;
    double worst_upper = 0.0;
    double mean_ratio = 0.0;
    double delta_hat = 0.0;  // max(1 - worst_lower, worst_upper - 1)
};

/// Draws trials matrices from sampler(t), normalizes each to unit Frobenius
/// norm and records the distortion of op. Zero samples are skipped.
IsometryStats near_isometry_stats(const MeasurementOp& op,
                                  const std::function<Matrix(std::size_t)>& sampler,
                                  std::size_t trials);

struct RicEstimate {
    double delta_hat = 0.0;
    IsometryStats stats;
    std::size_t rejected = 0;  // samples whose measured incoherence exceeded mu
};

/// Monte-Carlo lower bound on the (r, s, mu) restricted isometry constant
/// from synthetic LS(r, s, mu) samples. Sample t uses seed mix_seed(seed, t),
/// so a longer run extends a shorter one and delta_hat can only grow.
RicEstimate empirical_ric(const MeasurementOp& op, Index r, Index s, double mu,
                          std::size_t trials, std::uint64_t seed);

}  // namespace lsr
