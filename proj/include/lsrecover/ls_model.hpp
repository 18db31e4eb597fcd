#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "lsrecover/types.hpp"

namespace lsr {

/// Problem dimensions and budgets for the low-rank plus sparse set LS(r, s, mu).
struct ModelParams {
    Index m = 0;
    Index n = 0;
    Index p = 0;   // number of measurements
    Index r = 0;   // rank budget
    Index s = 0;   // sparsity budget
    double mu = 1.0;

    /// Throws InvalidInput on hard violations (dimensions, budgets). Returns a
    /// warning message when mu is at or beyond the closedness margin, which
    /// is reported but never rejected.
    std::optional<std::string> validate() const;

    /// sqrt(mn) / (r sqrt(s)); +inf when r == 0 or s == 0.
    double closedness_margin() const;

    double delta() const { return static_cast<double>(p) / static_cast<double>(m * n); }
    double rho_r() const { return static_cast<double>(r * (m + n - r)) / static_cast<double>(p); }
    double rho_s() const { return static_cast<double>(s) / static_cast<double>(p); }
};

/// Explicit (L, S) decomposition: L = U diag(sigma) V^T plus a sparse S.
struct LsPair {
    Matrix U;       // m x r, orthonormal columns
    Vector sigma;   // r, non-increasing
    Matrix V;       // n x r, orthonormal columns
    SparseMatrix S;
    Index s_budget = 0;
    double mu_cap = 1.0;

    Index m() const { return U.rows(); }
    Index n() const { return V.rows(); }
    Index r() const { return U.cols(); }

    Matrix low_rank() const;
    Matrix dense() const;

    /// Throws InvalidInput if any structural invariant fails.
    void check_invariants(double tol = 1e-10) const;
};

/// mu_hat = max((m/r) max_i |U^T e_i|^2, (n/r) max_j |V^T f_j|^2).
/// Throws InvalidInput if U or V departs from orthonormality by more than 1e-8.
double measured_incoherence(const Matrix& U, const Matrix& V);

struct ClosednessBounds {
    double mu_max = 0.0;
    double tau = 1.0;  // norm inflation (1 - mu^2 r^2 s / mn)^(-1/2)
};

/// Throws OutOfRegime (carrying mu_max) when params.mu >= mu_max. With s == 0
/// or r == 0 there is no cross term and tau == 1.
ClosednessBounds closedness_bounds(const ModelParams& params);

/// tau evaluated for an arbitrary incoherence value; nullopt out of regime.
std::optional<double> norm_inflation(Index m, Index n, Index r, Index s, double mu);

struct CorrelationBound {
    double general_bound = 0.0;  // ||abs(U) abs(V^T)||_max * sigma_max(L) * ||S||_1
    double mu_bound = 0.0;       // mu_hat * r sqrt(s) / sqrt(mn) * ||L||_F ||S||_F
    double actual = 0.0;         // |<L, S>|
    double mu_hat = 0.0;
    Index rank = 0;
};

/// rank is the number of singular values above max(m,n) * eps * sigma_1
/// unless given explicitly. s in mu_bound is the number of stored entries.
CorrelationBound rank_sparsity_correlation_bound(const Matrix& L, const SparseMatrix& S,
                                                 std::optional<Index> rank = std::nullopt);

struct Problem {
    Matrix L0;
    SparseMatrix S0;
    Matrix X0;
    double mu_hat = 0.0;     // measured incoherence of L0; 0 when r == 0
    double amplitude = 0.0;  // half-width c of the sparse value interval
};

/// L0 = U V^T with standard normal U (m x r), V (n x r); S0 on a uniform
/// s-subset of positions with values uniform on [-c, c], c = mean |L0_ij|
/// (c = 1 when L0 is zero); X0 = L0 + S0. Deterministic in (params, seed).
Problem generate_problem(const ModelParams& params, std::uint64_t seed);

/// p = round(delta mn), s = floor(rho_s p), r = largest integer with
/// r(m + n - r) <= rho_r p.
ModelParams params_from_ratios(Index m, Index n, double delta, double rho_r, double rho_s,
                               double mu = 0.0);

}  // namespace lsr
