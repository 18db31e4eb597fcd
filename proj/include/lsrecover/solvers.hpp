#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lsrecover/measurement.hpp"
#include "lsrecover/projections.hpp"
#include "lsrecover/types.hpp"

namespace lsr {

struct SolverConfig {
    int max_iters = 300;
    double rel_residual_tol = 1e-6;
    int stagnation_window = 15;
    double stagnation_ratio = 0.999;
    double rpca_eps = 1e-8;
    int oblique_iters = 1;
    std::uint64_t seed = 0;

    /// Throws InvalidInput unless tolerances are positive and window >= 2.
    void validate() const;
};

enum class Termination {
    Continue,
    ResidualTol,
    Stagnation,
    MaxIters,
    /// The projected residual vanished, so no descent direction is left.
    Stationary,
    /// Convex solver only: stopped on small relative objective change.
    ObjectiveTol,
};

std::string to_string(Termination t);

/// Residual-based stopping rule on trace[k] = ||A(X^k) - b||_2:
/// ResidualTol when the last entry is <= rel_residual_tol * b_norm,
/// Stagnation when (trace[l] / trace[l - w])^(1/w) > stagnation_ratio,
/// MaxIters when trace.size() - 1 >= max_iters.
Termination check_termination(std::span<const double> trace, double b_norm, const SolverConfig& cfg);

/// Per-iteration snapshot passed to an optional observer.
struct IterateView {
    int iteration = 0;
    double elapsed_seconds = 0.0;
    const Matrix& L;
    const SparseMatrix& S;
    double residual = 0.0;
};

using IterationObserver = std::function<void(const IterateView&)>;

struct SolverReport {
    std::string solver;
    Matrix L;
    SparseMatrix S;
    Matrix X;
    int iterations = 0;
    std::vector<double> residual_trace;   // iterations + 1 entries
    std::vector<double> stepsize_trace;   // NIHT: alpha_j
    std::vector<double> stepsize_trace_sparse;  // NAHT: alpha_j^S (alpha_j^L goes in stepsize_trace)
                                                // a half-step skipped for a zero budget records 0
    std::vector<double> objective_trace;  // convex solver only
    double wall_time = 0.0;
    Termination termination = Termination::Continue;
    double b_norm = 0.0;
    /// Diagnostics from the final low-rank factor: incoherence and the
    /// derived constants gamma = mu 4r sqrt(2s)/sqrt(mn), gamma2 = mu 2r sqrt(2s)/sqrt(mn).
    double mu_hat = 0.0;
    double gamma = 0.0;
    double gamma2 = 0.0;
    int incoherence_flags = 0;  // iterations whose low-rank factor exceeded mu
    bool converged = false;     // convex solver: stopped before max_iters
};

/// Normalized iterative hard thresholding with a full RPCA projection per step.
SolverReport niht(const Vector& b, const MeasurementOp& op, Index r, Index s, double mu,
                  const SolverConfig& cfg, const IterationObserver& observer = {});

/// Normalized alternating hard thresholding: separate low-rank and sparse half-steps.
SolverReport naht(const Vector& b, const MeasurementOp& op, Index r, Index s, double mu,
                  const SolverConfig& cfg, const IterationObserver& observer = {});

struct ConvexConfig {
    int max_iters = 2000;        // total proximal sweeps
    int inner_iters = 50;        // sweeps per outer (residual add-back) round
    double objective_tol = 1e-7; // relative objective change ending an inner round
    double rel_residual_tol = 1e-6;
    double beta_scale = 10.0;
};

struct ConvexResult {
    Matrix L;
    SparseMatrix S;
    SolverReport report;
    double lambda = 0.0;
    double beta = 0.0;
    /// ||A(L+S) - b|| at the end of every outer round.
    std::vector<double> outer_residuals;
};

/// Convex relaxation min ||L||_* + lambda ||S||_1 s.t. ||A(L+S) - b|| <= eps_b,
/// lambda = sqrt(2 max(r_hint, 1) / s_hint). Solved by block proximal
/// gradient on the penalized form with a fixed beta, wrapped in residual
/// add-back rounds so the constraint is met in the limit. s_hint == 0 drops
/// the sparse term.
ConvexResult convex_relax(const Vector& b, const MeasurementOp& op, Index r_hint, Index s_hint,
                          double eps_b, const ConvexConfig& cfg = {},
                          const IterationObserver& observer = {});

/// Largest singular value of the operator by power iteration on A*A.
double operator_norm(const MeasurementOp& op, int iters = 100, std::uint64_t seed = 1);

}  // namespace lsr
