#pragma once

#include <optional>
#include <vector>

#include "lsrecover/ls_model.hpp"
#include "lsrecover/types.hpp"

namespace lsr {

struct SvdTriple {
    Matrix U;      // m x k
    Vector sigma;  // k, non-increasing
    Matrix V;      // n x k

    Index rank() const { return sigma.size(); }
    Matrix reconstruct() const;
};

/// Top-k singular triplets of w, 1 <= k <= min(m, n).
SvdTriple truncated_svd(const Matrix& w, Index k);

/// Keeps the s entries of largest magnitude (ties: lowest row-major linear
/// index). Exact zeros among the kept entries are not stored.
SparseMatrix ht_sparse(const Matrix& w, Index s);

struct LowRankPart {
    SvdTriple svd;
    Matrix L;
    double mu_hat = 0.0;     // 0 when r == 0
    bool incoherence_exceeded = false;
};

/// Rank-r truncation of w. The incoherence of the factors is measured and
/// flagged against mu_cap, never enforced. r == 0 yields the zero matrix.
LowRankPart ht_lowrank(const Matrix& w, Index r, double mu_cap);

/// Projects r onto {A + B : col(A) in span(U), supp(B) in omega}. One pass is
/// P_U r + 1_omega o (r - P_U r); further passes apply the same map to the
/// remaining residual and accumulate.
Matrix oblique_project(const Matrix& r, const Matrix& U, const SupportSet& omega, int iters = 1);

struct RpcaResult {
    LowRankPart low;
    SparseMatrix S;
    int alternations = 0;
    bool converged = false;
    /// ||W - L - S||_F after each alternation.
    std::vector<double> residual_trace;

    Matrix dense() const;
};

inline constexpr int kRpcaMaxAlternations = 100;

/// Alternating projection onto LS(r, s, mu): L <- HT(W - S; r), S <- HT(W - L; s)
/// until successive iterates move by at most eps * max(1, ||W||_F).
/// warm_start seeds S before the first low-rank step.
RpcaResult rpca_project(const Matrix& w, Index r, Index s, double mu, double eps,
                        const SparseMatrix* warm_start = nullptr,
                        int max_alternations = kRpcaMaxAlternations);

}  // namespace lsr
