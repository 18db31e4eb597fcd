#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/QR>

#include "lsrecover/ls_model.hpp"
#include "lsrecover/projections.hpp"
#include "lsrecover/rng.hpp"

using namespace lsr;

namespace {

Matrix random_matrix(Index m, Index n, Rng& rng) {
    Matrix x(m, n);
    for (Index k = 0; k < x.size(); ++k) x.data()[k] = rng.normal();
    return x;
}

// Eigenvalues of W^T W by cyclic Jacobi rotations in long double.
std::vector<long double> gram_eigenvalues(const Matrix& w) {
    const Index n = w.cols();
    std::vector<std::vector<long double>> a(n, std::vector<long double>(n, 0.0L));
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            for (Index k = 0; k < w.rows(); ++k)
                a[i][j] += static_cast<long double>(w(k, i)) * static_cast<long double>(w(k, j));
    for (int sweep = 0; sweep < 100; ++sweep) {
        long double off = 0.0L;
        for (Index p = 0; p < n; ++p)
            for (Index q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-60L) break;
        for (Index p = 0; p < n; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0L) continue;
                const long double theta = (a[q][q] - a[p][p]) / (2.0L * a[p][q]);
                const long double t = (theta >= 0 ? 1.0L : -1.0L) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0L));
                const long double c = 1.0L / std::sqrt(t * t + 1.0L), s = t * c;
                for (Index k = 0; k < n; ++k) {
                    const long double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (Index k = 0; k < n; ++k) {
                    const long double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<long double> eig(n);
    for (Index i = 0; i < n; ++i) eig[i] = a[i][i];
    std::sort(eig.begin(), eig.end(), std::greater<>());
    return eig;
}

double best_sparse_residual(const Matrix& w, Index s) {
    // Exhaustive: every support of exactly s positions.
    const Index mn = w.size();
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 0; mask < (1u << mn); ++mask) {
        if (std::popcount(mask) != static_cast<int>(s)) continue;
        double res = 0.0;
        for (Index k = 0; k < mn; ++k)
            if (!(mask & (1u << k))) res += w.data()[k] * w.data()[k];
        best = std::min(best, res);
    }
    return best;
}

Matrix orthonormal(Index m, Index r, Rng& rng) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd(random_matrix(m, r, rng)));
    return Eigen::MatrixXd(qr.householderQ()).leftCols(r);
}

}  // namespace

TEST(TruncatedSvd, EckartYoungAgainstJacobiOracle) {
    Rng rng(1);
    for (int t = 0; t < 50; ++t) {
        const Matrix w = random_matrix(8, 6, rng);
        const auto eig = gram_eigenvalues(w);
        for (Index k : {1, 2, 3}) {
            const SvdTriple svd = truncated_svd(w, k);
            ASSERT_EQ(svd.rank(), k);
            long double tail = 0.0L;
            for (std::size_t i = static_cast<std::size_t>(k); i < eig.size(); ++i) tail += eig[i];
            const double expected = std::sqrt(static_cast<double>(tail));
            const double residual = (w - svd.reconstruct()).norm();
            EXPECT_NEAR(residual, expected, 1e-9 * expected);
            for (Index i = 0; i < k; ++i)
                EXPECT_NEAR(svd.sigma(i), std::sqrt(static_cast<double>(eig[static_cast<std::size_t>(i)])), 1e-9 * svd.sigma(0));
        }
    }
}

TEST(TruncatedSvd, FactorsAreOrthonormalAndSorted) {
    Rng rng(2);
    const Matrix w = random_matrix(9, 7, rng);
    const SvdTriple svd = truncated_svd(w, 4);
    EXPECT_LT((svd.U.transpose() * svd.U - Matrix::Identity(4, 4)).norm(), 1e-12);
    EXPECT_LT((svd.V.transpose() * svd.V - Matrix::Identity(4, 4)).norm(), 1e-12);
    for (Index i = 1; i < 4; ++i) EXPECT_GE(svd.sigma(i - 1), svd.sigma(i));
}

TEST(TruncatedSvd, RejectsBadRank) {
    const Matrix w = Matrix::Ones(3, 4);
    EXPECT_THROW(truncated_svd(w, 0), InvalidInput);
    EXPECT_THROW(truncated_svd(w, 4), InvalidInput);
}

TEST(HtSparse, OptimalOnAllSmallSupports) {
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
        const Matrix w = random_matrix(3, 3, rng);
        for (Index s = 1; s <= 9; ++s) {
            const SparseMatrix kept = ht_sparse(w, s);
            ASSERT_LE(kept.nnz(), static_cast<std::size_t>(s));
            for (const auto& e : kept.entries()) ASSERT_EQ(e.value, w(e.row, e.col));
            const double residual = (w - kept.to_dense()).squaredNorm();
            ASSERT_NEAR(residual, best_sparse_residual(w, s), 1e-12);
        }
    }
}

TEST(HtSparse, TiesKeepLowestIndex) {
    Matrix w(2, 2);
    w << 1, -1, 1, 0.5;
    const SparseMatrix kept = ht_sparse(w, 2);
    ASSERT_EQ(kept.nnz(), 2u);
    EXPECT_EQ(kept.entries()[0].row * 2 + kept.entries()[0].col, 0);
    EXPECT_EQ(kept.entries()[1].row * 2 + kept.entries()[1].col, 1);
}

TEST(HtSparse, ZerosAreNotStored) {
    Matrix w = Matrix::Zero(3, 3);
    w(1, 1) = 2.0;
    EXPECT_EQ(ht_sparse(w, 4).nnz(), 1u);
    EXPECT_EQ(ht_sparse(w, 0).nnz(), 0u);
    EXPECT_EQ(ht_sparse(w, 9).support().size(), 1u);
}

TEST(HtLowrank, ZeroRankAndIncoherenceFlag) {
    Rng rng(4);
    const Matrix w = random_matrix(5, 5, rng);
    const LowRankPart zero = ht_lowrank(w, 0, 5.0);
    EXPECT_TRUE(zero.L.isZero(0));
    EXPECT_EQ(zero.mu_hat, 0.0);

    Matrix spike = Matrix::Zero(6, 6);
    spike(2, 3) = 1.0;
    const LowRankPart coherent = ht_lowrank(spike, 1, 2.0);
    EXPECT_NEAR(coherent.mu_hat, 6.0, 1e-12);
    EXPECT_TRUE(coherent.incoherence_exceeded);
    EXPECT_LT((coherent.L - spike).norm(), 1e-12);
    EXPECT_FALSE(ht_lowrank(spike, 1, 6.5).incoherence_exceeded);
}

TEST(ObliqueProject, SinglePassStructure) {
    Rng rng(5);
    const Matrix U = orthonormal(10, 2, rng);
    const SupportSet omega(10, 8, {0, 5, 17, 33, 79});
    const Matrix r = random_matrix(10, 8, rng);
    const Matrix out = oblique_project(r, U, omega, 1);
    const Matrix pu = U * (U.transpose() * r);
    const Matrix sparse_part = out - pu;
    EXPECT_LT((sparse_part - omega.mask(sparse_part)).norm(), 1e-12);
    EXPECT_LT((sparse_part - omega.mask(r - pu)).norm(), 1e-12);
}

TEST(ObliqueProject, ReproducesMembersOfTheSubspaceSum) {
    Rng rng(6);
    const Matrix U = orthonormal(20, 2, rng);
    const SupportSet omega(20, 20, {3, 44, 101, 250, 399});
    Matrix member = U * random_matrix(2, 20, rng);
    for (Index k : omega.linear()) member.data()[k] += rng.normal();
    const double one = (oblique_project(member, U, omega, 1) - member).norm();
    const double many = (oblique_project(member, U, omega, 30) - member).norm();
    EXPECT_LT(many, one);
    EXPECT_LT(many, 1e-10 * member.norm());
}

TEST(ObliqueProject, IsLinear) {
    Rng rng(7);
    const Matrix U = orthonormal(6, 1, rng);
    const SupportSet omega(6, 6, {1, 7, 20});
    const Matrix a = random_matrix(6, 6, rng), b = random_matrix(6, 6, rng);
    const Matrix lhs = oblique_project(2.0 * a - b, U, omega, 3);
    const Matrix rhs = 2.0 * oblique_project(a, U, omega, 3) - oblique_project(b, U, omega, 3);
    EXPECT_LT((lhs - rhs).norm(), 1e-12 * lhs.norm());
}

TEST(RpcaProject, RoundTripOnSeparatedInstances) {
    int checked = 0;
    for (std::uint64_t seed = 0; checked < 10 && seed < 200; ++seed) {
        const ModelParams params{100, 100, 10000, 1, 2, 100.0};
        const Problem problem = generate_problem(params, seed);
        if (problem.mu_hat * std::sqrt(2.0) / 100.0 >= 0.1) continue;
        ++checked;
        const RpcaResult result = rpca_project(problem.X0, 1, 2, 100.0, 1e-12);
        EXPECT_LE(result.alternations, 50);
        EXPECT_LE((result.low.L - problem.L0).norm(), 1e-6 * problem.L0.norm());
        EXPECT_LE((result.S.to_dense() - problem.S0.to_dense()).norm(), 1e-6 * problem.S0.frobenius_norm());
    }
    EXPECT_EQ(checked, 10);
}

TEST(RpcaProject, ResidualNeverIncreases) {
    Rng rng(8);
    for (int t = 0; t < 10; ++t) {
        const Matrix w = random_matrix(16, 16, rng);
        const RpcaResult result = rpca_project(w, 2, 20, 16.0, 1e-10);
        ASSERT_FALSE(result.residual_trace.empty());
        for (std::size_t k = 1; k < result.residual_trace.size(); ++k)
            EXPECT_LE(result.residual_trace[k], result.residual_trace[k - 1] * (1 + 1e-12) + 1e-12);
        EXPECT_LE(result.low.svd.rank(), 2);
        EXPECT_LE(result.S.nnz(), 20u);
    }
}

TEST(RpcaProject, PositivelyHomogeneous) {
    Rng rng(9);
    const Matrix w = random_matrix(12, 10, rng);
    const RpcaResult a = rpca_project(w, 2, 10, 12.0, 1e-12);
    const RpcaResult b = rpca_project(3.5 * w, 2, 10, 12.0, 1e-12);
    EXPECT_LT((3.5 * a.dense() - b.dense()).norm(), 1e-9 * b.dense().norm());
}

TEST(RpcaProject, DegenerateBudgets) {
    Rng rng(10);
    const Matrix w = random_matrix(8, 8, rng);
    const RpcaResult sparse_only = rpca_project(w, 0, 5, 8.0, 1e-12);
    EXPECT_TRUE(sparse_only.low.L.isZero(0));
    EXPECT_EQ(sparse_only.S.entries(), ht_sparse(w, 5).entries());
    const RpcaResult low_only = rpca_project(w, 2, 0, 8.0, 1e-12);
    EXPECT_EQ(low_only.S.nnz(), 0u);
    EXPECT_LT((low_only.low.L - truncated_svd(w, 2).reconstruct()).norm(), 1e-10);
}
