#include "lsrecover/ls_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lsrecover/projections.hpp"
#include "lsrecover/rng.hpp"

namespace lsr {

namespace {

constexpr double kOrthoTol = 1e-8;
// Absorbs floating-point error in ratio products such as 0.29 * 100.
constexpr double kRatioSlack = 1e-9;

void check_orthonormal(const Matrix& Q, const char* name) {
    if (Q.cols() == 0) return;
    const Matrix gram = Q.transpose() * Q;
    const double dev = (gram - Matrix::Identity(Q.cols(), Q.cols())).cwiseAbs().maxCoeff();
    if (dev > kOrthoTol)
        throw InvalidInput(std::string("measured_incoherence: ") + name +
                           " does not have orthonormal columns");
}

double max_row_norm_sq(const Matrix& Q) {
    return Q.rowwise().squaredNorm().maxCoeff();
}

}  // namespace

std::optional<std::string> ModelParams::validate() const {
    if (m <= 0 || n <= 0) throw InvalidInput("ModelParams: dimensions must be positive");
    if (r < 0 || r > std::min(m, n)) throw InvalidInput("ModelParams: rank budget out of range");
    if (s < 0 || s > m * n) throw InvalidInput("ModelParams: sparsity budget out of range");
    if (p < 1 || p > m * n) throw InvalidInput("ModelParams: measurement count out of range");
    if (!(mu >= 1.0)) throw InvalidInput("ModelParams: mu must be at least 1");
    if (r > 0 && s > 0 && mu >= closedness_margin())
        return "mu = " + std::to_string(mu) + " is not below the closedness margin " +
               std::to_string(closedness_margin());
    return std::nullopt;
}

double ModelParams::closedness_margin() const {
    if (r == 0 || s == 0) return std::numeric_limits<double>::infinity();
    return std::sqrt(static_cast<double>(m) * static_cast<double>(n)) /
           (static_cast<double>(r) * std::sqrt(static_cast<double>(s)));
}

Matrix LsPair::low_rank() const {
    return U * sigma.asDiagonal() * V.transpose();
}

Matrix LsPair::dense() const {
    Matrix x = low_rank();
    S.add_to(x);
    return x;
}

void LsPair::check_invariants(double tol) const {
    const Index k = U.cols();
    if (V.cols() != k || sigma.size() != k) throw InvalidInput("LsPair: factor shapes disagree");
    if (S.rows() != U.rows() || S.cols() != V.rows()) throw InvalidInput("LsPair: S shape");
    const Matrix I = Matrix::Identity(k, k);
    if (k > 0) {
        if ((U.transpose() * U - I).cwiseAbs().maxCoeff() > tol) throw InvalidInput("LsPair: U not orthonormal");
        if ((V.transpose() * V - I).cwiseAbs().maxCoeff() > tol) throw InvalidInput("LsPair: V not orthonormal");
    }
    for (Index i = 0; i < k; ++i) {
        if (sigma(i) < 0.0) throw InvalidInput("LsPair: negative singular value");
        if (i > 0 && sigma(i) > sigma(i - 1)) throw InvalidInput("LsPair: sigma not sorted");
    }
    if (static_cast<Index>(S.nnz()) > s_budget) throw InvalidInput("LsPair: sparse budget exceeded");
}

double measured_incoherence(const Matrix& U, const Matrix& V) {
    if (U.cols() != V.cols() || U.cols() == 0)
        throw InvalidInput("measured_incoherence: U and V need the same positive column count");
    check_orthonormal(U, "U");
    check_orthonormal(V, "V");
    const auto r = static_cast<double>(U.cols());
    const double left = static_cast<double>(U.rows()) / r * max_row_norm_sq(U);
    const double right = static_cast<double>(V.rows()) / r * max_row_norm_sq(V);
    return std::max(left, right);
}

std::optional<double> norm_inflation(Index m, Index n, Index r, Index s, double mu) {
    if (r == 0 || s == 0) return 1.0;
    const double gamma_sq = mu * mu * static_cast<double>(r * r) * static_cast<double>(s) /
                            (static_cast<double>(m) * static_cast<double>(n));
    if (gamma_sq >= 1.0) return std::nullopt;
    return 1.0 / std::sqrt(1.0 - gamma_sq);
}

ClosednessBounds closedness_bounds(const ModelParams& params) {
    ClosednessBounds out;
    out.mu_max = params.closedness_margin();
    if (params.s == 0 || params.r == 0) return out;
    if (params.mu >= out.mu_max)
        throw OutOfRegime("closedness_bounds: mu is not below sqrt(mn)/(r sqrt(s))", out.mu_max);
    out.tau = *norm_inflation(params.m, params.n, params.r, params.s, params.mu);
    return out;
}

CorrelationBound rank_sparsity_correlation_bound(const Matrix& L, const SparseMatrix& S,
                                                 std::optional<Index> rank) {
    if (L.rows() != S.rows() || L.cols() != S.cols())
        throw InvalidInput("rank_sparsity_correlation_bound: shape mismatch");
    CorrelationBound out;
    out.actual = std::abs(frobenius_inner(L, S));

    const Index full = std::min(L.rows(), L.cols());
    const SvdTriple svd = truncated_svd(L, full);
    Index r = 0;
    if (rank) {
        r = *rank;
    } else if (full > 0 && svd.sigma(0) > 0.0) {
        const double cut = static_cast<double>(std::max(L.rows(), L.cols())) *
                           std::numeric_limits<double>::epsilon() * svd.sigma(0);
        while (r < full && svd.sigma(r) > cut) ++r;
    }
    out.rank = r;
    if (r == 0) return out;

    const Matrix U = svd.U.leftCols(r);
    const Matrix V = svd.V.leftCols(r);
    const double spread = (U.cwiseAbs() * V.cwiseAbs().transpose()).maxCoeff();
    out.general_bound = spread * svd.sigma(0) * S.l1_norm();

    out.mu_hat = measured_incoherence(U, V);
    const double mn = static_cast<double>(L.rows()) * static_cast<double>(L.cols());
    out.mu_bound = out.mu_hat * static_cast<double>(r) * std::sqrt(static_cast<double>(S.nnz())) /
                   std::sqrt(mn) * L.norm() * S.frobenius_norm();
    return out;
}

Problem generate_problem(const ModelParams& params, std::uint64_t seed) {
    const Index m = params.m, n = params.n, r = params.r, s = params.s;
    if (m <= 0 || n <= 0) throw InvalidInput("generate_problem: dimensions must be positive");
    if (s < 0 || s > m * n) throw InvalidInput("generate_problem: s exceeds mn");
    if (r < 0 || r > std::min(m, n)) throw InvalidInput("generate_problem: r out of range");

    Rng rng(seed);
    Problem out;
    if (r > 0) {
        Matrix U(m, r), V(n, r);
        for (Index k = 0; k < U.size(); ++k) U.data()[k] = rng.normal();
        for (Index k = 0; k < V.size(); ++k) V.data()[k] = rng.normal();
        out.L0 = U * V.transpose();
    } else {
        out.L0 = Matrix::Zero(m, n);
    }

    const double mean_abs = out.L0.cwiseAbs().mean();
    out.amplitude = mean_abs > 0.0 ? mean_abs : 1.0;

    // Partial Fisher-Yates over linear indices.
    std::vector<Index> perm(static_cast<std::size_t>(m * n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::vector<SparseEntry> entries;
    entries.reserve(static_cast<std::size_t>(s));
    for (Index k = 0; k < s; ++k) {
        const auto pick = k + static_cast<Index>(rng.below(static_cast<std::uint64_t>(m * n - k)));
        std::swap(perm[k], perm[pick]);
        const Index lin = perm[k];
        entries.push_back({lin / n, lin % n, rng.uniform(-out.amplitude, out.amplitude)});
    }
    out.S0 = SparseMatrix(m, n, std::move(entries));
    out.X0 = out.L0;
    out.S0.add_to(out.X0);

    if (r > 0) {
        const SvdTriple svd = truncated_svd(out.L0, r);
        out.mu_hat = measured_incoherence(svd.U, svd.V);
    }
    return out;
}

ModelParams params_from_ratios(Index m, Index n, double delta, double rho_r, double rho_s,
                               double mu) {
    if (m <= 0 || n <= 0) throw InvalidInput("params_from_ratios: dimensions must be positive");
    if (!(delta > 0.0 && delta <= 1.0)) throw InvalidInput("params_from_ratios: delta must lie in (0, 1]");
    if (!(rho_r >= 0.0 && rho_s >= 0.0)) throw InvalidInput("params_from_ratios: negative ratio");
    if (rho_r + rho_s > 1.0 + kRatioSlack) throw InvalidInput("params_from_ratios: rho_r + rho_s > 1");

    ModelParams out;
    out.m = m;
    out.n = n;
    out.p = std::max<Index>(1, std::llround(delta * static_cast<double>(m * n)));
    const auto p = static_cast<double>(out.p);
    out.s = static_cast<Index>(std::floor(rho_s * p + kRatioSlack));

    const double budget = rho_r * p + kRatioSlack;
    Index r = 0;
    while (r < std::max(m, n) && static_cast<double>((r + 1) * (m + n - r - 1)) <= budget &&
           2 * (r + 1) <= m + n)
        ++r;
    if (r > std::min(m, n)) throw InvalidInput("params_from_ratios: rank exceeds min(m, n)");
    out.r = r;
    out.mu = mu > 0.0 ? mu : static_cast<double>(std::max(m, n));
    return out;
}

}  // namespace lsr
