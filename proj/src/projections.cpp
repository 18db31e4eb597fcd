#include "lsrecover/projections.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/SVD>

namespace lsr {

Matrix SvdTriple::reconstruct() const {
    return U * sigma.asDiagonal() * V.transpose();
}

SvdTriple truncated_svd(const Matrix& w, Index k) {
    const Index full = std::min(w.rows(), w.cols());
    if (k < 1 || k > full) throw InvalidInput("truncated_svd: k out of range");
    // Column-major copy: BDCSVD is tuned for it and results stay bitwise
    // reproducible for a fixed input.
    const Eigen::MatrixXd a = w;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdTriple out;
    out.U = svd.matrixU().leftCols(k);
    out.sigma = svd.singularValues().head(k);
    out.V = svd.matrixV().leftCols(k);
    return out;
}

SparseMatrix ht_sparse(const Matrix& w, Index s) {
    const Index total = w.size();
    s = std::clamp<Index>(s, 0, total);
    const double* data = w.data();
    std::vector<Index> order(static_cast<std::size_t>(total));
    std::iota(order.begin(), order.end(), Index{0});
    auto before = [data](Index a, Index b) {
        const double fa = std::abs(data[a]), fb = std::abs(data[b]);
        return fa > fb || (fa == fb && a < b);
    };
    if (s < total) std::nth_element(order.begin(), order.begin() + s, order.end(), before);
    order.resize(static_cast<std::size_t>(s));

    std::vector<SparseEntry> entries;
    entries.reserve(order.size());
    const Index n = w.cols();
    for (Index lin : order)
        if (data[lin] != 0.0) entries.push_back({lin / n, lin % n, data[lin]});
    return {w.rows(), w.cols(), std::move(entries)};
}

LowRankPart ht_lowrank(const Matrix& w, Index r, double mu_cap) {
    LowRankPart out;
    if (r < 0 || r > std::min(w.rows(), w.cols())) throw InvalidInput("ht_lowrank: r out of range");
    if (r == 0) {
        out.svd.U = Matrix(w.rows(), 0);
        out.svd.V = Matrix(w.cols(), 0);
        out.svd.sigma = Vector(0);
        out.L = Matrix::Zero(w.rows(), w.cols());
        return out;
    }
    out.svd = truncated_svd(w, r);
    out.L = out.svd.reconstruct();
    out.mu_hat = measured_incoherence(out.svd.U, out.svd.V);
    out.incoherence_exceeded = out.mu_hat > mu_cap;
    return out;
}

Matrix oblique_project(const Matrix& r, const Matrix& U, const SupportSet& omega, int iters) {
    if (U.rows() != r.rows()) throw InvalidInput("oblique_project: U has the wrong row count");
    if (!omega.empty() && (omega.rows() != r.rows() || omega.cols() != r.cols()))
        throw InvalidInput("oblique_project: support shape mismatch");
    if (iters < 1) throw InvalidInput("oblique_project: iters must be at least 1");

    Matrix acc = Matrix::Zero(r.rows(), r.cols());
    Matrix resid = r;
    for (int pass = 0; pass < iters; ++pass) {
        Matrix step = U.cols() > 0 ? Matrix(U * (U.transpose() * resid)) : Matrix::Zero(r.rows(), r.cols());
        double* st = step.data();
        const double* re = resid.data();
        for (Index k : omega.linear()) st[k] = re[k];
        acc += step;
        if (pass + 1 < iters) resid = r - acc;
    }
    return acc;
}

Matrix RpcaResult::dense() const {
    Matrix x = low.L;
    S.add_to(x);
    return x;
}

RpcaResult rpca_project(const Matrix& w, Index r, Index s, double mu, double eps,
                        const SparseMatrix* warm_start, int max_alternations) {
    if (!(eps > 0.0)) throw InvalidInput("rpca_project: eps must be positive");
    RpcaResult out;
    out.S = warm_start ? *warm_start : SparseMatrix(w.rows(), w.cols());
    if (out.S.rows() != w.rows() || out.S.cols() != w.cols())
        throw InvalidInput("rpca_project: warm start shape mismatch");
    if (s == 0) out.S = SparseMatrix(w.rows(), w.cols());

    const double tol = eps * std::max(1.0, w.norm());
    Matrix prev = Matrix::Zero(w.rows(), w.cols());
    for (int k = 0; k < max_alternations; ++k) {
        Matrix target = w;
        for (const auto& e : out.S.entries()) target(e.row, e.col) -= e.value;
        out.low = ht_lowrank(target, r, mu);
        out.S = ht_sparse(w - out.low.L, s);
        ++out.alternations;

        Matrix x = out.dense();
        out.residual_trace.push_back((w - x).norm());
        const double moved = (x - prev).norm();
        prev = std::move(x);
        if (moved <= tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

}  // namespace lsr
