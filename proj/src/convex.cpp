#include <chrono>
#include <cmath>

#include <Eigen/SVD>

#include "lsrecover/solvers.hpp"

namespace lsr {

namespace {

using Clock = std::chrono::steady_clock;

// Power iteration slightly underestimates ||A||; the step uses a padded constant.
constexpr double kLipschitzPad = 1.02;

struct Shrunk {
    Matrix value;
    double nuclear_norm = 0.0;
};

// prox of t ||.||_* : soft-threshold the singular values.
Shrunk singular_value_shrink(const Matrix& z, double t) {
    const Eigen::MatrixXd a = z;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vector sigma = (svd.singularValues().array() - t).cwiseMax(0.0).matrix();
    Index k = 0;
    while (k < sigma.size() && sigma(k) > 0.0) ++k;
    Shrunk out;
    out.nuclear_norm = sigma.head(k).sum();
    out.value = svd.matrixU().leftCols(k) * sigma.head(k).asDiagonal() * svd.matrixV().leftCols(k).transpose();
    return out;
}

// prox of t ||.||_1 : entrywise soft threshold.
Matrix soft_threshold(const Matrix& z, double t) {
    return z.unaryExpr([t](double v) { return v > t ? v - t : (v < -t ? v + t : 0.0); });
}

}  // namespace

ConvexResult convex_relax(const Vector& b, const MeasurementOp& op, Index r_hint, Index s_hint,
                          double eps_b, const ConvexConfig& cfg, const IterationObserver& observer) {
    if (b.size() != op.p()) throw InvalidInput("convex_relax: measurement vector length differs from p");
    if (r_hint < 0 || s_hint < 0) throw InvalidInput("convex_relax: negative budget hint");
    if (cfg.max_iters < 1 || cfg.inner_iters < 1) throw InvalidInput("convex_relax: iteration caps must be positive");
    const auto start = Clock::now();
    const Index m = op.m(), n = op.n();

    ConvexResult out;
    SolverReport& report = out.report;
    report.solver = "convex";
    report.b_norm = b.norm();
    const bool use_sparse = s_hint > 0;
    out.lambda = use_sparse ? std::sqrt(2.0 * static_cast<double>(std::max<Index>(r_hint, 1)) /
                                        static_cast<double>(s_hint))
                            : 0.0;

    Matrix L = Matrix::Zero(m, n);
    Matrix S = Matrix::Zero(m, n);
    auto finish = [&](Termination t) {
        report.termination = t;
        report.converged = t != Termination::MaxIters;
        report.L = L;
        report.S = SparseMatrix::from_dense(S);
        report.X = L + S;
        report.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
        out.L = report.L;
        out.S = report.S;
        return out;
    };

    report.residual_trace.push_back(report.b_norm);
    const double target = std::max(eps_b, cfg.rel_residual_tol * report.b_norm);
    if (report.b_norm <= target) return finish(Termination::ResidualTol);

    const double sigma_max = operator_norm(op);
    out.beta = cfg.beta_scale / (sigma_max * report.b_norm);
    const double step = 1.0 / (out.beta * kLipschitzPad * sigma_max * sigma_max);

    // Residual add-back (Bregman) rounds: each round minimizes the penalized
    // objective against the shifted target b_k, then b_{k+1} = b_k + (b - A(X)).
    Vector shifted = b;
    Vector ax = Vector::Zero(op.p());
    double nuclear = 0.0;
    auto penalized = [&](double nuc) {
        return nuc + out.lambda * S.cwiseAbs().sum() + 0.5 * out.beta * (ax - shifted).squaredNorm();
    };
    double previous_norms = 0.0;
    int sweeps = 0;
    while (sweeps < cfg.max_iters) {
        double previous = penalized(nuclear);
        for (int inner = 0; inner < cfg.inner_iters && sweeps < cfg.max_iters; ++inner) {
            Matrix grad = out.beta * op.adjoint(ax - shifted);
            Shrunk low = singular_value_shrink(L - step * grad, step);
            L = std::move(low.value);
            nuclear = low.nuclear_norm;
            ax = op.apply(L + S);
            if (use_sparse) {
                grad = out.beta * op.adjoint(ax - shifted);
                S = soft_threshold(S - step * grad, step * out.lambda);
                ax = op.apply(L + S);
            }
            ++sweeps;
            const double current = penalized(nuclear);
            report.objective_trace.push_back(current);
            if (observer) {
                const SparseMatrix sparse = SparseMatrix::from_dense(S);
                observer({sweeps, std::chrono::duration<double>(Clock::now() - start).count(), L, sparse,
                          (ax - b).norm()});
            }
            const bool flat = std::abs(previous - current) <= cfg.objective_tol * std::max(1.0, std::abs(current));
            previous = current;
            if (flat) break;
        }
        report.iterations = sweeps;
        const Vector miss = b - ax;
        const double residual = miss.norm();
        out.outer_residuals.push_back(residual);
        report.residual_trace.push_back(residual);
        if (residual <= target) return finish(Termination::ResidualTol);

        const double norms = nuclear + out.lambda * S.cwiseAbs().sum();
        if (out.outer_residuals.size() > 1 &&
            std::abs(norms - previous_norms) <= cfg.objective_tol * std::max(1.0, norms) &&
            residual <= 1e-3 * report.b_norm)
            return finish(Termination::ObjectiveTol);
        previous_norms = norms;
        shifted += miss;
    }
    return finish(Termination::MaxIters);
}

}  // namespace lsr
