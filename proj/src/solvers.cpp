#include "lsrecover/solvers.hpp"

#include <chrono>
#include <cmath>

#include "lsrecover/rng.hpp"

namespace lsr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// A projected residual this small carries no descent information.
constexpr double kStationaryNorm = 1e-14;

void check_problem(const Vector& b, const MeasurementOp& op, Index r, Index s) {
    if (b.size() != op.p()) throw InvalidInput("solver: measurement vector length differs from p");
    if (r < 0 || r > std::min(op.m(), op.n())) throw InvalidInput("solver: rank budget out of range");
    if (s < 0 || s > op.m() * op.n()) throw InvalidInput("solver: sparsity budget out of range");
}

struct StepSize {
    double alpha = 0.0;
    bool stationary = false;
};

// alpha = ||P||_F^2 / ||A(P)||_2^2 with P the oblique projection of the residual.
StepSize normalized_step(const MeasurementOp& op, const Matrix& residual, const Matrix& U,
                         const SupportSet& omega, int oblique_iters) {
    const Matrix proj = oblique_project(residual, U, omega, oblique_iters);
    const double num = proj.squaredNorm();
    const double den = op.apply(proj).squaredNorm();
    if (!(den > 0.0) || !std::isfinite(num / den)) {
        if (std::sqrt(num) <= kStationaryNorm) return {0.0, true};
        throw DegenerateStep("normalized step: projected residual has a null image under A");
    }
    return {num / den, false};
}

void fill_diagnostics(SolverReport& report, const LowRankPart& low, Index r, Index s, Index m, Index n) {
    report.mu_hat = low.mu_hat;
    const double root_mn = std::sqrt(static_cast<double>(m) * static_cast<double>(n));
    const double root_2s = std::sqrt(2.0 * static_cast<double>(s));
    report.gamma = low.mu_hat * 4.0 * static_cast<double>(r) * root_2s / root_mn;
    report.gamma2 = low.mu_hat * 2.0 * static_cast<double>(r) * root_2s / root_mn;
}

}  // namespace

void SolverConfig::validate() const {
    if (max_iters < 0) throw InvalidInput("SolverConfig: max_iters must be non-negative");
    if (!(rel_residual_tol > 0.0) || !(stagnation_ratio > 0.0) || !(rpca_eps > 0.0))
        throw InvalidInput("SolverConfig: tolerances must be positive");
    if (stagnation_window < 2) throw InvalidInput("SolverConfig: stagnation_window must be at least 2");
    if (oblique_iters < 1) throw InvalidInput("SolverConfig: oblique_iters must be at least 1");
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::Continue: return "continue";
        case Termination::ResidualTol: return "residual_tol";
        case Termination::Stagnation: return "stagnation";
        case Termination::MaxIters: return "max_iters";
        case Termination::Stationary: return "stationary";
        case Termination::ObjectiveTol: return "objective_tol";
    }
    return "unknown";
}

Termination check_termination(std::span<const double> trace, double b_norm, const SolverConfig& cfg) {
    if (trace.empty()) throw InvalidInput("check_termination: empty trace");
    const double last = trace.back();
    if (last <= cfg.rel_residual_tol * b_norm) return Termination::ResidualTol;
    const auto w = static_cast<std::size_t>(cfg.stagnation_window);
    if (trace.size() > w) {
        const double earlier = trace[trace.size() - 1 - w];
        if (earlier > 0.0 &&
            std::pow(last / earlier, 1.0 / static_cast<double>(w)) > cfg.stagnation_ratio)
            return Termination::Stagnation;
    }
    if (static_cast<long long>(trace.size()) - 1 >= cfg.max_iters) return Termination::MaxIters;
    return Termination::Continue;
}

SolverReport niht(const Vector& b, const MeasurementOp& op, Index r, Index s, double mu,
                  const SolverConfig& cfg, const IterationObserver& observer) {
    cfg.validate();
    check_problem(b, op, r, s);
    const auto start = Clock::now();

    SolverReport report;
    report.solver = "niht";
    report.b_norm = b.norm();

    RpcaResult proj = rpca_project(op.adjoint(b), r, s, mu, cfg.rpca_eps);
    Matrix X = proj.dense();
    SupportSet omega = proj.S.support();
    Vector resid = op.apply(X) - b;
    report.residual_trace.push_back(resid.norm());
    if (proj.low.incoherence_exceeded) ++report.incoherence_flags;
    if (observer) observer({0, seconds_since(start), proj.low.L, proj.S, report.residual_trace.back()});

    for (;;) {
        report.termination = check_termination(report.residual_trace, report.b_norm, cfg);
        if (report.termination != Termination::Continue) break;

        const Matrix R = op.adjoint(resid);
        const StepSize step = normalized_step(op, R, proj.low.svd.U, omega, cfg.oblique_iters);
        if (step.stationary) {
            report.termination = Termination::Stationary;
            break;
        }
        report.stepsize_trace.push_back(step.alpha);

        const Matrix W = X - step.alpha * R;
        proj = rpca_project(W, r, s, mu, cfg.rpca_eps, &proj.S);
        X = proj.dense();
        omega = proj.S.support();
        if (proj.low.incoherence_exceeded) ++report.incoherence_flags;

        resid = op.apply(X) - b;
        ++report.iterations;
        report.residual_trace.push_back(resid.norm());
        if (observer)
            observer({report.iterations, seconds_since(start), proj.low.L, proj.S, report.residual_trace.back()});
    }

    fill_diagnostics(report, proj.low, r, s, op.m(), op.n());
    report.L = std::move(proj.low.L);
    report.S = std::move(proj.S);
    report.X = std::move(X);
    report.wall_time = seconds_since(start);
    return report;
}

SolverReport naht(const Vector& b, const MeasurementOp& op, Index r, Index s, double mu,
                  const SolverConfig& cfg, const IterationObserver& observer) {
    cfg.validate();
    check_problem(b, op, r, s);
    const auto start = Clock::now();

    SolverReport report;
    report.solver = "naht";
    report.b_norm = b.norm();

    RpcaResult init = rpca_project(op.adjoint(b), r, s, mu, cfg.rpca_eps);
    LowRankPart low = std::move(init.low);
    SparseMatrix S = std::move(init.S);
    SupportSet omega = S.support();
    Matrix L = low.L;
    Vector resid;
    {
        Matrix X = L;
        S.add_to(X);
        resid = op.apply(X) - b;
    }
    report.residual_trace.push_back(resid.norm());
    if (low.incoherence_exceeded) ++report.incoherence_flags;
    if (observer) observer({0, seconds_since(start), L, S, report.residual_trace.back()});

    for (;;) {
        report.termination = check_termination(report.residual_trace, report.b_norm, cfg);
        if (report.termination != Termination::Continue) break;

        bool stationary = false;
        // Low-rank half-step. With r == 0 it maps L = 0 to itself.
        double alpha_l = 0.0;
        if (r > 0) {
            const Matrix R = op.adjoint(resid);
            const StepSize step = normalized_step(op, R, low.svd.U, omega, cfg.oblique_iters);
            stationary = step.stationary;
            if (!stationary) {
                alpha_l = step.alpha;
                low = ht_lowrank(L - alpha_l * R, r, mu);
                L = low.L;
                if (low.incoherence_exceeded) ++report.incoherence_flags;
                Matrix half = L;
                S.add_to(half);
                resid = op.apply(half) - b;
            }
        }
        // Sparse half-step against the residual at L^{j+1} + S^j.
        double alpha_s = 0.0;
        if (s > 0 && !stationary) {
            const Matrix R = op.adjoint(resid);
            const StepSize step = normalized_step(op, R, low.svd.U, omega, cfg.oblique_iters);
            stationary = step.stationary;
            if (!stationary) {
                alpha_s = step.alpha;
                Matrix W = -alpha_s * R;
                S.add_to(W);
                S = ht_sparse(W, s);
                omega = S.support();
                Matrix X = L;
                S.add_to(X);
                resid = op.apply(X) - b;
            }
        }
        if (stationary) {
            report.termination = Termination::Stationary;
            break;
        }
        report.stepsize_trace.push_back(alpha_l);
        report.stepsize_trace_sparse.push_back(alpha_s);
        ++report.iterations;
        report.residual_trace.push_back(resid.norm());
        if (observer) observer({report.iterations, seconds_since(start), L, S, report.residual_trace.back()});
    }

    fill_diagnostics(report, low, r, s, op.m(), op.n());
    report.X = L;
    S.add_to(report.X);
    report.L = std::move(L);
    report.S = std::move(S);
    report.wall_time = seconds_since(start);
    return report;
}

double operator_norm(const MeasurementOp& op, int iters, std::uint64_t seed) {
    Rng rng(seed);
    Matrix x(op.m(), op.n());
    for (Index k = 0; k < x.size(); ++k) x.data()[k] = rng.normal();
    x /= x.norm();
    double estimate = 0.0;
    for (int k = 0; k < iters; ++k) {
        Matrix y = op.adjoint(op.apply(x));
        const double norm = y.norm();
        if (norm == 0.0) return 0.0;
        const double next = std::sqrt(norm);
        x = y / norm;
        if (k > 0 && std::abs(next - estimate) <= 1e-10 * next) return next;
        estimate = next;
    }
    return estimate;
}

}  // namespace lsr
