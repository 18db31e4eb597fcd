// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "lsrecover/harness.hpp"
#include "lsrecover/ls_model.hpp"
#include "lsrecover/matrix_io.hpp"
#include "lsrecover/measurement.hpp"
#include "lsrecover/projections.hpp"
#include "lsrecover/rng.hpp"
#include "lsrecover/solvers.hpp"

using namespace lsr;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

Matrix random_matrix(Index m, Index n, Rng& rng) {
    Matrix x(m, n);
    for (Index k = 0; k < x.size(); ++k) x.data()[k] = rng.normal();
    return x;
}

Vector random_vector(Index p, Rng& rng) {
    Vector y(p);
    for (Index k = 0; k < p; ++k) y(k) = rng.normal();
    return y;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

Outcome adjoint_identity() {
    Rng rng(101);
    double worst = 0.0;
    for (OperatorKind kind : {OperatorKind::Gaussian, OperatorKind::Fjlt}) {
        for (auto [m, n, p] : {std::tuple<Index, Index, Index>{8, 8, 20}, {16, 16, 64}}) {
            const MeasurementOp op = make_operator({kind, m, n, p, mix_seed(m, p)});
            for (int t = 0; t < 100; ++t) {
                const Matrix x = random_matrix(m, n, rng);
                const Vector y = random_vector(p, rng);
                const double gap = std::abs(op.apply(x).dot(y) - (op.adjoint(y).array() * x.array()).sum());
                worst = std::max(worst, gap / (x.norm() * y.norm() + 1.0));
            }
        }
    }
    return {worst <= 1e-10, "worst scaled gap " + fmt(worst)};
}

Outcome fjlt_dense() {
    const Index m = 4, n = 4, p = 8, mn = 16;
    const MeasurementOp op = make_fjlt(m, n, p, 2024);
    const long double pi = std::numbers::pi_v<long double>;
    Eigen::MatrixXd a(p, mn);
    const double scale = std::sqrt(static_cast<double>(mn) / p);
    for (Index l = 0; l < p; ++l) {
        const Index k = op.selection()[static_cast<std::size_t>(l)];
        const long double c = std::sqrt((k == 0 ? 1.0L : 2.0L) / mn);
        for (Index j = 0; j < mn; ++j)
            a(l, j) = scale * static_cast<double>(c * std::cos(pi * (2 * j + 1) * k / (2.0L * mn))) *
                      op.signs()[static_cast<std::size_t>(j)];
    }
    Rng rng(102);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const Matrix x = random_matrix(m, n, rng);
        worst = std::max(worst, (op.apply(x) - a * vec(x)).cwiseAbs().maxCoeff());
        const Vector y = random_vector(p, rng);
        worst = std::max(worst, (vec(op.adjoint(y)) - a.transpose() * y).cwiseAbs().maxCoeff());
    }
    return {worst <= 1e-12, "max abs deviation " + fmt(worst)};
}

Outcome ht_sparse_bruteforce() {
    Rng rng(103);
    int mismatches = 0;
    for (int t = 0; t < 200; ++t) {
        const Matrix w = random_matrix(3, 3, rng);
        for (Index s = 1; s <= 9; ++s) {
            double best = std::numeric_limits<double>::infinity();
            for (unsigned mask = 0; mask < 512; ++mask) {
                if (std::popcount(mask) != static_cast<int>(s)) continue;
                double res = 0.0;
                for (int k = 0; k < 9; ++k)
                    if (!(mask & (1u << k))) res += w.data()[k] * w.data()[k];
                best = std::min(best, res);
            }
            const double got = (w - ht_sparse(w, s).to_dense()).squaredNorm();
            if (std::abs(got - best) > 1e-12) ++mismatches;
        }
    }
    return {mismatches == 0, std::to_string(mismatches) + " mismatches in 1800 cases"};
}

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
        for (Index p = 0; p < n; ++p)
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
    std::vector<long double> eig(n);
    for (Index i = 0; i < n; ++i) eig[i] = a[i][i];
    std::sort(eig.begin(), eig.end(), std::greater<>());
    return eig;
}

Outcome eckart_young() {
    Rng rng(104);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const Matrix w = random_matrix(8, 6, rng);
        const auto eig = gram_eigenvalues(w);
        for (Index k : {1, 2, 3}) {
            long double tail = 0.0L;
            for (std::size_t i = static_cast<std::size_t>(k); i < eig.size(); ++i) tail += eig[i];
            const double expected = std::sqrt(static_cast<double>(tail));
            const double got = (w - truncated_svd(w, k).reconstruct()).norm();
            worst = std::max(worst, std::abs(got - expected) / expected);
        }
    }
    return {worst <= 1e-9, "worst relative deviation " + fmt(worst)};
}

Outcome structure_bounds() {
    int correlation_violations = 0, tau_violations = 0, in_regime = 0, count = 0;
    for (Index r : {1, 2}) {
        for (Index s : {8, 32}) {
            for (int t = 0; t < 125; ++t, ++count) {
                const Problem problem = generate_problem({32, 32, 1024, r, s, 32.0}, mix_seed(r * 100 + s, t));
                const double lf = problem.L0.norm(), sf = problem.S0.frobenius_norm(), xf = problem.X0.norm();
                const double gamma = problem.mu_hat * static_cast<double>(r) * std::sqrt(static_cast<double>(s)) / 32.0;
                const double actual = std::abs(frobenius_inner(problem.L0, problem.S0));
                if (actual > gamma * lf * sf + 1e-12) ++correlation_violations;
                const auto tau = norm_inflation(32, 32, r, s, problem.mu_hat);
                if (!tau) continue;
                ++in_regime;
                if (lf > *tau * xf + 1e-12 || sf > *tau * xf + 1e-12) ++tau_violations;
            }
        }
    }
    return {correlation_violations == 0 && tau_violations == 0,
            std::to_string(count) + " instances, correlation violations " + std::to_string(correlation_violations) +
                ", norm-inflation violations " + std::to_string(tau_violations) + " of " + std::to_string(in_regime) +
                " with mu_hat below the closedness margin"};
}

Outcome benchmark_recovery() {
    TrialSetup setup;
    setup.params = params_from_ratios(100, 100, 0.5, 0.1, 0.1);
    if (setup.params.p != 5000 || setup.params.r != 2 || setup.params.s != 500)
        return {false, "unexpected budgets"};
    std::ostringstream detail;
    bool pass = true;
    for (auto [kind, reference] : {std::pair{SolverKind::Niht, 2.5}, std::pair{SolverKind::Naht, 2.3}}) {
        setup.solver_kind = kind;
        int successes = 0;
        std::vector<double> times;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const TrialRecord rec = run_trial(setup, trial_seed(2024, 0, seed));
            successes += rec.success;
            times.push_back(rec.wall_time);
        }
        const double med = median(times);
        pass = pass && successes >= 8 && med <= 20 * reference;
        detail << to_string(kind) << " " << successes << "/10 median " << fmt(med) << " s (limit "
               << fmt(20 * reference) << " s); ";
    }
    return {pass, detail.str()};
}

Outcome robust_pca() {
    int recovered = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Problem problem = generate_problem({64, 64, 4096, 2, 200, 64.0}, mix_seed(7, seed));
        const RpcaResult result = rpca_project(problem.X0, 2, 200, 64.0, 1e-10);
        const double el = (result.low.L - problem.L0).norm() / problem.L0.norm();
        const double es = (result.S.to_dense() - problem.S0.to_dense()).norm() / problem.S0.frobenius_norm();
        recovered += el <= 1e-4 && es <= 1e-4;
    }
    return {recovered >= 90, std::to_string(recovered) + "/100 recovered to 1e-4"};
}

Outcome convex_phase() {
    GridConfig cfg;
    cfg.m = cfg.n = 30;
    cfg.delta_list = {0.1, 0.9};
    cfg.rho_r_list = {0.05};
    cfg.rho_s_list = {0.05};
    cfg.trials_per_cell = 10;
    cfg.solver_kind = SolverKind::Convex;
    cfg.base_seed = 2025;
    const PhaseGridResult result = run_phase_grid(cfg);
    const int low = result.cells[0].successes, high = result.cells[1].successes;
    return {high >= 5 && low <= 2,
            "delta=0.9: " + std::to_string(high) + "/10, delta=0.1: " + std::to_string(low) + "/10"};
}

Outcome ric_trend() {
    std::vector<double> deltas;
    std::string detail = "delta_hat";
    for (double ratio : {0.2, 0.4, 0.6, 0.8}) {
        const auto p = static_cast<Index>(std::llround(ratio * 256));
        const MeasurementOp op = make_gaussian(16, 16, p, mix_seed(9, p));
        const RicEstimate est = empirical_ric(op, 1, 5, 16.0, 500, mix_seed(10, p));
        deltas.push_back(est.delta_hat);
        detail += " " + fmt(est.delta_hat);
    }
    int violations = 0;
    bool large = false;
    for (std::size_t k = 1; k < deltas.size(); ++k) {
        if (deltas[k] > deltas[k - 1]) {
            ++violations;
            large = large || deltas[k] - deltas[k - 1] > 0.02;
        }
    }
    return {violations <= 1 && !large, detail};
}

Outcome grid_determinism() {
    GridConfig cfg;
    cfg.m = cfg.n = 32;
    cfg.delta_list = {0.3, 0.6};
    cfg.rho_r_list = {0.05, 0.1};
    cfg.rho_s_list = {0.05, 0.1};
    cfg.trials_per_cell = 5;
    cfg.base_seed = 99;
    const auto dir = std::filesystem::temp_directory_path() / "lsrecover_acceptance_grid";
    std::filesystem::remove_all(dir);
    run_phase_grid(cfg, dir / "a.csv");
    cfg.workers = 2;
    run_phase_grid(cfg, dir / "b.csv");
    const std::string a = read_file(dir / "a.csv"), b = read_file(dir / "b.csv");
    std::filesystem::remove_all(dir);
    return {a == b && !a.empty(), std::to_string(a.size()) + " bytes, identical: " + (a == b ? "yes" : "no")};
}

Outcome degenerate_regimes() {
    int sparse_ok = 0, rank_ok = 0;
    const ModelParams sparse_params = params_from_ratios(32, 32, 0.5, 0.0, 0.2);
    const ModelParams rank_params = params_from_ratios(32, 32, 0.5, 0.2, 0.0);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        TrialSetup setup;
        setup.params = sparse_params;
        setup.solver_kind = SolverKind::Naht;
        sparse_ok += run_trial(setup, trial_seed(11, 0, seed)).success;
        setup.params = rank_params;
        setup.solver_kind = SolverKind::Niht;
        rank_ok += run_trial(setup, trial_seed(11, 1, seed)).success;
    }
    return {sparse_ok == 10 && rank_ok == 10,
            "NAHT r=0 (s=" + std::to_string(sparse_params.s) + "): " + std::to_string(sparse_ok) +
                "/10, NIHT s=0 (r=" + std::to_string(rank_params.r) + "): " + std::to_string(rank_ok) + "/10"};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_seconds;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "adjoint identity", 5, adjoint_identity},
        {2, "FJLT dense equivalence", 1, fjlt_dense},
        {3, "ht_sparse brute-force optimality", 10, ht_sparse_bruteforce},
        {4, "Eckart-Young truncation", 5, eckart_young},
        {5, "correlation and norm-inflation bounds", 30, structure_bounds},
        {6, "benchmark recovery m=n=100", 900, benchmark_recovery},
        {7, "robust PCA special case", 120, robust_pca},
        {8, "convex relaxation phase pattern", 600, convex_phase},
        {9, "empirical RIC trend", 120, ric_trend},
        {10, "phase-grid determinism", 120, grid_determinism},
        {11, "sparse-only and rank-only regimes", 120, degenerate_regimes},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = seconds <= c.budget_seconds;
        const bool pass = out.pass && in_time;
        failures += !pass;
        std::printf("[%s] %2d %s: %s (%.2f s, budget %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    out.detail.c_str(), seconds, c.budget_seconds, in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
