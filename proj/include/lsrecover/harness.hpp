#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lsrecover/ls_model.hpp"
#include "lsrecover/measurement.hpp"
#include "lsrecover/solvers.hpp"

namespace lsr {

enum class SolverKind { Niht, Naht, Convex };

std::string to_string(SolverKind kind);
SolverKind solver_kind_from_string(const std::string& name);

/// ||X - X0||_F <= tol ||X0||_F, or ||X||_F <= tol when X0 == 0.
bool success(const Matrix& x, const Matrix& x0, double tol);
double relative_error(const Matrix& x, const Matrix& x0);

/// Seed of trial `trial` in grid cell `cell`: mix_seed(base, cell, trial).
/// The problem, operator and solver draw from mix_seed(trial_seed, 1|2|3).
std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t cell, std::uint64_t trial);

struct GridConfig {
    Index m = 64;
    Index n = 64;
    std::vector<double> delta_list;
    std::vector<double> rho_r_list;
    std::vector<double> rho_s_list;
    int trials_per_cell = 20;
    OperatorKind operator_kind = OperatorKind::Gaussian;
    SolverKind solver_kind = SolverKind::Niht;
    double success_tol = 1e-2;
    std::uint64_t base_seed = 0;
    double mu = 0.0;  // <= 0: uncapped
    int workers = 1;
    SolverConfig solver_config;
    ConvexConfig convex_config;

    /// Desk-scale default: m = n = 64 with 0.1 steps.
    static GridConfig desk_default();
    /// m = n = 100, delta in {0.02..1}, rho in {0..1} with 0.02 steps.
    static GridConfig fine_grid();

    void validate() const;
};

struct TrialRecord {
    std::size_t cell = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    double delta = 0.0, rho_r = 0.0, rho_s = 0.0;
    Index p = 0, r = 0, s = 0;
    double mu_hat = 0.0;
    bool success = false;
    double rel_error = 0.0;
    int iterations = 0;
    Termination termination = Termination::Continue;
    double wall_time = 0.0;
};

struct PhaseCellResult {
    double delta = 0.0, rho_r = 0.0, rho_s = 0.0;
    Index p = 0, r = 0, s = 0;
    int successes = 0;
    int trials = 0;
    double mean_iterations = 0.0;
    double mean_wall_time = 0.0;
    std::vector<std::uint64_t> seeds;
};

struct CriticalDelta {
    double rho_r = 0.0, rho_s = 0.0;
    std::optional<double> delta_star;  // smallest delta with successes/trials > 1/2
};

struct PhaseGridResult {
    std::vector<PhaseCellResult> cells;
    std::vector<TrialRecord> trials;  // (cell, trial) order
    std::vector<CriticalDelta> critical;
};

struct TrialSetup {
    ModelParams params;
    OperatorKind operator_kind = OperatorKind::Gaussian;
    SolverKind solver_kind = SolverKind::Niht;
    SolverConfig solver_config;
    ConvexConfig convex_config;
    double success_tol = 1e-2;
};

/// Generates, measures and solves one synthetic instance.
TrialRecord run_trial(const TrialSetup& setup, std::uint64_t seed);

/// Cells are (delta, rho_r, rho_s) in list order with delta varying fastest;
/// cells with rho_r + rho_s > 1 are skipped. Trials run on config.workers
/// threads; results are ordered by (cell, trial) regardless of completion.
PhaseGridResult run_phase_grid(const GridConfig& config);

/// Writes the per-trial CSV to csv_path and the summary next to it as
/// <stem>.summary.json.
PhaseGridResult run_phase_grid(const GridConfig& config, const std::filesystem::path& csv_path);

/// Header of the per-trial CSV; column order is part of the file contract.
inline constexpr const char* kPhaseCsvHeader =
    "cell,trial,seed,delta,rho_r,rho_s,p,r,s,mu_hat,success,rel_error,iterations,termination";

std::string phase_trials_csv(const PhaseGridResult& result);
nlohmann::json phase_summary_json(const GridConfig& config, const PhaseGridResult& result);

struct ConvergenceConfig {
    Index m = 100;
    Index n = 100;
    double delta = 0.5;
    double rho_r = 0.05;
    double rho_s = 0.05;
    double mu = 0.0;
    OperatorKind operator_kind = OperatorKind::Gaussian;
    std::vector<SolverKind> solvers{SolverKind::Niht, SolverKind::Naht};
    SolverConfig solver_config;
    ConvexConfig convex_config;
    std::uint64_t seed = 0;
};

struct ConvergenceRow {
    std::string solver;
    int iteration = 0;
    double wall_time = 0.0;
    double rel_error_x = 0.0;
    double rel_error_l = 0.0;
    double rel_error_s = 0.0;
};

inline constexpr const char* kConvergenceCsvHeader =
    "solver,iteration,wall_time,rel_error_x,rel_error_l,rel_error_s";

/// One problem, every listed solver; a row per iterate. Relative errors use
/// the absolute norm when the reference component is zero.
std::vector<ConvergenceRow> run_convergence(const ConvergenceConfig& config);
std::vector<ConvergenceRow> run_convergence(const ConvergenceConfig& config,
                                            const std::filesystem::path& csv_path);
std::string convergence_csv(const std::vector<ConvergenceRow>& rows);

struct RecoverConfig {
    std::filesystem::path input;
    OperatorSpec op;  // m, n of 0 are taken from the input matrix
    Index r = 0;
    Index s = 0;
    double mu = 0.0;
    SolverKind solver = SolverKind::Niht;
    SolverConfig solver_config;
    ConvexConfig convex_config;
    std::optional<std::filesystem::path> ground_truth;
    /// Outputs: <out>.L.<ext>, <out>.S.<ext>, <out>.X.<ext>, <out>.report.json.
    std::filesystem::path out;
};

struct RecoverResult {
    SolverReport report;
    std::filesystem::path l_path, s_path, x_path, report_path;
    nlohmann::json report_json;
};

/// Measures the input matrix with the configured operator and recovers it.
RecoverResult recover_file(const RecoverConfig& config);

SolverReport run_solver(SolverKind kind, const Vector& b, const MeasurementOp& op, Index r, Index s,
                        double mu, const SolverConfig& cfg, const ConvexConfig& convex_cfg,
                        const IterationObserver& observer = {});

nlohmann::json report_to_json(const SolverReport& report, const SolverConfig& cfg, const OperatorSpec& op);

// JSON configuration documents. Field names mirror the struct members.
void from_json(const nlohmann::json& j, SolverConfig& cfg);
void to_json(nlohmann::json& j, const SolverConfig& cfg);
void from_json(const nlohmann::json& j, ConvexConfig& cfg);
void to_json(nlohmann::json& j, const ConvexConfig& cfg);
void from_json(const nlohmann::json& j, OperatorSpec& spec);
void to_json(nlohmann::json& j, const OperatorSpec& spec);
void from_json(const nlohmann::json& j, GridConfig& cfg);
void to_json(nlohmann::json& j, const GridConfig& cfg);
void from_json(const nlohmann::json& j, ConvergenceConfig& cfg);
void from_json(const nlohmann::json& j, RecoverConfig& cfg);

}  // namespace lsr
