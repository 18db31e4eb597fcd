#include "lsrecover/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "lsrecover/matrix_io.hpp"
#include "lsrecover/rng.hpp"

namespace lsr {

using nlohmann::json;

namespace {

std::string num(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

std::vector<double> grid_steps(double start, double stop, double step) {
    std::vector<double> out;
    const auto count = static_cast<int>(std::llround((stop - start) / step));
    for (int k = 0; k <= count; ++k) out.push_back(std::round((start + k * step) * 1e9) / 1e9);
    return out;
}

template <class T>
void read_opt(const json& j, const char* key, T& into) {
    if (auto it = j.find(key); it != j.end()) into = it->template get<T>();
}

double component_error(const Matrix& x, const Matrix& x0) {
    const double ref = x0.norm();
    const double diff = (x - x0).norm();
    return ref > 0.0 ? diff / ref : diff;
}

}  // namespace

std::string to_string(SolverKind kind) {
    switch (kind) {
        case SolverKind::Niht: return "niht";
        case SolverKind::Naht: return "naht";
        case SolverKind::Convex: return "convex";
    }
    return "unknown";
}

SolverKind solver_kind_from_string(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "niht") return SolverKind::Niht;
    if (lower == "naht") return SolverKind::Naht;
    if (lower == "convex") return SolverKind::Convex;
    throw InvalidInput("unknown solver kind '" + name + "'");
}

bool success(const Matrix& x, const Matrix& x0, double tol) {
    if (x.rows() != x0.rows() || x.cols() != x0.cols()) throw InvalidInput("success: shape mismatch");
    const double ref = x0.norm();
    const double diff = (x - x0).norm();
    return ref > 0.0 ? diff <= tol * ref : diff <= tol;
}

double relative_error(const Matrix& x, const Matrix& x0) {
    if (x.rows() != x0.rows() || x.cols() != x0.cols()) throw InvalidInput("relative_error: shape mismatch");
    return component_error(x, x0);
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t cell, std::uint64_t trial) {
    return mix_seed(base_seed, cell, trial);
}

GridConfig GridConfig::desk_default() {
    GridConfig cfg;
    cfg.m = cfg.n = 64;
    cfg.delta_list = grid_steps(0.1, 1.0, 0.1);
    cfg.rho_r_list = grid_steps(0.0, 1.0, 0.1);
    cfg.rho_s_list = grid_steps(0.0, 1.0, 0.1);
    return cfg;
}

GridConfig GridConfig::fine_grid() {
    GridConfig cfg;
    cfg.m = cfg.n = 100;
    cfg.delta_list = grid_steps(0.02, 1.0, 0.02);
    cfg.rho_r_list = grid_steps(0.0, 1.0, 0.02);
    cfg.rho_s_list = grid_steps(0.0, 1.0, 0.02);
    return cfg;
}

void GridConfig::validate() const {
    if (m < 1 || n < 1) throw InvalidInput("grid: dimensions must be positive");
    if (delta_list.empty() || rho_r_list.empty() || rho_s_list.empty())
        throw InvalidInput("grid: delta_list, rho_r_list and rho_s_list must be non-empty");
    for (double d : delta_list)
        if (!(d > 0.0 && d <= 1.0)) throw InvalidInput("grid: delta values must lie in (0, 1]");
    for (const auto* list : {&rho_r_list, &rho_s_list})
        for (double rho : *list)
            if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidInput("grid: rho values must lie in [0, 1]");
    if (trials_per_cell < 1) throw InvalidInput("grid: trials_per_cell must be positive");
    if (!(success_tol > 0.0)) throw InvalidInput("grid: success_tol must be positive");
    if (workers < 1) throw InvalidInput("grid: workers must be positive");
    solver_config.validate();
}

SolverReport run_solver(SolverKind kind, const Vector& b, const MeasurementOp& op, Index r, Index s,
                        double mu, const SolverConfig& cfg, const ConvexConfig& convex_cfg,
                        const IterationObserver& observer) {
    switch (kind) {
        case SolverKind::Niht: return niht(b, op, r, s, mu, cfg, observer);
        case SolverKind::Naht: return naht(b, op, r, s, mu, cfg, observer);
        case SolverKind::Convex: return convex_relax(b, op, r, s, 0.0, convex_cfg, observer).report;
    }
    throw InvalidInput("run_solver: unknown solver");
}

TrialRecord run_trial(const TrialSetup& setup, std::uint64_t seed) {
    const ModelParams& params = setup.params;
    TrialRecord rec;
    rec.seed = seed;
    rec.delta = params.delta();
    rec.p = params.p;
    rec.r = params.r;
    rec.s = params.s;

    const Problem problem = generate_problem(params, mix_seed(seed, 1));
    rec.mu_hat = problem.mu_hat;
    const MeasurementOp op = make_operator({setup.operator_kind, params.m, params.n, params.p, mix_seed(seed, 2)});
    const Vector b = op.apply(problem.X0);
    SolverConfig cfg = setup.solver_config;
    cfg.seed = mix_seed(seed, 3);

    try {
        const SolverReport report =
            run_solver(setup.solver_kind, b, op, params.r, params.s, params.mu, cfg, setup.convex_config);
        rec.rel_error = relative_error(report.X, problem.X0);
        rec.success = success(report.X, problem.X0, setup.success_tol);
        rec.iterations = report.iterations;
        rec.termination = report.termination;
        rec.wall_time = report.wall_time;
    } catch (const DegenerateStep&) {
        // A numerically aborted run counts as a failed trial.
        rec.rel_error = std::numeric_limits<double>::infinity();
        rec.success = false;
        rec.termination = Termination::Stationary;
    }
    return rec;
}

PhaseGridResult run_phase_grid(const GridConfig& config) {
    config.validate();
    PhaseGridResult out;
    std::vector<TrialSetup> setups;
    for (double rho_r : config.rho_r_list) {
        for (double rho_s : config.rho_s_list) {
            if (rho_r + rho_s > 1.0 + 1e-12) continue;
            for (double delta : config.delta_list) {
                TrialSetup setup;
                setup.params = params_from_ratios(config.m, config.n, delta, rho_r, rho_s, config.mu);
                setup.operator_kind = config.operator_kind;
                setup.solver_kind = config.solver_kind;
                setup.solver_config = config.solver_config;
                setup.convex_config = config.convex_config;
                setup.success_tol = config.success_tol;
                setups.push_back(setup);

                PhaseCellResult cell;
                cell.delta = delta;
                cell.rho_r = rho_r;
                cell.rho_s = rho_s;
                cell.p = setup.params.p;
                cell.r = setup.params.r;
                cell.s = setup.params.s;
                cell.trials = config.trials_per_cell;
                out.cells.push_back(cell);
            }
        }
    }

    const std::size_t per_cell = static_cast<std::size_t>(config.trials_per_cell);
    const std::size_t total = setups.size() * per_cell;
    out.trials.resize(total);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t task = next.fetch_add(1);
            if (task >= total) return;
            const std::size_t cell = task / per_cell;
            const int trial = static_cast<int>(task % per_cell);
            try {
                TrialRecord rec = run_trial(setups[cell], trial_seed(config.base_seed, cell, static_cast<std::uint64_t>(trial)));
                rec.cell = cell;
                rec.trial = trial;
                rec.delta = out.cells[cell].delta;
                rec.rho_r = out.cells[cell].rho_r;
                rec.rho_s = out.cells[cell].rho_s;
                out.trials[task] = rec;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(total);
            }
        }
    };
    const int workers = std::max(1, std::min<int>(config.workers, static_cast<int>(std::max<std::size_t>(total, 1))));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < workers; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    for (std::size_t c = 0; c < out.cells.size(); ++c) {
        auto& cell = out.cells[c];
        double iters = 0.0, time = 0.0;
        for (std::size_t t = 0; t < per_cell; ++t) {
            const auto& rec = out.trials[c * per_cell + t];
            cell.successes += rec.success ? 1 : 0;
            iters += rec.iterations;
            time += rec.wall_time;
            cell.seeds.push_back(rec.seed);
        }
        cell.mean_iterations = iters / static_cast<double>(per_cell);
        cell.mean_wall_time = time / static_cast<double>(per_cell);
    }

    for (double rho_r : config.rho_r_list) {
        for (double rho_s : config.rho_s_list) {
            if (rho_r + rho_s > 1.0 + 1e-12) continue;
            CriticalDelta crit{rho_r, rho_s, std::nullopt};
            for (const auto& cell : out.cells) {
                if (cell.rho_r != rho_r || cell.rho_s != rho_s) continue;
                if (2 * cell.successes > cell.trials && (!crit.delta_star || cell.delta < *crit.delta_star))
                    crit.delta_star = cell.delta;
            }
            out.critical.push_back(crit);
        }
    }
    return out;
}

std::string phase_trials_csv(const PhaseGridResult& result) {
    std::string out = kPhaseCsvHeader;
    out += '\n';
    for (const auto& t : result.trials) {
        out += std::to_string(t.cell) + ',' + std::to_string(t.trial) + ',' + std::to_string(t.seed) + ',' +
               num(t.delta) + ',' + num(t.rho_r) + ',' + num(t.rho_s) + ',' + std::to_string(t.p) + ',' +
               std::to_string(t.r) + ',' + std::to_string(t.s) + ',' + num(t.mu_hat) + ',' +
               (t.success ? "1" : "0") + ',' + num(t.rel_error) + ',' + std::to_string(t.iterations) + ',' +
               to_string(t.termination) + '\n';
    }
    return out;
}

json phase_summary_json(const GridConfig& config, const PhaseGridResult& result) {
    json cells = json::array();
    for (const auto& c : result.cells) {
        cells.push_back({{"delta", c.delta}, {"rho_r", c.rho_r}, {"rho_s", c.rho_s},
                         {"p", c.p}, {"r", c.r}, {"s", c.s},
                         {"successes", c.successes}, {"trials", c.trials},
                         {"mean_iterations", c.mean_iterations}, {"mean_wall_time", c.mean_wall_time},
                         {"seeds", c.seeds}});
    }
    json critical = json::array();
    for (const auto& c : result.critical) {
        critical.push_back({{"rho_r", c.rho_r}, {"rho_s", c.rho_s},
                            {"delta_star", c.delta_star ? json(*c.delta_star) : json(nullptr)}});
    }
    return {{"config", config}, {"cells", cells}, {"critical_delta", critical}};
}

PhaseGridResult run_phase_grid(const GridConfig& config, const std::filesystem::path& csv_path) {
    PhaseGridResult result = run_phase_grid(config);
    write_file(csv_path, phase_trials_csv(result));
    std::filesystem::path summary = csv_path;
    summary.replace_extension(".summary.json");
    write_file(summary, phase_summary_json(config, result).dump(2) + "\n");
    return result;
}

std::vector<ConvergenceRow> run_convergence(const ConvergenceConfig& config) {
    config.solver_config.validate();
    const ModelParams params =
        params_from_ratios(config.m, config.n, config.delta, config.rho_r, config.rho_s, config.mu);
    const Problem problem = generate_problem(params, mix_seed(config.seed, 1));
    const MeasurementOp op =
        make_operator({config.operator_kind, params.m, params.n, params.p, mix_seed(config.seed, 2)});
    const Vector b = op.apply(problem.X0);
    const Matrix S0 = problem.S0.to_dense();

    std::vector<ConvergenceRow> rows;
    for (SolverKind kind : config.solvers) {
        const std::string name = to_string(kind);
        auto observe = [&](const IterateView& it) {
            const Matrix S = it.S.to_dense();
            const Matrix X = it.L + S;
            rows.push_back({name, it.iteration, it.elapsed_seconds, component_error(X, problem.X0),
                            component_error(it.L, problem.L0), component_error(S, S0)});
        };
        run_solver(kind, b, op, params.r, params.s, params.mu, config.solver_config, config.convex_config, observe);
    }
    return rows;
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
    std::string out = kConvergenceCsvHeader;
    out += '\n';
    for (const auto& row : rows)
        out += row.solver + ',' + std::to_string(row.iteration) + ',' + num(row.wall_time) + ',' +
               num(row.rel_error_x) + ',' + num(row.rel_error_l) + ',' + num(row.rel_error_s) + '\n';
    return out;
}

std::vector<ConvergenceRow> run_convergence(const ConvergenceConfig& config,
                                            const std::filesystem::path& csv_path) {
    auto rows = run_convergence(config);
    write_file(csv_path, convergence_csv(rows));
    return rows;
}

json report_to_json(const SolverReport& report, const SolverConfig& cfg, const OperatorSpec& op) {
    return {{"solver", report.solver},
            {"config", cfg},
            {"operator", op},
            {"iterations", report.iterations},
            {"termination", to_string(report.termination)},
            {"wall_time", report.wall_time},
            {"b_norm", report.b_norm},
            {"residual_trace", report.residual_trace},
            {"stepsize_trace", report.stepsize_trace},
            {"stepsize_trace_sparse", report.stepsize_trace_sparse},
            {"objective_trace", report.objective_trace},
            {"mu_hat", report.mu_hat},
            {"gamma", report.gamma},
            {"gamma2", report.gamma2},
            {"incoherence_flags", report.incoherence_flags}};
}

RecoverResult recover_file(const RecoverConfig& config) {
    const Matrix x0 = read_matrix(config.input);
    const MatrixFormat format = detect_format(config.input);
    OperatorSpec spec = config.op;
    if (spec.m == 0) spec.m = x0.rows();
    if (spec.n == 0) spec.n = x0.cols();
    if (spec.m != x0.rows() || spec.n != x0.cols())
        throw InvalidInput("recover: operator expects " + std::to_string(spec.m) + "x" + std::to_string(spec.n) +
                           " but the input is " + std::to_string(x0.rows()) + "x" + std::to_string(x0.cols()));
    if (spec.p == 0) spec.p = spec.m * spec.n;
    const MeasurementOp op = make_operator(spec);
    const Vector b = op.apply(x0);
    const double mu = config.mu > 0.0 ? config.mu : static_cast<double>(std::max(spec.m, spec.n));

    RecoverResult out;
    out.report = run_solver(config.solver, b, op, config.r, config.s, mu, config.solver_config, config.convex_config);
    const std::string ext = format == MatrixFormat::Lsmx ? ".lsmx" : ".csv";
    const std::string base = config.out.string();
    out.l_path = base + ".L" + ext;
    out.s_path = base + ".S" + ext;
    out.x_path = base + ".X" + ext;
    out.report_path = base + ".report.json";
    write_matrix(out.l_path, out.report.L, format);
    write_matrix(out.s_path, out.report.S.to_dense(), format);
    write_matrix(out.x_path, out.report.X, format);

    out.report_json = report_to_json(out.report, config.solver_config, spec);
    out.report_json["input"] = config.input.string();
    out.report_json["residual"] = out.report.residual_trace.back();
    out.report_json["rel_error_vs_input"] = relative_error(out.report.X, x0);
    if (config.ground_truth) {
        const Matrix truth = read_matrix(*config.ground_truth);
        out.report_json["ground_truth"] = config.ground_truth->string();
        out.report_json["rel_error"] = relative_error(out.report.X, truth);
    }
    out.report_json["outputs"] = {{"L", out.l_path.string()}, {"S", out.s_path.string()}, {"X", out.x_path.string()}};
    write_file(out.report_path, out.report_json.dump(2) + "\n");
    return out;
}

void from_json(const json& j, SolverConfig& cfg) {
    read_opt(j, "max_iters", cfg.max_iters);
    read_opt(j, "rel_residual_tol", cfg.rel_residual_tol);
    read_opt(j, "stagnation_window", cfg.stagnation_window);
    read_opt(j, "stagnation_ratio", cfg.stagnation_ratio);
    read_opt(j, "rpca_eps", cfg.rpca_eps);
    read_opt(j, "oblique_iters", cfg.oblique_iters);
    read_opt(j, "seed", cfg.seed);
}

void to_json(json& j, const SolverConfig& cfg) {
    j = {{"max_iters", cfg.max_iters}, {"rel_residual_tol", cfg.rel_residual_tol},
         {"stagnation_window", cfg.stagnation_window}, {"stagnation_ratio", cfg.stagnation_ratio},
         {"rpca_eps", cfg.rpca_eps}, {"oblique_iters", cfg.oblique_iters}, {"seed", cfg.seed}};
}

void from_json(const json& j, ConvexConfig& cfg) {
    read_opt(j, "max_iters", cfg.max_iters);
    read_opt(j, "inner_iters", cfg.inner_iters);
    read_opt(j, "objective_tol", cfg.objective_tol);
    read_opt(j, "rel_residual_tol", cfg.rel_residual_tol);
    read_opt(j, "beta_scale", cfg.beta_scale);
}

void to_json(json& j, const ConvexConfig& cfg) {
    j = {{"max_iters", cfg.max_iters}, {"inner_iters", cfg.inner_iters}, {"objective_tol", cfg.objective_tol},
         {"rel_residual_tol", cfg.rel_residual_tol}, {"beta_scale", cfg.beta_scale}};
}

void from_json(const json& j, OperatorSpec& spec) {
    if (auto it = j.find("kind"); it != j.end()) spec.kind = operator_kind_from_string(it->get<std::string>());
    read_opt(j, "m", spec.m);
    read_opt(j, "n", spec.n);
    read_opt(j, "p", spec.p);
    read_opt(j, "seed", spec.seed);
}

void to_json(json& j, const OperatorSpec& spec) {
    j = {{"kind", to_string(spec.kind)}, {"m", spec.m}, {"n", spec.n}, {"p", spec.p}, {"seed", spec.seed}};
}

void from_json(const json& j, GridConfig& cfg) {
    if (j.value("fine_grid", false)) cfg = GridConfig::fine_grid();
    read_opt(j, "m", cfg.m);
    if (j.contains("m") && !j.contains("n")) cfg.n = cfg.m;
    read_opt(j, "n", cfg.n);
    read_opt(j, "delta_list", cfg.delta_list);
    read_opt(j, "rho_r_list", cfg.rho_r_list);
    read_opt(j, "rho_s_list", cfg.rho_s_list);
    read_opt(j, "trials_per_cell", cfg.trials_per_cell);
    if (auto it = j.find("operator_kind"); it != j.end())
        cfg.operator_kind = operator_kind_from_string(it->get<std::string>());
    if (auto it = j.find("solver_kind"); it != j.end()) {
        cfg.solver_kind = solver_kind_from_string(it->get<std::string>());
        if (cfg.solver_kind == SolverKind::Convex && !j.contains("trials_per_cell")) cfg.trials_per_cell = 10;
    }
    read_opt(j, "success_tol", cfg.success_tol);
    read_opt(j, "base_seed", cfg.base_seed);
    read_opt(j, "mu", cfg.mu);
    read_opt(j, "workers", cfg.workers);
    read_opt(j, "solver_config", cfg.solver_config);
    read_opt(j, "convex_config", cfg.convex_config);
}

void to_json(json& j, const GridConfig& cfg) {
    j = {{"m", cfg.m}, {"n", cfg.n}, {"delta_list", cfg.delta_list}, {"rho_r_list", cfg.rho_r_list},
         {"rho_s_list", cfg.rho_s_list}, {"trials_per_cell", cfg.trials_per_cell},
         {"operator_kind", to_string(cfg.operator_kind)}, {"solver_kind", to_string(cfg.solver_kind)},
         {"success_tol", cfg.success_tol}, {"base_seed", cfg.base_seed}, {"mu", cfg.mu},
         {"workers", cfg.workers}, {"solver_config", cfg.solver_config}, {"convex_config", cfg.convex_config}};
}

void from_json(const json& j, ConvergenceConfig& cfg) {
    read_opt(j, "m", cfg.m);
    if (j.contains("m") && !j.contains("n")) cfg.n = cfg.m;
    read_opt(j, "n", cfg.n);
    read_opt(j, "delta", cfg.delta);
    read_opt(j, "rho_r", cfg.rho_r);
    read_opt(j, "rho_s", cfg.rho_s);
    read_opt(j, "mu", cfg.mu);
    if (auto it = j.find("operator_kind"); it != j.end())
        cfg.operator_kind = operator_kind_from_string(it->get<std::string>());
    if (auto it = j.find("solvers"); it != j.end()) {
        cfg.solvers.clear();
        for (const auto& name : *it) cfg.solvers.push_back(solver_kind_from_string(name.get<std::string>()));
    }
    read_opt(j, "solver_config", cfg.solver_config);
    read_opt(j, "convex_config", cfg.convex_config);
    read_opt(j, "seed", cfg.seed);
}

void from_json(const json& j, RecoverConfig& cfg) {
    if (auto it = j.find("input"); it != j.end()) cfg.input = it->get<std::string>();
    read_opt(j, "operator", cfg.op);
    read_opt(j, "r", cfg.r);
    read_opt(j, "s", cfg.s);
    read_opt(j, "mu", cfg.mu);
    if (auto it = j.find("solver"); it != j.end()) cfg.solver = solver_kind_from_string(it->get<std::string>());
    read_opt(j, "solver_config", cfg.solver_config);
    read_opt(j, "convex_config", cfg.convex_config);
    if (auto it = j.find("ground_truth"); it != j.end() && !it->is_null())
        cfg.ground_truth = std::filesystem::path(it->get<std::string>());
    if (auto it = j.find("out"); it != j.end()) cfg.out = it->get<std::string>();
}

}  // namespace lsr
