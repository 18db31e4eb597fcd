#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsrecover/harness.hpp"
#include "lsrecover/matrix_io.hpp"
#include "lsrecover/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kConfigError = 2, kIoError = 3, kNumericalAbort = 4 };

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<int> workers;
};

json load_config(const Common& c) {
    if (c.config.empty()) return json::object();
    const std::string text = lsr::read_file(c.config);
    json j = json::parse(text);
    if (!j.is_object()) throw lsr::InvalidInput("config '" + c.config + "' is not a JSON object");
    return j;
}

fs::path out_path(const Common& c, const json& j, const char* fallback) {
    if (!c.out.empty()) return c.out;
    if (auto it = j.find("out"); it != j.end()) return it->get<std::string>();
    return fallback;
}

lsr::MatrixFormat format_from(const json& j) {
    const std::string name = j.value("format", std::string("csv"));
    if (name == "csv") return lsr::MatrixFormat::Csv;
    if (name == "lsmx") return lsr::MatrixFormat::Lsmx;
    throw lsr::InvalidInput("unknown matrix format '" + name + "'");
}

// Budgets come either as explicit (p, r, s) or as ratios (delta, rho_r, rho_s).
lsr::ModelParams params_from(const json& j) {
    const lsr::Index m = j.value("m", lsr::Index{64});
    const lsr::Index n = j.value("n", m);
    const double mu = j.value("mu", 0.0);
    if (j.contains("delta"))
        return lsr::params_from_ratios(m, n, j.at("delta").get<double>(), j.value("rho_r", 0.0),
                                       j.value("rho_s", 0.0), mu);
    lsr::ModelParams params{m, n, j.value("p", m * n), j.value("r", lsr::Index{0}), j.value("s", lsr::Index{0}),
                            mu > 0.0 ? mu : static_cast<double>(std::max(m, n))};
    return params;
}

int cmd_generate(const Common& c) {
    const json j = load_config(c);
    const lsr::ModelParams params = params_from(j);
    if (auto warning = params.validate()) std::cerr << "warning: " << *warning << "\n";
    const std::uint64_t seed = c.seed.value_or(j.value("seed", std::uint64_t{0}));
    const lsr::MatrixFormat format = format_from(j);
    const std::string ext = format == lsr::MatrixFormat::Lsmx ? ".lsmx" : ".csv";
    const std::string base = out_path(c, j, "problem").string();

    const lsr::Problem problem = lsr::generate_problem(params, seed);
    lsr::write_matrix(base + ".L" + ext, problem.L0, format);
    lsr::write_sparse_csv(base + ".S.csv", problem.S0);
    lsr::write_matrix(base + ".X" + ext, problem.X0, format);
    const json meta = {{"m", params.m}, {"n", params.n}, {"p", params.p}, {"r", params.r},
                       {"s", params.s}, {"mu", params.mu}, {"seed", seed},
                       {"mu_hat", problem.mu_hat}, {"amplitude", problem.amplitude}};
    lsr::write_file(base + ".json", meta.dump(2) + "\n");
    std::cout << base << ext << ": " << params.m << "x" << params.n << " r=" << params.r << " s=" << params.s
              << " mu_hat=" << problem.mu_hat << "\n";
    return kOk;
}

int cmd_phase_grid(const Common& c) {
    const json j = load_config(c);
    lsr::GridConfig cfg = lsr::GridConfig::desk_default();
    lsr::from_json(j, cfg);
    if (c.seed) cfg.base_seed = *c.seed;
    if (c.workers) cfg.workers = *c.workers;
    const fs::path out = out_path(c, j, "phase.csv");
    const auto result = lsr::run_phase_grid(cfg, out);
    int successes = 0;
    for (const auto& cell : result.cells) successes += cell.successes;
    std::cout << out.string() << ": " << result.cells.size() << " cells, " << result.trials.size()
              << " trials, " << successes << " successes\n";
    return kOk;
}

int cmd_convergence(const Common& c) {
    const json j = load_config(c);
    lsr::ConvergenceConfig cfg;
    lsr::from_json(j, cfg);
    if (c.seed) cfg.seed = *c.seed;
    const fs::path out = out_path(c, j, "convergence.csv");
    const auto rows = lsr::run_convergence(cfg, out);
    std::cout << out.string() << ": " << rows.size() << " rows\n";
    return kOk;
}

int cmd_recover(const Common& c) {
    const json j = load_config(c);
    lsr::RecoverConfig cfg;
    lsr::from_json(j, cfg);
    if (cfg.input.empty()) throw lsr::InvalidInput("recover: config needs an 'input' matrix path");
    if (c.seed) cfg.op.seed = *c.seed;
    cfg.out = out_path(c, j, "recovered");
    const auto result = lsr::recover_file(cfg);
    std::cout << result.report_path.string() << ": " << result.report.solver << " "
              << lsr::to_string(result.report.termination) << " after " << result.report.iterations
              << " iterations\n";
    return kOk;
}

int cmd_ric_probe(const Common& c) {
    const json j = load_config(c);
    const lsr::Index m = j.value("m", lsr::Index{16});
    const lsr::Index n = j.value("n", m);
    const lsr::Index r = j.value("r", lsr::Index{1});
    const lsr::Index s = j.value("s", lsr::Index{5});
    const double mu = j.value("mu", static_cast<double>(std::max(m, n)));
    const auto trials = j.value("trials", std::size_t{500});
    const lsr::OperatorKind kind = lsr::operator_kind_from_string(j.value("operator_kind", std::string("gaussian")));
    const std::uint64_t seed = c.seed.value_or(j.value("seed", std::uint64_t{0}));
    const auto ratios = j.value("p_ratios", std::vector<double>{0.2, 0.4, 0.6, 0.8});

    json rows = json::array();
    for (std::size_t k = 0; k < ratios.size(); ++k) {
        const auto p = std::max<lsr::Index>(1, std::llround(ratios[k] * static_cast<double>(m * n)));
        const auto op = lsr::make_operator({kind, m, n, p, lsr::mix_seed(seed, k, 1)});
        const auto est = lsr::empirical_ric(op, r, s, mu, trials, lsr::mix_seed(seed, k, 2));
        rows.push_back({{"p_ratio", ratios[k]}, {"p", p}, {"delta_hat", est.delta_hat},
                        {"worst_lower", est.stats.worst_lower}, {"worst_upper", est.stats.worst_upper},
                        {"mean_ratio", est.stats.mean_ratio}, {"trials", est.stats.trials},
                        {"rejected", est.rejected}});
        std::cout << "p/mn=" << ratios[k] << " delta_hat=" << est.delta_hat << "\n";
    }
    const json doc = {{"m", m}, {"n", n}, {"r", r}, {"s", s}, {"mu", mu}, {"operator_kind", lsr::to_string(kind)},
                      {"seed", seed}, {"estimates", rows}};
    lsr::write_file(out_path(c, j, "ric.json"), doc.dump(2) + "\n");
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low-rank plus sparse matrix recovery from compressed measurements"};
    app.require_subcommand(1);
    Common common;
    int (*handler)(const Common&) = nullptr;

    auto add = [&](const char* name, const char* help, int (*fn)(const Common&)) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", common.config, "JSON configuration file");
        sub->add_option("--seed", common.seed, "Override the configured seed");
        sub->add_option("--out", common.out, "Output path or prefix");
        sub->add_option("--workers", common.workers, "Worker threads")->check(CLI::PositiveNumber);
        sub->callback([&handler, fn] { handler = fn; });
    };
    add("generate", "Sample a low-rank plus sparse instance", cmd_generate);
    add("phase-grid", "Run a phase-transition grid", cmd_phase_grid);
    add("convergence", "Record per-iteration error traces", cmd_convergence);
    add("recover", "Measure and recover a matrix file", cmd_recover);
    add("ric-probe", "Estimate restricted isometry constants", cmd_ric_probe);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        return handler(common);
    } catch (const lsr::DegenerateStep& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return kNumericalAbort;
    } catch (const lsr::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kIoError;
    } catch (const lsr::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIoError;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const lsr::OutOfRegime& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumericalAbort;
    }
}
