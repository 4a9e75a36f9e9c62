// Command line front end: adaptive benchmark runs, parameter sweeps, and the
// self-check suite. Configuration is a flat JSON object; unknown keys are
// rejected so stale configs fail loudly.

#include "ailfem/adaptive.hpp"
#include "ailfem/selfcheck.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

struct RunConfig {
    std::string problem;
    std::string method = "kacanov";
    double theta = 0.5;
    double lambda_lin = 0.9;
    double rho = 0.5;
    double alpha_min = 100.0;
    int j_max = 1;
    double tau = 0.0;
    double eta_stop = 0.0;
    long max_total_steps = 1000000;
    bool diagnostics = false;  // retain iterates, measure solver contraction
    bool mesh_dump = false;
    double cutoff_fraction = 0.25;
    std::string output = ".";
    std::vector<double> theta_grid;       // sweep only
    std::vector<double> lambda_lin_grid;  // sweep only
};

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    json j = json::parse(in);
    if (!j.is_object()) throw std::runtime_error("config must be a JSON object");

    static const std::map<std::string, int> known = {
        {"problem", 0},     {"method", 0},          {"theta", 0},
        {"lambda_lin", 0},  {"rho", 0},             {"alpha_min", 0},
        {"j_max", 0},       {"tau", 0},             {"eta_stop", 0},
        {"max_total_steps", 0}, {"diagnostics", 0}, {"mesh_dump", 0},
        {"cutoff_fraction", 0}, {"output", 0},      {"theta_grid", 0},
        {"lambda_lin_grid", 0}};
    for (const auto& [key, value] : j.items())
        if (!known.count(key))
            throw std::runtime_error("unknown config key '" + key + "'");

    RunConfig c;
    if (!j.contains("problem"))
        throw std::runtime_error("config key 'problem' is required");
    c.problem = j.at("problem").get<std::string>();
    if (j.contains("method")) c.method = j.at("method").get<std::string>();
    if (j.contains("theta")) c.theta = j.at("theta").get<double>();
    if (j.contains("lambda_lin")) c.lambda_lin = j.at("lambda_lin").get<double>();
    if (j.contains("rho")) c.rho = j.at("rho").get<double>();
    if (j.contains("alpha_min")) c.alpha_min = j.at("alpha_min").get<double>();
    if (j.contains("j_max")) c.j_max = j.at("j_max").get<int>();
    if (j.contains("tau")) c.tau = j.at("tau").get<double>();
    if (j.contains("eta_stop")) c.eta_stop = j.at("eta_stop").get<double>();
    if (j.contains("max_total_steps"))
        c.max_total_steps = j.at("max_total_steps").get<long>();
    if (j.contains("diagnostics")) c.diagnostics = j.at("diagnostics").get<bool>();
    if (j.contains("mesh_dump")) c.mesh_dump = j.at("mesh_dump").get<bool>();
    if (j.contains("cutoff_fraction"))
        c.cutoff_fraction = j.at("cutoff_fraction").get<double>();
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
    if (j.contains("theta_grid"))
        c.theta_grid = j.at("theta_grid").get<std::vector<double>>();
    if (j.contains("lambda_lin_grid"))
        c.lambda_lin_grid = j.at("lambda_lin_grid").get<std::vector<double>>();
    return c;
}

ailfem::AdaptiveParams to_params(const RunConfig& c) {
    ailfem::AdaptiveParams p;
    p.theta = c.theta;
    p.lambda_lin = c.lambda_lin;
    p.rho = c.rho;
    p.alpha_min_init = c.alpha_min;
    p.j_max_init = c.j_max;
    p.tau = c.tau;
    p.eta_stop = c.eta_stop;
    p.max_total_steps = c.max_total_steps;
    p.method = ailfem::parse_method(c.method);
    if (c.diagnostics) {
        p.measure_contraction = true;
        p.retention = ailfem::Retention::accepted;
    }
    ailfem::validate_params(p);
    return p;
}

json summarize(const ailfem::RunHistory& hist, const RunConfig& config) {
    const auto& last = hist.final_record();
    json s;
    s["problem"] = config.problem;
    s["method"] = to_string(hist.method);
    s["termination"] = to_string(hist.termination);
    s["final_eta"] = last.eta;
    s["final_dofs"] = last.dofs;
    s["final_energy"] = last.energy;
    s["levels"] = hist.hierarchy->levels.size();
    s["total_steps"] = hist.records.size();
    s["cum_cost"] = last.cum_cost;
    s["j_max_final"] = last.j_max;
    s["alpha_min_final"] = last.alpha_min;
    s["wall_seconds"] = hist.wall_seconds;
    s["weight_min"] = hist.weight_min;
    s["weight_max"] = hist.weight_max;

    // linearization and solver step counts
    std::map<int, int> kbar;
    std::map<std::pair<int, int>, int> jbar;
    for (const auto& r : hist.records) {
        kbar[r.ell] = std::max(kbar[r.ell], r.k);
        jbar[{r.ell, r.k}] = std::max(jbar[{r.ell, r.k}], r.j);
    }
    int kbar_max = 0, jbar_max = 0;
    for (const auto& [ell, k] : kbar) kbar_max = std::max(kbar_max, k);
    for (const auto& [key, j] : jbar) jbar_max = std::max(jbar_max, j);
    s["kbar_max"] = kbar_max;
    s["jbar_max"] = jbar_max;

    if (!hist.solver_stats.ratios.empty())
        s["measured_q_alg"] = estimate_contraction(hist.solver_stats);
    if (last.exact_error) s["final_exact_error"] = *last.exact_error;
    try {
        const ailfem::RateSummary r = rates(hist, config.cutoff_fraction);
        s["slope_dofs"] = r.slope_dofs;
        s["slope_cost"] = r.slope_cost;
        s["rate_levels_used"] = r.levels_used;
    } catch (const std::exception&) {
        // too few levels for slopes; summary stays without them
    }
    return s;
}

int cmd_run(const std::string& config_path,
            const std::optional<std::string>& output_override) {
    const RunConfig config = [&] {
        RunConfig c = parse_config(config_path);
        if (output_override) c.output = *output_override;
        return c;
    }();
    const ailfem::Problem problem = ailfem::make_problem(config.problem);
    const ailfem::AdaptiveParams params = to_params(config);

    const ailfem::RunHistory hist = ailfem::run_adaptive(problem, params);

    namespace fs = std::filesystem;
    fs::create_directories(config.output);
    {
        std::ofstream csv(fs::path(config.output) / "history.csv");
        write_history_csv(csv, hist);
    }
    {
        std::ofstream out(fs::path(config.output) / "summary.json");
        out << std::setw(2) << summarize(hist, config) << "\n";
    }
    if (config.mesh_dump) {
        std::ofstream mesh(fs::path(config.output) / "mesh_final.txt");
        write_mesh(mesh, *hist.hierarchy->levels.back().mesh);
    }
    std::cout << "final eta " << hist.final_record().eta << " with "
              << hist.final_record().dofs << " dofs after "
              << hist.records.size() << " steps ("
              << to_string(hist.termination) << ")\n";
    return 0;
}

int cmd_sweep(const std::string& config_path,
              const std::optional<std::string>& output_override) {
    RunConfig config = parse_config(config_path);
    if (output_override) config.output = *output_override;
    if (config.theta_grid.empty() || config.lambda_lin_grid.empty())
        throw std::runtime_error(
            "sweep requires theta_grid and lambda_lin_grid");
    const ailfem::Problem problem = ailfem::make_problem(config.problem);

    const std::size_t rows = config.theta_grid.size();
    const std::size_t cols = config.lambda_lin_grid.size();
    std::vector<std::vector<double>> metric(
        rows,
        std::vector<double>(cols, std::numeric_limits<double>::quiet_NaN()));
    json failures = json::array();

    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < cols; ++k) {
            RunConfig cell = config;
            cell.theta = config.theta_grid[i];
            cell.lambda_lin = config.lambda_lin_grid[k];
            try {
                const ailfem::RunHistory hist =
                    ailfem::run_adaptive(problem, to_params(cell));
                const auto& last = hist.final_record();
                // estimator-weighted cumulative cost
                metric[i][k] =
                    last.eta * std::sqrt(static_cast<double>(last.cum_cost));
            } catch (const std::exception& e) {
                failures.push_back({{"theta", cell.theta},
                                    {"lambda_lin", cell.lambda_lin},
                                    {"error", e.what()}});
            }
        }
    }

    namespace fs = std::filesystem;
    fs::create_directories(config.output);
    {
        std::ofstream csv(fs::path(config.output) / "sweep.csv");
        csv << std::setprecision(17);
        csv << "theta\\lambda_lin";
        for (const double l : config.lambda_lin_grid) csv << "," << l;
        csv << "\n";
        for (std::size_t i = 0; i < rows; ++i) {
            csv << config.theta_grid[i];
            for (std::size_t k = 0; k < cols; ++k) csv << "," << metric[i][k];
            csv << "\n";
        }
    }

    // row/column minima and the global best cell
    json summary;
    summary["problem"] = config.problem;
    summary["metric"] = "final_eta * sqrt(cum_cost)";
    json row_minima = json::array(), col_minima = json::array();
    double best = std::numeric_limits<double>::max();
    std::pair<std::size_t, std::size_t> best_cell{0, 0};
    for (std::size_t i = 0; i < rows; ++i) {
        double m = std::numeric_limits<double>::max();
        std::size_t arg = 0;
        for (std::size_t k = 0; k < cols; ++k)
            if (metric[i][k] == metric[i][k] && metric[i][k] < m) {
                m = metric[i][k];
                arg = k;
            }
        row_minima.push_back({{"theta", config.theta_grid[i]},
                              {"lambda_lin", config.lambda_lin_grid[arg]},
                              {"metric", m}});
        if (m < best) {
            best = m;
            best_cell = {i, arg};
        }
    }
    for (std::size_t k = 0; k < cols; ++k) {
        double m = std::numeric_limits<double>::max();
        std::size_t arg = 0;
        for (std::size_t i = 0; i < rows; ++i)
            if (metric[i][k] == metric[i][k] && metric[i][k] < m) {
                m = metric[i][k];
                arg = i;
            }
        col_minima.push_back({{"theta", config.theta_grid[arg]},
                              {"lambda_lin", config.lambda_lin_grid[k]},
                              {"metric", m}});
    }
    summary["row_minima"] = row_minima;
    summary["col_minima"] = col_minima;
    summary["best"] = {{"theta", config.theta_grid[best_cell.first]},
                       {"lambda_lin", config.lambda_lin_grid[best_cell.second]},
                       {"metric", best}};
    summary["failures"] = failures;
    {
        std::ofstream out(fs::path(config.output) / "sweep_summary.json");
        out << std::setw(2) << summary << "\n";
    }
    std::cout << "sweep finished; best cell theta="
              << config.theta_grid[best_cell.first]
              << " lambda_lin=" << config.lambda_lin_grid[best_cell.second]
              << " metric=" << best << "\n";
    return failures.empty() ? 0 : 3;
}

int cmd_verify() {
    const auto results = ailfem::run_self_checks();
    bool all_passed = true;
    for (const auto& r : results) {
        std::cout << (r.passed ? "ok   " : "FAIL ") << r.name;
        if (!r.passed) std::cout << "  (" << r.detail << ")";
        std::cout << "\n";
        all_passed = all_passed && r.passed;
    }
    std::cout << (all_passed ? "all checks passed" : "some checks FAILED")
              << "\n";
    return all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive iteratively linearized FEM benchmarks"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> output_override;

    CLI::App* run = app.add_subcommand("run", "run one adaptive benchmark");
    run->add_option("--config", config_path, "JSON config file")->required();
    run->add_option("--output", output_override,
                    "override the config's output directory");

    CLI::App* sweep =
        app.add_subcommand("sweep", "grid sweep over theta and lambda_lin");
    sweep->add_option("--config", config_path, "JSON config file")->required();
    sweep->add_option("--output", output_override,
                      "override the config's output directory");

    app.add_subcommand("verify", "run the small-scale self checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("run"))
            return cmd_run(config_path, output_override);
        if (app.got_subcommand("sweep"))
            return cmd_sweep(config_path, output_override);
        return cmd_verify();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
