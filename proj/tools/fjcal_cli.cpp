// fjcal: simulate, calibrate and report on Farmer-Joshi style market models.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fjcal/calibration.hpp"
#include "fjcal/io_util.hpp"
#include "fjcal/market.hpp"
#include "fjcal/model.hpp"
#include "fjcal/report.hpp"
#include "fjcal/series.hpp"
#include "fjcal/weighting.hpp"

namespace fs = std::filesystem;
using namespace fjcal;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

/// Validation failures detected before any work starts.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

fs::path default_output_dir() {
    if (const char* env = std::getenv("FJCAL_OUTPUT_DIR"); env && *env) return env;
    return ".";
}

// ---------------------------------------------------------------------------
// Shared option groups

struct ModelOptions {
    std::string variant = "adaptive";
    std::string params_file;
    std::vector<std::string> overrides;  // name=value

    void add(CLI::App* app) {
        app->add_option("--variant", variant, "Model variant: standard or adaptive")->capture_default_str();
        app->add_option("--params", params_file, "JSON file with model parameters (or a calibration result)");
        app->add_option("--set", overrides, "Parameter override name=value (repeatable)");
    }

    Variant parsed_variant() const {
        try {
            return parse_variant(variant);
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
    }

    ModelParameters parameters() const {
        ModelParameters p;
        if (!params_file.empty()) {
            if (!fs::exists(params_file)) throw UsageError("parameter file '" + params_file + "' not found");
            p = parameters_from_json(read_file(params_file));
        }
        for (const auto& o : overrides) {
            const auto eq = o.find('=');
            if (eq == std::string::npos) throw UsageError("--set expects name=value, got '" + o + "'");
            const auto name = o.substr(0, eq);
            double value = 0;
            try {
                std::size_t used = 0;
                value = std::stod(o.substr(eq + 1), &used);
                if (used != o.size() - eq - 1) throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw UsageError("--set " + name + ": value is not a number");
            }
            try {
                set_parameter(p, name, value);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
        }
        try {
            validate(p);
        } catch (const ParameterError& e) {
            throw UsageError(e.what());
        }
        return p;
    }
};

struct WeightOptions {
    bool bootstrap = false;
    std::string weights_file;
    std::string cache_dir;
    int block_length = 100;
    int bootstrap_replicates = 1000;
    std::uint64_t bootstrap_seed = 1;

    void add(CLI::App* app) {
        app->add_flag("--bootstrap", bootstrap, "Estimate the weight matrix when no cached copy exists");
        app->add_option("--weights", weights_file, "Weight matrix JSON to use directly");
        app->add_option("--w-cache", cache_dir, "Weight matrix cache directory (default <output>/cache)");
        app->add_option("--block-length", block_length, "Bootstrap block length")->capture_default_str();
        app->add_option("--bootstrap-replicates", bootstrap_replicates, "Bootstrap replicates")->capture_default_str();
        app->add_option("--bootstrap-seed", bootstrap_seed, "Bootstrap seed")->capture_default_str();
    }

    WeightMatrix load(const std::vector<double>& r_emp, const fs::path& out_dir) const {
        if (!weights_file.empty()) {
            if (!fs::exists(weights_file)) throw UsageError("weight matrix file '" + weights_file + "' not found");
            return weight_matrix_from_json(read_file(weights_file));
        }
        const fs::path dir = cache_dir.empty() ? out_dir / "cache" : fs::path(cache_dir);
        const auto path = weight_cache_path(dir, r_emp, static_cast<std::size_t>(block_length),
                                            bootstrap_replicates, bootstrap_seed);
        if (fs::exists(path)) {
            std::clog << "using cached weight matrix " << path.string() << "\n";
            return weight_matrix_from_json(read_file(path));
        }
        if (!bootstrap)
            throw UsageError("no cached weight matrix at '" + path.string() + "'; pass --bootstrap to estimate one");
        if (block_length < 2 || static_cast<std::size_t>(block_length) > r_emp.size())
            throw UsageError("--block-length must be in [2, number of returns]");
        if (bootstrap_replicates < static_cast<int>(kMomentCount) + 1)
            throw UsageError("--bootstrap-replicates must be at least 10");
        std::clog << "estimating weight matrix (" << bootstrap_replicates << " replicates, block " << block_length
                  << ")\n";
        auto w = estimate_weight_matrix(r_emp, static_cast<std::size_t>(block_length), bootstrap_replicates,
                                        bootstrap_seed);
        write_file_atomic(path, weight_matrix_to_json(w));
        return w;
    }
};

struct ObjectiveOptions {
    int sims_per_eval = 10;
    int sim_days = 0;  // 0: length of the empirical return series
    std::uint64_t seed = 1;
    double penalty = 1e12;
    bool no_crn = false;
    std::string bounds_file;

    void add(CLI::App* app) {
        app->add_option("--sims-per-eval", sims_per_eval, "Simulations averaged per fitness evaluation")
            ->capture_default_str();
        app->add_option("--sim-days", sim_days, "Simulated days per run (default: empirical length)");
        app->add_option("--seed", seed, "Master seed")->capture_default_str();
        app->add_option("--penalty", penalty, "Fitness of failed evaluations")->capture_default_str();
        app->add_flag("--no-crn", no_crn, "Key simulation seeds by parameter values (disables common random numbers)");
        app->add_option("--bounds", bounds_file, "JSON bounds file (default: built-in bounds)");
    }

    BoundsTable bounds() const {
        if (bounds_file.empty()) return default_bounds();
        if (!fs::exists(bounds_file)) throw UsageError("bounds file '" + bounds_file + "' not found");
        try {
            return parse_bounds_json(read_file(bounds_file));
        } catch (const std::exception& e) {
            throw UsageError(bounds_file + ": " + e.what());
        }
    }

    ObjectiveConfig config(Variant v, const std::vector<double>& r_emp, const WeightMatrix& w) const {
        if (sims_per_eval < 1) throw UsageError("--sims-per-eval must be >= 1");
        if (sim_days < 0) throw UsageError("--sim-days must be >= 1");
        auto cfg = make_objective_config(v, r_emp, w.entries, sims_per_eval, seed);
        if (sim_days > 0) cfg.sim_days = sim_days;
        cfg.penalty = penalty;
        cfg.common_random_numbers = !no_crn;
        return cfg;
    }
};

struct EmpiricalData {
    PriceSeries prices;
    std::vector<double> returns;
};

EmpiricalData load_empirical(const std::string& path) {
    if (path.empty()) throw UsageError("--empirical is required");
    if (!fs::exists(path)) throw UsageError("cannot open price file '" + path + "'");
    try {
        auto prices = load_price_series(path);
        auto r = log_returns(prices);
        std::vector<double> v(r.values().begin(), r.values().end());
        return {std::move(prices), std::move(v)};
    } catch (const DataError& e) {
        throw UsageError(e.what());
    }
}

fs::path ensure_dir(const std::string& dir) {
    fs::path p = dir.empty() ? default_output_dir() : fs::path(dir);
    fs::create_directories(p);
    return p;
}

std::string config_hash(const CLI::App& app) { return hex64(fnv1a(app.config_to_str(true, false))); }

std::vector<std::pair<std::string, std::string>> metadata(const CLI::App& app, const std::string& command,
                                                          std::uint64_t seed) {
    return {{"fjcal", command}, {"config_hash", config_hash(app)}, {"seed", std::to_string(seed)}};
}

nlohmann::ordered_json moments_json(const MomentVector& m) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < kMomentCount; ++i) j[std::string(kMomentNames[i])] = m[i];
    return j;
}

std::vector<double> log_closes(const PriceSeries& p) {
    std::vector<double> out;
    for (double c : p.closes()) out.push_back(std::log(c));
    return out;
}

void write(const fs::path& path, const std::string& contents) {
    write_file_atomic(path, contents);
    std::clog << "wrote " << path.string() << "\n";
}

// ---------------------------------------------------------------------------
// Commands

struct SimulateCommand {
    ModelOptions model;
    int days = 1000;
    std::uint64_t seed = 1;
    double p0 = 0.0;
    std::string empirical;
    std::string output_dir;
    std::string prefix = "simulation";

    void add(CLI::App* app) {
        model.add(app);
        app->add_option("--days", days, "Number of simulated days")->capture_default_str();
        app->add_option("--seed", seed, "Simulation seed")->capture_default_str();
        app->add_option("--p0", p0, "Initial log price")->capture_default_str();
        app->add_option("--empirical", empirical, "Price CSV; the summary then compares against it");
        app->add_option("--output-dir", output_dir, "Output directory (default $FJCAL_OUTPUT_DIR or .)");
        app->add_option("--prefix", prefix, "Output file prefix")->capture_default_str();
    }

    int run(const CLI::App& app) const {
        if (days < 1) throw UsageError("--days must be >= 1");
        const auto variant = model.parsed_variant();
        const auto params = model.parameters();
        std::optional<EmpiricalData> emp;
        if (!empirical.empty()) emp = load_empirical(empirical);
        const auto dir = ensure_dir(output_dir);
        const auto meta = metadata(app, "simulate", seed);

        const auto out = simulate(params, variant, days, p0, seed);
        write(dir / (prefix + ".csv"), format_simulation_csv(out, metadata_header(meta)));

        nlohmann::ordered_json j;
        for (const auto& [k, v] : meta) j["metadata"][k] = v;
        j["variant"] = std::string(to_string(variant));
        j["days"] = days;
        j["parameters"] = nlohmann::ordered_json::parse(parameters_to_json(params));
        const auto& r = out.log_returns;
        const std::span<const double> ref = emp ? std::span<const double>(emp->returns) : std::span<const double>(r);
        try {
            j["moments"] = moments_json(moment_vector(r, ref));
        } catch (const StatisticError& e) {
            j["moments"] = nullptr;
            j["moments_error"] = e.what();
        }
        if (emp) j["empirical_moments"] = moments_json(moment_vector(emp->returns, emp->returns));
        write(dir / (prefix + "_summary.json"), j.dump(2) + "\n");
        return 0;
    }
};

struct CalibrateCommand {
    std::string empirical;
    std::string variant = "adaptive";
    std::string optimizer = "ga";
    WeightOptions weights;
    ObjectiveOptions objective;
    GaOptions ga;
    NmtaOptions nmta;
    std::string thresholds;
    int replications = 0;
    std::uint64_t optimizer_seed = 1;
    std::string output_dir;

    void add(CLI::App* app) {
        app->add_option("--empirical", empirical, "Daily closing price CSV (date,close)")->required();
        app->add_option("--variant", variant, "Model variant: standard or adaptive")->capture_default_str();
        app->add_option("--optimizer", optimizer, "ga or nmta")->capture_default_str();
        weights.add(app);
        objective.add(app);
        app->add_option("--population", ga.population, "GA population")->capture_default_str();
        app->add_option("--generations", ga.generations, "GA generations")->capture_default_str();
        app->add_option("--crossover-rate", ga.crossover_rate, "GA crossover probability")->capture_default_str();
        app->add_option("--mutation-scale", ga.mutation_scale, "GA mutation s.d. / bound width")->capture_default_str();
        app->add_option("--mutation-decay", ga.mutation_decay,
                        "GA mutation s.d. shrinks by (1 - g/G)^decay; 0 keeps it fixed")
            ->capture_default_str();
        app->add_option("--elites", ga.elites, "GA elites")->capture_default_str();
        app->add_option("--restarts", nmta.restarts, "NMTA restarts")->capture_default_str();
        app->add_option("--iterations", nmta.iterations_per_restart, "NMTA iterations per restart")
            ->capture_default_str();
        app->add_option("--threshold-count", nmta.threshold_count, "NMTA threshold sequence length")
            ->capture_default_str();
        app->add_option("--threshold-every", nmta.threshold_every, "NMTA iterations between shifts")
            ->capture_default_str();
        app->add_option("--simplex-scale", nmta.simplex_scale, "NMTA initial simplex / bound width")
            ->capture_default_str();
        app->add_option("--thresholds", thresholds,
                        "Explicit NMTA thresholds: comma-separated, non-increasing; 0 disables threshold steps");
        app->add_option("--replications", replications, "Independent calibration runs for confidence intervals");
        app->add_option("--optimizer-seed", optimizer_seed, "Optimizer seed")->capture_default_str();
        app->add_option("--output-dir", output_dir, "Output directory (default $FJCAL_OUTPUT_DIR or .)");
    }

    OptimizerSettings settings() const {
        OptimizerSettings s;
        try {
            s.optimizer = parse_optimizer(optimizer);
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
        s.ga = ga;
        s.nmta = nmta;
        if (!thresholds.empty()) {
            std::vector<double> values;
            std::stringstream ss(thresholds);
            std::string item;
            while (std::getline(ss, item, ',')) {
                try {
                    values.push_back(std::stod(item));
                } catch (const std::exception&) {
                    throw UsageError("--thresholds: '" + item + "' is not a number");
                }
            }
            if (values.size() == 1 && values.front() == 0.0)
                values.assign(static_cast<std::size_t>(std::max(1, nmta.threshold_count)), 0.0);
            s.nmta.thresholds = values;
        }
        if (s.ga.population < 4) throw UsageError("--population must be >= 4");
        if (!(s.ga.mutation_decay >= 0)) throw UsageError("--mutation-decay must be >= 0");
        if (replications == 1 || replications < 0) throw UsageError("--replications must be >= 2");
        return s;
    }

    int run(const CLI::App& app) const {
        const auto settings_ = settings();
        Variant v;
        try {
            v = parse_variant(variant);
        } catch (const std::exception& e) {
            throw UsageError(e.what());
        }
        const auto emp = load_empirical(empirical);
        const auto bounds = objective.bounds();
        const auto dir = ensure_dir(output_dir);
        const auto w = weights.load(emp.returns, dir);
        const auto cfg = objective.config(v, emp.returns, w);
        const ParameterSpace space(v, bounds);
        const auto meta = metadata(app, "calibrate", optimizer_seed);

        std::vector<std::pair<std::string, std::string>> echo = meta;
        echo.emplace_back("empirical", empirical);
        echo.emplace_back("empirical_hash", hex64(fnv1a(std::span<const double>(emp.returns))));
        echo.emplace_back("sims_per_eval", std::to_string(cfg.replications));
        echo.emplace_back("sim_days", std::to_string(cfg.sim_days));
        echo.emplace_back("master_seed", std::to_string(cfg.master_seed));
        echo.emplace_back("common_random_numbers", cfg.common_random_numbers ? "true" : "false");
        echo.emplace_back("weight_matrix_seed", std::to_string(w.info.seed));
        echo.emplace_back("weight_matrix_pseudo_inverse", w.info.pseudo_inverse ? "true" : "false");

        std::clog << "calibrating " << to_string(v) << " model with " << to_string(settings_.optimizer) << "\n";
        const auto result = calibrate(cfg, space, settings_, optimizer_seed);
        std::clog << "best fitness " << result.best_fitness << " after " << result.evaluations << " evaluations ("
                  << result.wall_seconds << " s)\n";
        write(dir / "calibration.json", calibration_to_json(result, echo));

        std::string trace = metadata_header(meta) + "step,best_fitness\n";
        for (std::size_t i = 0; i < result.trace.size(); ++i) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, result.trace[i]);
            trace += buf;
        }
        write(dir / "trace.csv", trace);

        std::string log = metadata_header(meta);
        log += "variant " + std::string(to_string(v)) + "\n";
        log += "optimizer " + result.optimizer + "\n";
        log += "evaluations " + std::to_string(result.evaluations) + "\n";
        for (const auto& e : result.events)
            log += "threshold step at iteration " + std::to_string(e.iteration) + ": delta " + std::to_string(e.delta) +
                   " vs threshold " + std::to_string(e.threshold) + (e.accepted ? " accepted\n" : " rejected\n");
        write(dir / "calibration.log", log);

        if (replications >= 2) {
            std::clog << "running " << replications << " independent calibrations\n";
            const auto summary = replicate_calibrations(cfg, space, settings_, replications, optimizer_seed);
            write(dir / "replication.csv", format_replication_csv(summary, metadata_header(meta)));
            write(dir / "replication.json", replication_to_json(summary));
        }
        return 0;
    }
};

struct ReportCommand {
    std::string result_file;
    std::string empirical;
    int simulations = 100;
    int days = 0;
    int max_lag = 50;
    int return_paths = 5;
    std::uint64_t seed = 1;
    std::string output_dir;

    void add(CLI::App* app) {
        app->add_option("--result", result_file, "Calibration result JSON")->required();
        app->add_option("--empirical", empirical, "Daily closing price CSV (date,close)")->required();
        app->add_option("--simulations", simulations, "Simulations at the calibrated parameters")
            ->capture_default_str();
        app->add_option("--days", days, "Simulated days (default: empirical length)");
        app->add_option("--max-lag", max_lag, "Largest autocorrelation lag")->capture_default_str();
        app->add_option("--return-paths", return_paths, "Simulated return paths to export")->capture_default_str();
        app->add_option("--seed", seed, "Simulation seed")->capture_default_str();
        app->add_option("--output-dir", output_dir, "Output directory (default $FJCAL_OUTPUT_DIR or .)");
    }

    int run(const CLI::App& app) const {
        if (simulations < 1) throw UsageError("--simulations must be >= 1");
        if (max_lag < 1) throw UsageError("--max-lag must be >= 1");
        if (days < 0) throw UsageError("--days must be >= 1");
        if (!fs::exists(result_file)) throw UsageError("calibration result '" + result_file + "' not found");
        CalibrationResult result;
        try {
            result = calibration_from_json(read_file(result_file));
        } catch (const std::exception& e) {
            throw UsageError(result_file + ": " + e.what());
        }
        const auto emp = load_empirical(empirical);
        const int T = days > 0 ? days : static_cast<int>(emp.returns.size());
        if (max_lag >= T || static_cast<std::size_t>(max_lag) >= emp.returns.size())
            throw UsageError("--max-lag must be smaller than the series length");
        const auto dir = ensure_dir(output_dir);
        const auto meta = metadata_header(metadata(app, "report", seed));
        const auto log_prices = log_closes(emp.prices);

        const auto set =
            simulate_many(result.best_parameters, result.variant, simulations, T, log_prices.front(), seed);
        if (set.failed > 0) std::clog << set.failed << " simulations blew up and were skipped\n";
        write(dir / "price_bands.csv", format_price_bands_csv(price_bands(set.paths), log_prices, meta));
        write(dir / "return_paths.csv", format_return_paths_csv(set.paths, emp.returns, return_paths, meta));
        write(dir / "acf.csv", format_acf_csv(set.paths, emp.returns, max_lag, meta));
        write(dir / "qq.csv", format_qq_csv(set.paths, emp.returns, meta));
        write(dir / "strategies.csv", format_strategy_csv(set.paths, meta));

        std::vector<MomentVector> sims;
        int failed = 0;
        for (const auto& p : set.paths) {
            try {
                sims.push_back(moment_vector(p.log_returns, emp.returns));
            } catch (const StatisticError&) {
                ++failed;
            }
        }
        if (failed > 0) std::clog << failed << " simulations had undefined moments and were skipped\n";
        if (sims.empty()) throw std::runtime_error("no simulation produced a complete moment vector");
        write(dir / "moments_table.csv",
              format_moments_csv(moments_table(sims, moment_vector(emp.returns, emp.returns)), meta));
        return 0;
    }
};

struct SurfaceCommand {
    std::string empirical;
    ModelOptions model;
    WeightOptions weights;
    ObjectiveOptions objective;
    std::string param_x;
    std::string param_y;
    std::vector<int> grid{10, 10};
    std::string output_dir;

    void add(CLI::App* app) {
        app->add_option("--empirical", empirical, "Daily closing price CSV (date,close)")->required();
        model.add(app);
        weights.add(app);
        objective.add(app);
        app->add_option("--x", param_x, "First parameter")->required();
        app->add_option("--y", param_y, "Second parameter")->required();
        app->add_option("--grid", grid, "Grid size: NX NY")->expected(2)->capture_default_str();
        app->add_option("--output-dir", output_dir, "Output directory (default $FJCAL_OUTPUT_DIR or .)");
    }

    int run(const CLI::App& app) const {
        for (const auto* name : {&param_x, &param_y})
            if (!is_parameter_name(*name))
                throw UsageError("unknown parameter '" + *name + "'; valid names: " + valid_parameter_list());
        if (param_x == param_y) throw UsageError("--x and --y must differ");
        if (grid[0] < 2 || grid[1] < 2) throw UsageError("--grid must be at least 2 2");
        const auto v = model.parsed_variant();
        const auto base = model.parameters();
        const auto emp = load_empirical(empirical);
        const auto bounds = objective.bounds();
        const auto dir = ensure_dir(output_dir);
        const auto w = weights.load(emp.returns, dir);
        const auto cfg = objective.config(v, emp.returns, w);
        const auto rows = surface_scan(cfg, bounds, base, param_x, param_y, grid[0], grid[1]);
        write(dir / ("surface_" + param_x + "_" + param_y + ".csv"),
              format_surface_csv(rows, param_x, param_y, metadata_header(metadata(app, "surface", objective.seed))));
        return 0;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and calibration of Farmer-Joshi style agent-based market models", "fjcal"};
    app.set_config("--config", "", "TOML or INI config file; command-line flags take precedence");
    app.require_subcommand(1);

    SimulateCommand simulate_cmd;
    CalibrateCommand calibrate_cmd;
    ReportCommand report_cmd;
    SurfaceCommand surface_cmd;
    auto* sim = app.add_subcommand("simulate", "Simulate one price path");
    auto* cal = app.add_subcommand("calibrate", "Calibrate parameters to an empirical price series");
    auto* rep = app.add_subcommand("report", "Plot-ready data at calibrated parameters");
    auto* sur = app.add_subcommand("surface", "Objective surface over two parameters");
    simulate_cmd.add(sim);
    calibrate_cmd.add(cal);
    report_cmd.add(rep);
    surface_cmd.add(sur);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (sim->parsed()) return simulate_cmd.run(*sim);
        if (cal->parsed()) return calibrate_cmd.run(*cal);
        if (rep->parsed()) return report_cmd.run(*rep);
        if (sur->parsed()) return surface_cmd.run(*sur);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
