#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

#include "fjcal/calibration.hpp"
#include "fjcal/rng.hpp"

namespace fjcal {

std::string_view to_string(Optimizer o) noexcept { return o == Optimizer::GA ? "ga" : "nmta"; }

Optimizer parse_optimizer(std::string_view name) {
    if (name == "ga") return Optimizer::GA;
    if (name == "nmta") return Optimizer::NMTA;
    throw std::invalid_argument("unknown optimizer '" + std::string(name) + "' (expected ga or nmta)");
}

BatchObjective make_batch_objective(const ParameterSpace& space, const ObjectiveConfig& cfg) {
    return batch([&space, &cfg](std::span<const double> x) { return fitness(space.to_parameters(x), cfg); },
                 cfg.execution);
}

CalibrationResult calibrate(const ObjectiveConfig& cfg, const ParameterSpace& space, const OptimizerSettings& settings,
                            std::uint64_t seed) {
    cfg.check();
    if (space.variant() != cfg.variant) throw std::invalid_argument("parameter space and objective variant differ");
    const auto start = std::chrono::steady_clock::now();
    const auto f = make_batch_objective(space, cfg);

    CalibrationResult res;
    res.optimizer = std::string(to_string(settings.optimizer));
    res.variant = cfg.variant;
    res.names = space.names();
    OptimizationResult opt;
    if (settings.optimizer == Optimizer::GA) {
        opt = ga_optimize(f, space.bounds(), settings.ga, seed);
    } else {
        auto nmta = nmta_optimize(f, space.bounds(), settings.nmta, seed);
        res.thresholds = nmta.thresholds;
        res.events = nmta.events;
        opt = std::move(nmta);
    }
    res.best = make_feasible(space.bounds(), opt.best);
    res.best_parameters = space.to_parameters(res.best);
    res.best_fitness = opt.best_fitness;
    res.trace = std::move(opt.trace);
    res.evaluations = opt.evaluations;
    res.seed = seed;
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

// ---------------------------------------------------------------------------
// Replication

ReplicationSummary summarize_runs(const std::vector<std::string>& names, const std::vector<Point>& estimates,
                                  const std::vector<double>& fitness_values) {
    if (estimates.size() != fitness_values.size()) throw std::invalid_argument("estimates and fitness differ in length");
    if (estimates.size() < 2) throw std::runtime_error("replication needs at least 2 successful runs");
    std::size_t best = 0;
    for (std::size_t r = 1; r < estimates.size(); ++r)
        if (fitness_values[r] < fitness_values[best]) best = r;

    ReplicationSummary s;
    s.successes = static_cast<int>(estimates.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
        std::vector<double> column;
        for (const auto& e : estimates) {
            if (e.size() != names.size()) throw std::invalid_argument("estimate has the wrong dimension");
            column.push_back(e[i]);
        }
        s.parameters.push_back({names[i], estimates[best][i], quantile(column, 0.025), quantile(column, 0.975)});
    }
    s.fitness = {"fitness", fitness_values[best], quantile(fitness_values, 0.025), quantile(fitness_values, 0.975)};
    return s;
}

ReplicationSummary replicate_runs(int runs, std::uint64_t seed,
                                  const std::function<CalibrationResult(std::uint64_t)>& run, Execution exec) {
    if (runs < 2) throw std::invalid_argument("replication needs runs >= 2");
    std::vector<ReplicationRun> all(static_cast<std::size_t>(runs));
    for_each_index(all.size(), exec, [&](std::size_t r) {
        auto& slot = all[r];
        slot.seed = derive_seed(seed, Stream::Optimizer, r);
        try {
            slot.result = run(slot.seed);
            slot.ok = std::isfinite(slot.result.best_fitness);
            if (!slot.ok) slot.error = "non-finite fitness";
        } catch (const std::exception& e) {
            slot.error = e.what();
        }
    });
    std::vector<Point> estimates;
    std::vector<double> fit;
    std::vector<std::string> names;
    for (const auto& r : all) {
        if (!r.ok) continue;
        names = r.result.names;
        estimates.push_back(r.result.best);
        fit.push_back(r.result.best_fitness);
    }
    auto s = summarize_runs(names, estimates, fit);
    s.failures = runs - s.successes;
    s.optimizer = all.front().result.optimizer;
    for (const auto& r : all)
        if (r.ok) s.optimizer = r.result.optimizer;
    s.runs = std::move(all);
    return s;
}

ReplicationSummary replicate_calibrations(const ObjectiveConfig& cfg, const ParameterSpace& space,
                                          const OptimizerSettings& settings, int runs, std::uint64_t seed) {
    return replicate_runs(
        runs, seed, [&](std::uint64_t s) { return calibrate(cfg, space, settings, s); }, cfg.execution);
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string format_replication_csv(const ReplicationSummary& s, const std::string& metadata) {
    std::string out = metadata + "parameter,estimate,ci_lower,ci_upper\n";
    for (const auto& p : s.parameters)
        out += p.name + "," + fmt(p.point) + "," + fmt(p.lower) + "," + fmt(p.upper) + "\n";
    out += "fitness," + fmt(s.fitness.point) + "," + fmt(s.fitness.lower) + "," + fmt(s.fitness.upper) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Surface

std::vector<SurfacePoint> surface_scan(const ObjectiveConfig& cfg, const BoundsTable& table,
                                       const ModelParameters& base, const std::string& param_x,
                                       const std::string& param_y, int nx, int ny) {
    for (const auto* name : {&param_x, &param_y})
        if (!is_parameter_name(*name))
            throw std::invalid_argument("unknown parameter '" + *name + "'; valid names: " + valid_parameter_list());
    if (param_x == param_y) throw std::invalid_argument("surface parameters must differ");
    if (nx < 2 || ny < 2) throw std::invalid_argument("surface grid must be at least 2x2");
    cfg.check();

    auto axis = [&](const std::string& name, int n) {
        const auto& r = find_range(table, name);
        std::vector<double> v(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            double x = r.lower + (r.upper - r.lower) * i / (n - 1);
            if (is_integral_parameter(name)) x = std::round(x);
            v[static_cast<std::size_t>(i)] = x;
        }
        return v;
    };
    const auto xs = axis(param_x, nx);
    const auto ys = axis(param_y, ny);
    const auto cells = xs.size() * ys.size();
    return map_indices<SurfacePoint>(cells, cfg.execution, [&](std::size_t c) {
        const double x = xs[c / ys.size()];
        const double y = ys[c % ys.size()];
        ModelParameters p = base;
        set_parameter(p, param_x, x);
        set_parameter(p, param_y, y);
        double f = cfg.penalty;
        try {
            validate(p);
            f = fitness(p, cfg);
        } catch (const ParameterError&) {
        }
        return SurfacePoint{x, y, f};
    });
}

std::string format_surface_csv(const std::vector<SurfacePoint>& rows, const std::string& param_x,
                               const std::string& param_y, const std::string& metadata) {
    std::string out = metadata + param_x + "," + param_y + ",fitness\n";
    for (const auto& r : rows) out += fmt(r.x) + "," + fmt(r.y) + "," + fmt(r.fitness) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::ordered_json parameters_json(const ModelParameters& p) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (auto name : kParameterNames) {
        const double v = get_parameter(p, name);
        if (is_integral_parameter(name))
            j[std::string(name)] = static_cast<long>(v);
        else
            j[std::string(name)] = v;
    }
    return j;
}

ModelParameters parameters_from(const nlohmann::json& j, ModelParameters base) {
    for (auto it = j.begin(); it != j.end(); ++it) set_parameter(base, it.key(), it.value().get<double>());
    return base;
}

}  // namespace

std::string parameters_to_json(const ModelParameters& p) { return parameters_json(p).dump(2) + "\n"; }

ModelParameters parameters_from_json(const std::string& text, ModelParameters base) {
    const auto j = nlohmann::json::parse(text);
    return parameters_from(j.contains("parameters") ? j.at("parameters") : j, base);
}

std::string calibration_to_json(const CalibrationResult& r,
                                const std::vector<std::pair<std::string, std::string>>& echo) {
    nlohmann::ordered_json j;
    j["optimizer"] = r.optimizer;
    j["variant"] = std::string(to_string(r.variant));
    j["seed"] = r.seed;
    j["best_fitness"] = r.best_fitness;
    j["evaluations"] = r.evaluations;
    j["free_parameters"] = r.names;
    j["best_vector"] = r.best;
    j["parameters"] = parameters_json(r.best_parameters);
    j["trace"] = r.trace;
    if (r.optimizer == "nmta") {
        j["thresholds"] = r.thresholds;
        auto ev = nlohmann::ordered_json::array();
        for (const auto& e : r.events)
            ev.push_back({{"iteration", e.iteration}, {"threshold", e.threshold}, {"delta", e.delta},
                          {"accepted", e.accepted}});
        j["threshold_events"] = ev;
    }
    auto cfg = nlohmann::ordered_json::object();
    for (const auto& [k, v] : echo) cfg[k] = v;
    j["config"] = cfg;
    return j.dump(2) + "\n";
}

CalibrationResult calibration_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    CalibrationResult r;
    r.optimizer = j.value("optimizer", "");
    r.variant = parse_variant(j.at("variant").get<std::string>());
    r.best_parameters = parameters_from(j.at("parameters"), {});
    validate(r.best_parameters);
    r.best_fitness = j.value("best_fitness", 0.0);
    r.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("free_parameters")) r.names = j.at("free_parameters").get<std::vector<std::string>>();
    if (j.contains("best_vector")) r.best = j.at("best_vector").get<std::vector<double>>();
    if (j.contains("trace")) r.trace = j.at("trace").get<std::vector<double>>();
    return r;
}

std::string replication_to_json(const ReplicationSummary& s) {
    nlohmann::ordered_json j;
    j["optimizer"] = s.optimizer;
    j["successes"] = s.successes;
    j["failures"] = s.failures;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& p : s.parameters)
        rows.push_back({{"parameter", p.name}, {"estimate", p.point}, {"ci_lower", p.lower}, {"ci_upper", p.upper}});
    j["parameters"] = rows;
    j["fitness"] = {{"estimate", s.fitness.point}, {"ci_lower", s.fitness.lower}, {"ci_upper", s.fitness.upper}};
    auto runs = nlohmann::ordered_json::array();
    for (const auto& r : s.runs) {
        nlohmann::ordered_json e = {{"seed", r.seed}, {"ok", r.ok}};
        if (r.ok) {
            e["best_fitness"] = r.result.best_fitness;
            e["best_vector"] = r.result.best;
        } else {
            e["error"] = r.error;
        }
        runs.push_back(e);
    }
    j["runs"] = runs;
    return j.dump(2) + "\n";
}

}  // namespace fjcal
