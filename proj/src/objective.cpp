#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "fjcal/calibration.hpp"
#include "fjcal/market.hpp"
#include "fjcal/rng.hpp"

namespace fjcal {

// ---------------------------------------------------------------------------
// Bounds

BoundsTable default_bounds() {
    // Keep in sync with config/default_bounds.json.
    return {
        {"n_traders", 50, 200},   {"lambda", 1, 100},       {"a", 0.001, 0.5},       {"d_min", 1, 10},
        {"d_max", 10, 100},       {"mu_eta", -0.001, 0.001}, {"sigma_eta", 0.001, 0.03}, {"sigma_zeta", 0.001, 0.02},
        {"T_min", 0.01, 0.2},     {"T_max", 0.2, 2.0},      {"tau_min", -0.2, 0.0},  {"tau_max", 0.0, 0.009},
        {"v_min", -0.2, -0.001},  {"v_max", 0.001, 0.2},    {"gamma", 1e-4, 0.1},    {"horizon", 2, 100},
    };
}

const ParameterRange& find_range(const BoundsTable& table, std::string_view name) {
    for (const auto& r : table)
        if (r.name == name) return r;
    throw std::invalid_argument("no bounds for parameter '" + std::string(name) + "'");
}

BoundsTable parse_bounds_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    const auto& obj = j.contains("bounds") ? j.at("bounds") : j;
    BoundsTable table;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!is_parameter_name(it.key()))
            throw std::invalid_argument("unknown parameter '" + it.key() + "'; valid names: " +
                                        valid_parameter_list());
        const auto& v = it.value();
        if (!v.is_array() || v.size() != 2) throw std::invalid_argument("bounds for '" + it.key() + "' must be [lo, hi]");
        const double lo = v[0].get<double>();
        const double hi = v[1].get<double>();
        if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi)
            throw std::invalid_argument("bounds for '" + it.key() + "' must be finite with lo <= hi");
        table.push_back({it.key(), lo, hi});
    }
    // Missing entries fall back to the defaults; order becomes canonical.
    BoundsTable out;
    for (auto name : kParameterNames) {
        auto found = std::find_if(table.begin(), table.end(), [&](const auto& r) { return r.name == name; });
        out.push_back(found != table.end() ? *found : find_range(default_bounds(), name));
    }
    return out;
}

std::string bounds_to_json(const BoundsTable& table) {
    nlohmann::ordered_json j;
    for (const auto& r : table) j["bounds"][r.name] = {r.lower, r.upper};
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Parameter space

namespace {

int index_of(const std::vector<std::string>& names, std::string_view name) {
    auto it = std::find(names.begin(), names.end(), name);
    return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

}  // namespace

ParameterSpace::ParameterSpace(Variant variant, const BoundsTable& table, ModelParameters base)
    : variant_(variant), base_(base) {
    for (auto name : free_parameters(variant)) {
        const auto& r = find_range(table, name);
        names_.emplace_back(name);
        bounds_.lower.push_back(r.lower);
        bounds_.upper.push_back(r.upper);
        bounds_.integral.push_back(is_integral_parameter(name));
    }
    bounds_.check();

    // Ordered pairs (lower name, upper name) that must satisfy lower <= upper.
    std::vector<std::pair<int, int>> ordered;
    for (auto [lo, hi] : {std::pair{"d_min", "d_max"}, std::pair{"T_min", "T_max"}, std::pair{"tau_min", "tau_max"},
                          std::pair{"v_min", "v_max"}}) {
        const int i = index_of(names_, lo);
        const int k = index_of(names_, hi);
        if (i < 0 || k < 0) continue;
        if (bounds_.lower[static_cast<std::size_t>(i)] > bounds_.upper[static_cast<std::size_t>(k)])
            throw std::invalid_argument(std::string("bounds make ") + lo + " <= " + hi + " infeasible");
        ordered.emplace_back(i, k);
    }
    const int tau_max = index_of(names_, "tau_max");
    const int t_min = index_of(names_, "T_min");
    if (tau_max >= 0 && t_min >= 0 &&
        !(bounds_.upper[static_cast<std::size_t>(tau_max)] < bounds_.lower[static_cast<std::size_t>(t_min)]))
        throw std::invalid_argument("bounds must keep tau_max below T_min: upper(tau_max) < lower(T_min)");

    const Bounds box = bounds_;
    bounds_.repair = [ordered, box](Point& x) {
        for (auto [i, k] : ordered) {
            const auto a = static_cast<std::size_t>(i);
            const auto b = static_cast<std::size_t>(k);
            if (x[a] <= x[b]) continue;
            x[b] = std::clamp(x[a], box.lower[b], box.upper[b]);
            if (x[a] > x[b]) x[a] = std::clamp(x[b], box.lower[a], box.upper[a]);
        }
    };
    validate(to_parameters(make_feasible(bounds_, bounds_.lower)));
}

ModelParameters ParameterSpace::to_parameters(std::span<const double> x) const {
    if (x.size() != names_.size()) throw std::invalid_argument("parameter vector has the wrong dimension");
    const auto feasible = make_feasible(bounds_, Point(x.begin(), x.end()));
    ModelParameters p = base_;
    for (std::size_t i = 0; i < names_.size(); ++i) set_parameter(p, names_[i], feasible[i]);
    return p;
}

Point ParameterSpace::to_vector(const ModelParameters& p) const {
    Point x;
    for (const auto& n : names_) x.push_back(get_parameter(p, n));
    return x;
}

// ---------------------------------------------------------------------------
// Objective

void ObjectiveConfig::check() const {
    if (replications < 1) throw std::invalid_argument("replications must be >= 1");
    if (sim_days < 1) throw std::invalid_argument("sim_days must be >= 1");
    if (!sampler && empirical_returns.empty()) throw std::invalid_argument("empirical returns are required");
    if (!weights.allFinite()) throw std::invalid_argument("weight matrix has non-finite entries");
    if (!(penalty > 0)) throw std::invalid_argument("penalty must be > 0");
}

ObjectiveConfig make_objective_config(Variant variant, std::vector<double> r_emp, const MomentMatrix& weights,
                                      int replications, std::uint64_t master_seed) {
    ObjectiveConfig cfg;
    cfg.variant = variant;
    cfg.replications = replications;
    cfg.sim_days = static_cast<int>(r_emp.size());
    cfg.empirical_moments = moment_vector(r_emp, r_emp);
    cfg.empirical_returns = std::move(r_emp);
    cfg.weights = weights;
    cfg.master_seed = master_seed;
    cfg.check();
    return cfg;
}

std::uint64_t simulation_seed(const ObjectiveConfig& cfg, const ModelParameters& p, int i) {
    std::uint64_t master = cfg.master_seed;
    if (!cfg.common_random_numbers)
        for (auto name : kParameterNames) master = mix64(master ^ std::bit_cast<std::uint64_t>(get_parameter(p, name)));
    return derive_seed(master, Stream::Replicate, static_cast<std::uint64_t>(i));
}

MomentColumn estimation_error(const ModelParameters& p, const ObjectiveConfig& cfg) {
    cfg.check();
    const auto n = static_cast<std::size_t>(cfg.replications);
    std::vector<MomentVector> sims(n);
    std::vector<char> ok(n, 0);
    for_each_index(n, cfg.execution, [&](std::size_t i) {
        const auto seed = simulation_seed(cfg, p, static_cast<int>(i));
        try {
            if (cfg.sampler) {
                sims[i] = cfg.sampler(p, seed);
            } else {
                const auto out = simulate(p, cfg.variant, cfg.sim_days, cfg.p0, seed);
                sims[i] = moment_vector(out.log_returns, cfg.empirical_returns);
            }
            ok[i] = 1;
        } catch (const SimulationBlowUp&) {
        } catch (const StatisticError&) {
        }
    });
    MomentColumn g = MomentColumn::Zero();
    int used = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!ok[i]) continue;
        ++used;
        for (std::size_t j = 0; j < kMomentCount; ++j)
            g(static_cast<Eigen::Index>(j)) += cfg.empirical_moments[j] - sims[i][j];
    }
    if (2 * (cfg.replications - used) > cfg.replications)
        throw EstimationFailure(std::to_string(cfg.replications - used) + " of " + std::to_string(cfg.replications) +
                                " simulations failed");
    return g / static_cast<double>(used);
}

double quadratic_form(const MomentColumn& g, const MomentMatrix& w) { return g.dot(w * g); }

double fitness(const ModelParameters& p, const ObjectiveConfig& cfg) {
    try {
        const double f = quadratic_form(estimation_error(p, cfg), cfg.weights);
        return std::isfinite(f) ? std::max(0.0, f) : cfg.penalty;
    } catch (const EstimationFailure&) {
        return cfg.penalty;
    }
}

}  // namespace fjcal
