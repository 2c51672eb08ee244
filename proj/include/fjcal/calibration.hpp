#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fjcal/model.hpp"
#include "fjcal/optim.hpp"
#include "fjcal/parallel.hpp"
#include "fjcal/stats.hpp"
#include "fjcal/weighting.hpp"

namespace fjcal {

// ---------------------------------------------------------------------------
// Parameter space

struct ParameterRange {
    std::string name;
    double lower;
    double upper;
};

/// Box bounds for every model parameter, in canonical parameter order.
using BoundsTable = std::vector<ParameterRange>;

[[nodiscard]] BoundsTable default_bounds();
[[nodiscard]] BoundsTable parse_bounds_json(const std::string& text);
[[nodiscard]] std::string bounds_to_json(const BoundsTable& table);
[[nodiscard]] const ParameterRange& find_range(const BoundsTable& table, std::string_view name);

/// The free parameters of a variant as an ordered real vector, with box
/// bounds, integrality flags and repair of the ordering constraints.
class ParameterSpace {
public:
    ParameterSpace(Variant variant, const BoundsTable& table, ModelParameters base = {});

    [[nodiscard]] Variant variant() const noexcept { return variant_; }
    [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
    [[nodiscard]] const Bounds& bounds() const noexcept { return bounds_; }
    [[nodiscard]] const ModelParameters& base() const noexcept { return base_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return names_.size(); }

    /// Base parameters with the free coordinates replaced by make_feasible(x).
    [[nodiscard]] ModelParameters to_parameters(std::span<const double> x) const;
    [[nodiscard]] Point to_vector(const ModelParameters& p) const;

private:
    Variant variant_;
    std::vector<std::string> names_;
    Bounds bounds_;
    ModelParameters base_;
};

// ---------------------------------------------------------------------------
// Objective

/// Moments of one simulated path; the default simulates and calls moment_vector.
using MomentSampler = std::function<MomentVector(const ModelParameters&, std::uint64_t seed)>;

struct ObjectiveConfig {
    Variant variant = Variant::Adaptive;
    int replications = 4;   // simulations averaged per evaluation
    int sim_days = 500;
    double p0 = 0.0;        // initial log price
    std::vector<double> empirical_returns;
    MomentVector empirical_moments;
    MomentMatrix weights = MomentMatrix::Identity();
    std::uint64_t master_seed = 1;
    double penalty = 1e12;
    /// Same simulation seeds for every parameter vector. When off, the seeds
    /// are also keyed by the parameter values.
    bool common_random_numbers = true;
    Execution execution = Execution::Parallel;
    MomentSampler sampler;  // empty: simulate the model

    void check() const;
};

/// Config with m^e computed from r_emp and simulations as long as r_emp.
[[nodiscard]] ObjectiveConfig make_objective_config(Variant variant, std::vector<double> r_emp,
                                                    const MomentMatrix& weights, int replications,
                                                    std::uint64_t master_seed);

/// Raised when more than half of the simulations for one evaluation fail.
class EstimationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Seed of simulation i for a given parameter set.
[[nodiscard]] std::uint64_t simulation_seed(const ObjectiveConfig& cfg, const ModelParameters& p, int i);

/// Mean of m^e - m^s over the successful simulations.
[[nodiscard]] MomentColumn estimation_error(const ModelParameters& p, const ObjectiveConfig& cfg);

/// G' W G, or cfg.penalty when the estimation error cannot be formed.
[[nodiscard]] double fitness(const ModelParameters& p, const ObjectiveConfig& cfg);
[[nodiscard]] double quadratic_form(const MomentColumn& g, const MomentMatrix& w);

// ---------------------------------------------------------------------------
// Calibration

enum class Optimizer { GA, NMTA };

[[nodiscard]] std::string_view to_string(Optimizer o) noexcept;
/// Throws std::invalid_argument for anything but "ga" or "nmta".
[[nodiscard]] Optimizer parse_optimizer(std::string_view name);

struct OptimizerSettings {
    Optimizer optimizer = Optimizer::GA;
    GaOptions ga;
    NmtaOptions nmta;
};

struct CalibrationResult {
    std::string optimizer;
    Variant variant = Variant::Adaptive;
    std::vector<std::string> names;
    Point best;
    ModelParameters best_parameters;
    double best_fitness = 0;
    std::vector<double> trace;
    long evaluations = 0;
    std::uint64_t seed = 0;
    double wall_seconds = 0;
    std::vector<double> thresholds;      // NMTA only
    std::vector<ThresholdEvent> events;  // NMTA only
};

/// Objective over the free-parameter vector, evaluated with cfg.execution.
[[nodiscard]] BatchObjective make_batch_objective(const ParameterSpace& space, const ObjectiveConfig& cfg);

[[nodiscard]] CalibrationResult calibrate(const ObjectiveConfig& cfg, const ParameterSpace& space,
                                          const OptimizerSettings& settings, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Replication

struct ParameterInterval {
    std::string name;
    double point;  // value in the best-fitness run
    double lower;  // 2.5% percentile across runs
    double upper;  // 97.5% percentile across runs
};

struct ReplicationRun {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    CalibrationResult result;
};

struct ReplicationSummary {
    std::string optimizer;
    std::vector<ParameterInterval> parameters;
    ParameterInterval fitness;
    int successes = 0;
    int failures = 0;
    std::vector<ReplicationRun> runs;
};

/// Point = best-fitness run, interval = type-7 2.5/97.5 percentiles across runs.
[[nodiscard]] ReplicationSummary summarize_runs(const std::vector<std::string>& names,
                                                const std::vector<Point>& estimates,
                                                const std::vector<double>& fitness_values);

/// Runs `runs` calibrations with seeds derive_seed(seed, Optimizer, r). Failed
/// runs are kept in the summary but excluded from the intervals.
[[nodiscard]] ReplicationSummary replicate_runs(int runs, std::uint64_t seed,
                                                const std::function<CalibrationResult(std::uint64_t)>& run,
                                                Execution exec);

[[nodiscard]] ReplicationSummary replicate_calibrations(const ObjectiveConfig& cfg, const ParameterSpace& space,
                                                        const OptimizerSettings& settings, int runs,
                                                        std::uint64_t seed);

/// parameter,estimate,ci_lower,ci_upper rows plus a final fitness row.
[[nodiscard]] std::string format_replication_csv(const ReplicationSummary& s, const std::string& metadata = {});

// ---------------------------------------------------------------------------
// Objective surface

struct SurfacePoint {
    double x;
    double y;
    double fitness;
    bool operator==(const SurfacePoint&) const = default;
};

/// Fitness over an nx-by-ny grid spanning the bounds of two parameters, all
/// other parameters taken from `base`. Rows are x-major.
[[nodiscard]] std::vector<SurfacePoint> surface_scan(const ObjectiveConfig& cfg, const BoundsTable& table,
                                                     const ModelParameters& base, const std::string& param_x,
                                                     const std::string& param_y, int nx, int ny);

[[nodiscard]] std::string format_surface_csv(const std::vector<SurfacePoint>& rows, const std::string& param_x,
                                             const std::string& param_y, const std::string& metadata = {});

// ---------------------------------------------------------------------------
// JSON

[[nodiscard]] std::string parameters_to_json(const ModelParameters& p);
[[nodiscard]] ModelParameters parameters_from_json(const std::string& text, ModelParameters base = {});
[[nodiscard]] std::string calibration_to_json(const CalibrationResult& r,
                                              const std::vector<std::pair<std::string, std::string>>& echo = {});
/// Reads back the fields needed to re-simulate: variant and best parameters.
[[nodiscard]] CalibrationResult calibration_from_json(const std::string& text);
[[nodiscard]] std::string replication_to_json(const ReplicationSummary& s);

}  // namespace fjcal
