#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fjcal/parallel.hpp"

namespace fjcal {

using Point = std::vector<double>;
using ObjectiveFn = std::function<double(std::span<const double>)>;

// ---------------------------------------------------------------------------
// Unconstrained Nelder-Mead (reflection 1, expansion 2, contraction 0.5,
// shrink 0.5). Used directly for the GARCH fit and as the local engine of NMTA.

struct NelderMeadOptions {
    int max_iterations = 1000;
    double f_tolerance = 1e-10;  // stop when f spread <= f_tol * (|f_best| + f_tol)
    double x_tolerance = 1e-10;  // ... and the simplex diameter <= x_tol
};

/// Simplex with vertices kept sorted by value (best first).
class Simplex {
public:
    Simplex(std::vector<Point> vertices, std::vector<double> values);

    /// Axis simplex around x0 with per-coordinate step sizes.
    static Simplex around(const Point& x0, std::span<const double> steps, const ObjectiveFn& f, int& evaluations);

    /// One Nelder-Mead iteration. Returns the number of evaluations used.
    int iterate(const ObjectiveFn& f);

    [[nodiscard]] bool converged(const NelderMeadOptions& opt) const;
    [[nodiscard]] const Point& best() const noexcept { return vertices_.front(); }
    [[nodiscard]] double best_value() const noexcept { return values_.front(); }
    [[nodiscard]] const std::vector<Point>& vertices() const noexcept { return vertices_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return vertices_.front().size(); }

private:
    void sort();

    std::vector<Point> vertices_;
    std::vector<double> values_;
};

struct NelderMeadResult {
    Point x;
    double value = 0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

[[nodiscard]] NelderMeadResult nelder_mead(const ObjectiveFn& f, const Point& x0, std::span<const double> steps,
                                           const NelderMeadOptions& opt = {});

// ---------------------------------------------------------------------------
// Box-constrained search space shared by the GA and NMTA.

struct Bounds {
    Point lower;
    Point upper;
    std::vector<bool> integral;
    /// Optional cross-constraint repair applied after clamping and rounding.
    std::function<void(Point&)> repair;

    [[nodiscard]] std::size_t dimension() const noexcept { return lower.size(); }
    [[nodiscard]] double width(std::size_t i) const noexcept { return upper[i] - lower[i]; }
    void check() const;
};

/// Clamp into the box, round integral coordinates, apply the repair hook.
[[nodiscard]] Point make_feasible(const Bounds& b, Point x);

/// Reflect once at violated bounds, then make_feasible.
[[nodiscard]] Point reflect_into(const Bounds& b, Point x);

[[nodiscard]] bool is_feasible(const Bounds& b, std::span<const double> x);

/// Batch objective: evaluates many candidates, possibly concurrently. The
/// default wraps a thread-safe ObjectiveFn with for_each_index.
using BatchObjective = std::function<std::vector<double>(const std::vector<Point>&)>;

[[nodiscard]] BatchObjective batch(ObjectiveFn f, Execution exec);

struct OptimizationResult {
    Point best;
    double best_fitness = 0;
    std::vector<double> trace;  // best-so-far after each generation / iteration
    long evaluations = 0;
    std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Real-coded genetic algorithm.

struct GaOptions {
    int population = 40;
    int generations = 100;
    double crossover_rate = 0.8;
    double mutation_scale = 0.1;  // s.d. as a fraction of the bound width
    double mutation_rate = -1;    // per-coordinate probability; <0 means 1/dimension
    double mutation_decay = 2.0;  // s.d. shrinks by (1 - g/G)^decay over the generations; 0 keeps it fixed
    double blend_alpha = 0.5;     // BLX-alpha
    int elites = 1;
};

[[nodiscard]] OptimizationResult ga_optimize(const BatchObjective& f, const Bounds& bounds, const GaOptions& opt,
                                             std::uint64_t seed);

// ---------------------------------------------------------------------------
// Nelder-Mead with threshold accepting.

struct NmtaOptions {
    int restarts = 3;
    int iterations_per_restart = 200;
    int threshold_count = 10;      // J
    int threshold_every = 10;      // K: a shift is proposed every K iterations
    int threshold_samples = 100;   // neighbour pairs used to build the sequence
    double simplex_scale = 0.1;    // initial edge as a fraction of bound width
    double shift_scale = 0.1;      // s.d. of a whole-simplex shift, fraction of width
    /// Explicit thresholds (must be non-increasing, >= 0). Empty: build from samples.
    std::vector<double> thresholds;
};

struct ThresholdEvent {
    int iteration;
    double threshold;
    double delta;  // best value after shift minus best value before
    bool accepted;
};

struct NmtaResult : OptimizationResult {
    std::vector<double> thresholds;
    std::vector<ThresholdEvent> events;
    std::vector<double> simplex_best;  // current simplex best after each iteration
};

/// Decreasing quantiles of |f(x) - f(x + shift)| over random x in the box.
[[nodiscard]] std::vector<double> threshold_sequence(const BatchObjective& f, const Bounds& bounds,
                                                     const NmtaOptions& opt, std::uint64_t seed);

/// Threshold steps with tau_j == 0 are skipped, so an all-zero sequence is
/// exactly plain restarted Nelder-Mead.
[[nodiscard]] NmtaResult nmta_optimize(const BatchObjective& f, const Bounds& bounds, const NmtaOptions& opt,
                                       std::uint64_t seed);

/// Restarted Nelder-Mead on the same schedule, without threshold steps.
[[nodiscard]] NmtaResult nm_optimize(const BatchObjective& f, const Bounds& bounds, NmtaOptions opt,
                                     std::uint64_t seed);

}  // namespace fjcal
