#include "fjcal/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "fjcal/rng.hpp"
#include "fjcal/stats.hpp"

namespace fjcal {

// ---------------------------------------------------------------------------
// Nelder-Mead

namespace {

Point affine(const Point& base, const Point& dir_from, double coef, const Point& dir_to) {
    // base + coef * (dir_to - dir_from)
    Point out(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) out[i] = base[i] + coef * (dir_to[i] - dir_from[i]);
    return out;
}

double sanitize(double v) { return std::isnan(v) ? std::numeric_limits<double>::infinity() : v; }

}  // namespace

Simplex::Simplex(std::vector<Point> vertices, std::vector<double> values)
    : vertices_(std::move(vertices)), values_(std::move(values)) {
    if (vertices_.size() < 2 || vertices_.size() != values_.size() ||
        vertices_.front().size() + 1 != vertices_.size())
        throw std::invalid_argument("Simplex: need dimension + 1 vertices with values");
    for (double& v : values_) v = sanitize(v);
    sort();
}

Simplex Simplex::around(const Point& x0, std::span<const double> steps, const ObjectiveFn& f, int& evaluations) {
    std::vector<Point> v{x0};
    for (std::size_t i = 0; i < x0.size(); ++i) {
        Point x = x0;
        x[i] += steps[i] != 0 ? steps[i] : 1e-3;
        v.push_back(std::move(x));
    }
    std::vector<double> f_values;
    for (const auto& x : v) f_values.push_back(f(x));
    evaluations += static_cast<int>(v.size());
    return Simplex(std::move(v), std::move(f_values));
}

void Simplex::sort() {
    std::vector<std::size_t> idx(vertices_.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values_[a] < values_[b]; });
    std::vector<Point> v;
    std::vector<double> f;
    for (auto i : idx) {
        v.push_back(std::move(vertices_[i]));
        f.push_back(values_[i]);
    }
    vertices_ = std::move(v);
    values_ = std::move(f);
}

int Simplex::iterate(const ObjectiveFn& f) {
    const std::size_t n = dimension();
    const std::size_t worst = n;
    Point centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) centroid[j] += vertices_[i][j] / static_cast<double>(n);

    int evals = 0;
    auto eval = [&](const Point& x) {
        ++evals;
        return sanitize(f(x));
    };
    auto replace_worst = [&](Point x, double fx) {
        vertices_[worst] = std::move(x);
        values_[worst] = fx;
    };

    Point xr = affine(centroid, vertices_[worst], 1.0, centroid);
    const double fr = eval(xr);
    if (fr < values_[0]) {
        Point xe = affine(centroid, vertices_[worst], 2.0, centroid);
        const double fe = eval(xe);
        if (fe < fr)
            replace_worst(std::move(xe), fe);
        else
            replace_worst(std::move(xr), fr);
    } else if (fr < values_[n - 1]) {
        replace_worst(std::move(xr), fr);
    } else {
        bool shrink = false;
        if (fr < values_[worst]) {
            Point xc = affine(centroid, centroid, 0.5, xr);
            const double fc = eval(xc);
            if (fc <= fr)
                replace_worst(std::move(xc), fc);
            else
                shrink = true;
        } else {
            Point xc = affine(centroid, centroid, 0.5, vertices_[worst]);
            const double fc = eval(xc);
            if (fc < values_[worst])
                replace_worst(std::move(xc), fc);
            else
                shrink = true;
        }
        if (shrink) {
            for (std::size_t i = 1; i <= n; ++i) {
                vertices_[i] = affine(vertices_[0], vertices_[0], 0.5, vertices_[i]);
                values_[i] = eval(vertices_[i]);
            }
        }
    }
    sort();
    return evals;
}

bool Simplex::converged(const NelderMeadOptions& opt) const {
    const double spread = values_.back() - values_.front();
    if (!(spread <= opt.f_tolerance * (std::abs(values_.front()) + opt.f_tolerance))) return false;
    double diam = 0;
    for (std::size_t i = 1; i < vertices_.size(); ++i)
        for (std::size_t j = 0; j < dimension(); ++j)
            diam = std::max(diam, std::abs(vertices_[i][j] - vertices_[0][j]));
    return diam <= opt.x_tolerance;
}

NelderMeadResult nelder_mead(const ObjectiveFn& f, const Point& x0, std::span<const double> steps,
                             const NelderMeadOptions& opt) {
    NelderMeadResult res;
    auto simplex = Simplex::around(x0, steps, f, res.evaluations);
    for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
        if (simplex.converged(opt)) {
            res.converged = true;
            break;
        }
        res.evaluations += simplex.iterate(f);
    }
    res.x = simplex.best();
    res.value = simplex.best_value();
    return res;
}

// ---------------------------------------------------------------------------
// Bounds

void Bounds::check() const {
    if (lower.empty() || lower.size() != upper.size() || (!integral.empty() && integral.size() != lower.size()))
        throw std::invalid_argument("Bounds: inconsistent dimensions");
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || lower[i] > upper[i])
            throw std::invalid_argument("Bounds: invalid interval at coordinate " + std::to_string(i));
}

Point make_feasible(const Bounds& b, Point x) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::isnan(x[i])) x[i] = b.lower[i];
        x[i] = std::clamp(x[i], b.lower[i], b.upper[i]);
        if (!b.integral.empty() && b.integral[i])
            x[i] = std::clamp(std::round(x[i]), std::ceil(b.lower[i]), std::floor(b.upper[i]));
    }
    if (b.repair) b.repair(x);
    return x;
}

Point reflect_into(const Bounds& b, Point x) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < b.lower[i]) x[i] = b.lower[i] + (b.lower[i] - x[i]);
        if (x[i] > b.upper[i]) x[i] = b.upper[i] - (x[i] - b.upper[i]);
    }
    return make_feasible(b, std::move(x));
}

bool is_feasible(const Bounds& b, std::span<const double> x) {
    if (x.size() != b.dimension()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= b.lower[i] && x[i] <= b.upper[i])) return false;
        if (!b.integral.empty() && b.integral[i] && x[i] != std::round(x[i])) return false;
    }
    return true;
}

BatchObjective batch(ObjectiveFn f, Execution exec) {
    return [f = std::move(f), exec](const std::vector<Point>& xs) {
        return map_indices<double>(xs.size(), exec, [&](std::size_t i) { return f(xs[i]); });
    };
}

// ---------------------------------------------------------------------------
// Genetic algorithm

namespace {

struct Individual {
    Point x;
    double fitness;
};

std::vector<double> evaluate(const BatchObjective& f, const std::vector<Point>& xs, long& evaluations) {
    auto out = f(xs);
    if (out.size() != xs.size()) throw std::runtime_error("objective returned wrong number of values");
    for (double& v : out) v = sanitize(v);
    evaluations += static_cast<long>(xs.size());
    return out;
}

}  // namespace

OptimizationResult ga_optimize(const BatchObjective& f, const Bounds& bounds, const GaOptions& opt,
                               std::uint64_t seed) {
    bounds.check();
    if (opt.population < 4) throw std::invalid_argument("ga_optimize: population must be >= 4");
    if (opt.generations < 0 || opt.elites < 0 || opt.elites >= opt.population)
        throw std::invalid_argument("ga_optimize: invalid generations/elites");
    if (!(opt.mutation_decay >= 0)) throw std::invalid_argument("ga_optimize: mutation_decay must be >= 0");
    const std::size_t dim = bounds.dimension();
    const auto pop_size = static_cast<std::size_t>(opt.population);
    const double mutation_rate = opt.mutation_rate < 0 ? 1.0 / static_cast<double>(dim) : opt.mutation_rate;
    RandomStream rng(seed, Stream::Optimizer);

    OptimizationResult res;
    res.seed = seed;

    std::vector<Point> xs(pop_size);
    for (auto& x : xs) {
        x.resize(dim);
        for (std::size_t j = 0; j < dim; ++j) x[j] = bounds.lower[j] + rng.uniform() * bounds.width(j);
        x = make_feasible(bounds, std::move(x));
    }
    auto fx = evaluate(f, xs, res.evaluations);
    std::vector<Individual> pop(pop_size);
    for (std::size_t i = 0; i < pop_size; ++i) pop[i] = {std::move(xs[i]), fx[i]};

    auto track_best = [&] {
        for (const auto& ind : pop)
            if (res.best.empty() || ind.fitness < res.best_fitness) {
                res.best = ind.x;
                res.best_fitness = ind.fitness;
            }
        res.trace.push_back(res.best_fitness);
    };
    track_best();

    auto tournament = [&]() -> const Individual& {
        const auto a = static_cast<std::size_t>(rng.uniform() * static_cast<double>(pop_size));
        const auto b = static_cast<std::size_t>(rng.uniform() * static_cast<double>(pop_size));
        const auto& ia = pop[std::min(a, pop_size - 1)];
        const auto& ib = pop[std::min(b, pop_size - 1)];
        return ib.fitness < ia.fitness ? ib : ia;
    };

    for (int g = 0; g < opt.generations; ++g) {
        const double sigma =
            opt.mutation_scale * std::pow(1.0 - static_cast<double>(g) / opt.generations, opt.mutation_decay);
        std::stable_sort(pop.begin(), pop.end(),
                         [](const Individual& a, const Individual& b) { return a.fitness < b.fitness; });
        std::vector<Individual> next(pop.begin(), pop.begin() + opt.elites);
        std::vector<Point> children;
        while (next.size() + children.size() < pop_size) {
            const auto& pa = tournament();
            const auto& pb = tournament();
            Point child = pa.x;
            if (rng.uniform() < opt.crossover_rate) {
                for (std::size_t j = 0; j < dim; ++j) {
                    const double lo = std::min(pa.x[j], pb.x[j]);
                    const double hi = std::max(pa.x[j], pb.x[j]);
                    const double ext = opt.blend_alpha * (hi - lo);
                    child[j] = (lo - ext) + rng.uniform() * (hi - lo + 2 * ext);
                }
            }
            for (std::size_t j = 0; j < dim; ++j)
                if (rng.uniform() < mutation_rate) child[j] += rng.normal() * sigma * bounds.width(j);
            children.push_back(reflect_into(bounds, std::move(child)));
        }
        const auto child_fx = evaluate(f, children, res.evaluations);
        for (std::size_t i = 0; i < children.size(); ++i) next.push_back({std::move(children[i]), child_fx[i]});
        pop = std::move(next);
        track_best();
    }
    return res;
}

// ---------------------------------------------------------------------------
// Nelder-Mead with threshold accepting

std::vector<double> threshold_sequence(const BatchObjective& f, const Bounds& bounds, const NmtaOptions& opt,
                                       std::uint64_t seed) {
    bounds.check();
    if (opt.threshold_count < 1 || opt.threshold_samples < 1)
        throw std::invalid_argument("threshold_sequence: need >= 1 threshold and sample");
    RandomStream rng(seed, Stream::Threshold);
    const std::size_t dim = bounds.dimension();
    std::vector<Point> pts;
    for (int s = 0; s < opt.threshold_samples; ++s) {
        Point x(dim), y(dim);
        for (std::size_t j = 0; j < dim; ++j) x[j] = bounds.lower[j] + rng.uniform() * bounds.width(j);
        for (std::size_t j = 0; j < dim; ++j) y[j] = x[j] + rng.normal() * opt.shift_scale * bounds.width(j);
        pts.push_back(make_feasible(bounds, std::move(x)));
        pts.push_back(make_feasible(bounds, std::move(y)));
    }
    long evals = 0;
    const auto fx = evaluate(f, pts, evals);
    std::vector<double> diffs;
    for (std::size_t s = 0; s + 1 < fx.size(); s += 2) {
        const double d = std::abs(fx[s] - fx[s + 1]);
        if (std::isfinite(d)) diffs.push_back(d);
    }
    const auto J = static_cast<std::size_t>(opt.threshold_count);
    std::vector<double> out(J, 0.0);
    if (diffs.empty()) return out;
    for (std::size_t j = 0; j < J; ++j) {
        const double level = J == 1 ? 0.0 : 0.8 * static_cast<double>(J - 1 - j) / static_cast<double>(J - 1);
        out[j] = quantile(diffs, level);
    }
    return out;
}

NmtaResult nmta_optimize(const BatchObjective& f, const Bounds& bounds, const NmtaOptions& opt, std::uint64_t seed) {
    bounds.check();
    if (opt.restarts < 1 || opt.iterations_per_restart < 1 || opt.threshold_every < 1)
        throw std::invalid_argument("nmta_optimize: restarts, iterations and K must be >= 1");
    const std::size_t dim = bounds.dimension();
    NmtaResult res;
    res.seed = seed;
    res.thresholds = opt.thresholds.empty() ? threshold_sequence(f, bounds, opt, seed) : opt.thresholds;
    for (std::size_t j = 0; j < res.thresholds.size(); ++j) {
        if (!(res.thresholds[j] >= 0)) throw std::invalid_argument("nmta_optimize: thresholds must be >= 0");
        if (j > 0 && res.thresholds[j] > res.thresholds[j - 1])
            throw std::invalid_argument("nmta_optimize: thresholds must be non-increasing");
    }
    if (res.thresholds.empty()) res.thresholds.assign(1, 0.0);

    RandomStream rng(seed, Stream::Optimizer);
    const ObjectiveFn single = [&](std::span<const double> x) {
        return evaluate(f, {make_feasible(bounds, Point(x.begin(), x.end()))}, res.evaluations).front();
    };

    Point start(dim);
    for (std::size_t j = 0; j < dim; ++j) start[j] = bounds.lower[j] + rng.uniform() * bounds.width(j);
    start = make_feasible(bounds, std::move(start));
    std::vector<double> steps(dim);
    for (std::size_t j = 0; j < dim; ++j) steps[j] = opt.simplex_scale * bounds.width(j);

    Point best_x;
    double best_f = std::numeric_limits<double>::infinity();
    const int steps_per_restart = opt.iterations_per_restart / opt.threshold_every;
    const long total_steps = std::max<long>(1, static_cast<long>(opt.restarts) * steps_per_restart);
    const auto J = static_cast<long>(res.thresholds.size());
    long ta_step = 0;
    int global_iter = 0;
    const NelderMeadOptions stop;

    for (int r = 0; r < opt.restarts; ++r) {
        int unused = 0;
        auto simplex = Simplex::around(r == 0 ? start : best_x, steps, single, unused);
        for (int it = 1; it <= opt.iterations_per_restart; ++it) {
            simplex.iterate(single);
            ++global_iter;
            if (it % opt.threshold_every == 0) {
                const double tau = res.thresholds[static_cast<std::size_t>(std::min(J - 1, ta_step * J / total_steps))];
                ++ta_step;
                if (tau > 0) {
                    Point shift(dim);
                    for (std::size_t j = 0; j < dim; ++j) shift[j] = rng.normal() * opt.shift_scale * bounds.width(j);
                    std::vector<Point> moved = simplex.vertices();
                    for (auto& v : moved)
                        for (std::size_t j = 0; j < dim; ++j) v[j] += shift[j];
                    std::vector<Point> feasible;
                    for (const auto& v : moved) feasible.push_back(make_feasible(bounds, v));
                    auto values = evaluate(f, feasible, res.evaluations);
                    const double moved_best = *std::min_element(values.begin(), values.end());
                    const double delta = moved_best - simplex.best_value();
                    const bool accept = delta <= tau;
                    res.events.push_back({global_iter, tau, delta, accept});
                    if (accept) simplex = Simplex(std::move(moved), std::move(values));
                }
            }
            if (simplex.best_value() < best_f) {
                best_f = simplex.best_value();
                best_x = simplex.best();
            }
            res.trace.push_back(best_f);
            res.simplex_best.push_back(simplex.best_value());
            if (simplex.converged(stop)) break;
        }
    }
    res.best = make_feasible(bounds, best_x);
    res.best_fitness = best_f;
    return res;
}

NmtaResult nm_optimize(const BatchObjective& f, const Bounds& bounds, NmtaOptions opt, std::uint64_t seed) {
    opt.thresholds.assign(static_cast<std::size_t>(std::max(1, opt.threshold_count)), 0.0);
    return nmta_optimize(f, bounds, opt, seed);
}

}  // namespace fjcal
