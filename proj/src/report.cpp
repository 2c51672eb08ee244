#include "fjcal/report.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <cstdio>
#include <stdexcept>

#include "fjcal/rng.hpp"

namespace fjcal {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> absolute(std::span<const double> r) {
    std::vector<double> a(r.size());
    std::transform(r.begin(), r.end(), a.begin(), [](double x) { return std::abs(x); });
    return a;
}

void require_paths(const std::vector<SimulationOutput>& paths) {
    if (paths.empty()) throw std::invalid_argument("report needs at least one simulated path");
}

}  // namespace

SimulationSet simulate_many(const ModelParameters& params, Variant variant, int runs, int days, double p0,
                            std::uint64_t seed, Execution exec) {
    if (runs < 1) throw std::invalid_argument("number of simulations must be >= 1");
    const auto n = static_cast<std::size_t>(runs);
    std::vector<std::optional<SimulationOutput>> out(n);
    for_each_index(n, exec, [&](std::size_t m) {
        try {
            out[m] = simulate(params, variant, days, p0, derive_seed(seed, Stream::Replicate, m));
        } catch (const SimulationBlowUp&) {
        }
    });
    SimulationSet set;
    for (std::size_t m = 0; m < n; ++m) {
        if (out[m]) {
            set.paths.push_back(std::move(*out[m]));
            set.seeds.push_back(derive_seed(seed, Stream::Replicate, m));
        } else {
            ++set.failed;
        }
    }
    if (set.paths.empty()) throw std::runtime_error("all simulations blew up");
    return set;
}

std::vector<Band> price_bands(const std::vector<SimulationOutput>& paths) {
    require_paths(paths);
    const std::size_t len = paths.front().log_prices.size();
    std::vector<Band> bands(len);
    std::vector<double> col(paths.size());
    for (std::size_t t = 0; t < len; ++t) {
        for (std::size_t m = 0; m < paths.size(); ++m) col[m] = paths[m].log_prices.at(t);
        bands[t] = {quantile(col, 0.025), quantile(col, 0.5), quantile(col, 0.975)};
    }
    return bands;
}

double acf_band(std::size_t n) noexcept { return 2.0 / std::sqrt(static_cast<double>(n)); }

std::vector<QqPoint> normal_qq(std::span<const double> r) {
    if (r.size() < 2) throw std::invalid_argument("QQ data needs at least two returns");
    const double n = static_cast<double>(r.size());
    double mean = 0, ss = 0;
    for (double x : r) mean += x / n;
    for (double x : r) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (n - 1));
    if (std::adjacent_find(r.begin(), r.end(), std::not_equal_to<>()) == r.end() || !(sd > 0)) throw std::invalid_argument("QQ data needs non-constant returns");
    std::vector<double> z(r.begin(), r.end());
    std::sort(z.begin(), z.end());
    std::vector<QqPoint> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        out[i] = {normal_quantile((static_cast<double>(i) + 0.5) / n), (z[i] - mean) / sd};
    return out;
}

std::vector<MomentRow> moments_table(const std::vector<MomentVector>& simulated, const MomentVector& empirical) {
    if (simulated.empty()) throw std::invalid_argument("moments table needs at least one simulation");
    std::vector<MomentRow> rows;
    std::vector<double> col(simulated.size());
    for (std::size_t j = 0; j < kMomentCount; ++j) {
        double sum = 0;
        for (std::size_t m = 0; m < simulated.size(); ++m) {
            col[m] = simulated[m][j];
            sum += col[m];
        }
        rows.push_back({std::string(kMomentNames[j]), empirical[j], sum / static_cast<double>(col.size()),
                        quantile(col, 0.025), quantile(col, 0.975)});
    }
    return rows;
}

StylizedFacts stylized_facts(std::span<const double> r, int abs_lags, int raw_lags) {
    StylizedFacts f;
    f.band = acf_band(r.size());
    const auto a = acf(absolute(r), abs_lags);
    double sum = 0;
    for (double x : a) sum += x;
    f.mean_abs_acf = sum / abs_lags;
    const auto raw = acf(r, raw_lags);
    int inside = 0;
    for (double x : raw)
        if (std::abs(x) < f.band) ++inside;
    f.raw_within_band = static_cast<double>(inside) / raw_lags;
    f.excess_kurtosis = sample_moments(r).excess_kurtosis;
    return f;
}

std::string format_price_bands_csv(const std::vector<Band>& bands, std::span<const double> empirical_log_prices,
                                   const std::string& metadata) {
    std::string s = metadata + "day,lower,median,upper,empirical\n";
    for (std::size_t t = 0; t < bands.size(); ++t) {
        s += std::to_string(t) + "," + fmt(bands[t].lower) + "," + fmt(bands[t].median) + "," + fmt(bands[t].upper) +
             ",";
        if (t < empirical_log_prices.size()) s += fmt(empirical_log_prices[t]);
        s += "\n";
    }
    return s;
}

std::string format_return_paths_csv(const std::vector<SimulationOutput>& paths,
                                    std::span<const double> empirical_returns, int max_paths,
                                    const std::string& metadata) {
    require_paths(paths);
    const std::size_t k = std::min(paths.size(), static_cast<std::size_t>(std::max(0, max_paths)));
    std::string s = metadata + "day,empirical";
    for (std::size_t m = 0; m < k; ++m) s += ",sim_" + std::to_string(m + 1);
    s += "\n";
    const std::size_t len = std::max(paths.front().log_returns.size(), empirical_returns.size());
    for (std::size_t t = 0; t < len; ++t) {
        s += std::to_string(t + 1) + ",";
        if (t < empirical_returns.size()) s += fmt(empirical_returns[t]);
        for (std::size_t m = 0; m < k; ++m) {
            s += ",";
            if (t < paths[m].log_returns.size()) s += fmt(paths[m].log_returns[t]);
        }
        s += "\n";
    }
    return s;
}

std::string format_acf_csv(const std::vector<SimulationOutput>& paths, std::span<const double> empirical_returns,
                           int max_lag, const std::string& metadata) {
    require_paths(paths);
    const auto emp_r = acf(empirical_returns, max_lag);
    const auto emp_a = acf(absolute(empirical_returns), max_lag);
    const auto lags = static_cast<std::size_t>(max_lag);
    std::vector<double> sim_r(lags, 0.0), sim_a(lags, 0.0);
    for (const auto& p : paths) {
        const auto r = acf(p.log_returns, max_lag);
        const auto a = acf(absolute(p.log_returns), max_lag);
        for (std::size_t k = 0; k < lags; ++k) {
            sim_r[k] += r[k] / static_cast<double>(paths.size());
            sim_a[k] += a[k] / static_cast<double>(paths.size());
        }
    }
    const double band = acf_band(empirical_returns.size());
    const double sim_band = acf_band(paths.front().log_returns.size());
    std::string s = metadata + "lag,empirical_r,empirical_abs_r,simulated_r,simulated_abs_r,band,simulated_band\n";
    for (std::size_t k = 0; k < lags; ++k)
        s += std::to_string(k + 1) + "," + fmt(emp_r[k]) + "," + fmt(emp_a[k]) + "," + fmt(sim_r[k]) + "," +
             fmt(sim_a[k]) + "," + fmt(band) + "," + fmt(sim_band) + "\n";
    return s;
}

std::string format_qq_csv(const std::vector<SimulationOutput>& paths, std::span<const double> empirical_returns,
                          const std::string& metadata) {
    require_paths(paths);
    std::string s = metadata + "series,theoretical,sample\n";
    for (const auto& q : normal_qq(empirical_returns))
        s += "empirical," + fmt(q.theoretical) + "," + fmt(q.sample) + "\n";
    for (const auto& q : normal_qq(paths.front().log_returns))
        s += "simulated," + fmt(q.theoretical) + "," + fmt(q.sample) + "\n";
    return s;
}

std::string format_strategy_csv(const std::vector<SimulationOutput>& paths, const std::string& metadata) {
    require_paths(paths);
    const std::size_t len = paths.front().log_returns.size();
    const double m = static_cast<double>(paths.size());
    std::string s = metadata +
                    "day,n_chartists,n_fundamentalists,profit_chartists,profit_fundamentalists,"
                    "mean_n_chartists,mean_profit_chartists,mean_profit_fundamentalists\n";
    const auto& first = paths.front();
    for (std::size_t t = 0; t < len; ++t) {
        double nc = 0, pc = 0, pf = 0;
        for (const auto& p : paths) {
            nc += p.n_chartists[t] / m;
            pc += p.profit_chartists[t] / m;
            pf += p.profit_fundamentalists[t] / m;
        }
        s += std::to_string(t + 1) + "," + std::to_string(first.n_chartists[t]) + "," +
             std::to_string(first.n_fundamentalists[t]) + "," + fmt(first.profit_chartists[t]) + "," +
             fmt(first.profit_fundamentalists[t]) + "," + fmt(nc) + "," + fmt(pc) + "," + fmt(pf) + "\n";
    }
    return s;
}

std::string format_moments_csv(const std::vector<MomentRow>& rows, const std::string& metadata) {
    std::string s = metadata + "moment,empirical,simulated_mean,ci_lower,ci_upper\n";
    for (const auto& r : rows)
        s += r.name + "," + fmt(r.empirical) + "," + fmt(r.simulated_mean) + "," + fmt(r.ci_lower) + "," +
             fmt(r.ci_upper) + "\n";
    return s;
}

}  // namespace fjcal
