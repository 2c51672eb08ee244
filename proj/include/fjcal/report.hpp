#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fjcal/market.hpp"
#include "fjcal/parallel.hpp"
#include "fjcal/stats.hpp"

namespace fjcal {

struct SimulationSet {
    std::vector<SimulationOutput> paths;  // successful runs, in seed order
    std::vector<std::uint64_t> seeds;     // seed of each successful run
    int failed = 0;
};

/// M simulations at fixed parameters; run m uses derive_seed(seed, Replicate, m).
[[nodiscard]] SimulationSet simulate_many(const ModelParameters& params, Variant variant, int runs, int days,
                                          double p0, std::uint64_t seed, Execution exec = Execution::Parallel);

struct Band {
    double lower;
    double median;
    double upper;
};

/// Per-day 2.5/50/97.5 percentiles of the log price across paths.
[[nodiscard]] std::vector<Band> price_bands(const std::vector<SimulationOutput>& paths);

/// White-noise significance band for sample autocorrelations: 2 / sqrt(n).
[[nodiscard]] double acf_band(std::size_t n) noexcept;

struct QqPoint {
    double theoretical;
    double sample;
};

/// Standardized order statistics against normal quantiles at (i - 0.5) / n.
[[nodiscard]] std::vector<QqPoint> normal_qq(std::span<const double> r);

struct MomentRow {
    std::string name;
    double empirical;
    double simulated_mean;
    double ci_lower;  // 2.5% percentile across simulations
    double ci_upper;  // 97.5%
};

[[nodiscard]] std::vector<MomentRow> moments_table(const std::vector<MomentVector>& simulated,
                                                   const MomentVector& empirical);

struct StylizedFacts {
    double mean_abs_acf;        // mean ACF of |r| over lags 1..abs_lags
    double raw_within_band;     // fraction of lags 1..raw_lags with |acf(r)| < band
    double excess_kurtosis;
    double band;
};

[[nodiscard]] StylizedFacts stylized_facts(std::span<const double> r, int abs_lags = 10, int raw_lags = 20);

// CSV writers. Each takes an optional metadata header.

[[nodiscard]] std::string format_price_bands_csv(const std::vector<Band>& bands,
                                                 std::span<const double> empirical_log_prices,
                                                 const std::string& metadata = {});
[[nodiscard]] std::string format_return_paths_csv(const std::vector<SimulationOutput>& paths,
                                                  std::span<const double> empirical_returns, int max_paths,
                                                  const std::string& metadata = {});
[[nodiscard]] std::string format_acf_csv(const std::vector<SimulationOutput>& paths,
                                         std::span<const double> empirical_returns, int max_lag,
                                         const std::string& metadata = {});
[[nodiscard]] std::string format_qq_csv(const std::vector<SimulationOutput>& paths,
                                        std::span<const double> empirical_returns, const std::string& metadata = {});
[[nodiscard]] std::string format_strategy_csv(const std::vector<SimulationOutput>& paths,
                                              const std::string& metadata = {});
[[nodiscard]] std::string format_moments_csv(const std::vector<MomentRow>& rows, const std::string& metadata = {});

}  // namespace fjcal
