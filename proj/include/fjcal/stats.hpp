#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fjcal {

inline constexpr std::size_t kMomentCount = 9;

/// Canonical order of the calibration statistics. The weight matrix is
/// indexed in this order, so it is part of the file-format contract.
inline constexpr std::array<std::string_view, kMomentCount> kMomentNames = {
    "mean", "stdev", "excess_kurtosis", "ks_stat", "hurst", "gph", "adf", "garch_persistence", "hill_avg"};

struct MomentVector {
    std::array<double, kMomentCount> values{};

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    bool operator==(const MomentVector&) const = default;
};

/// A statistic could not be computed. `component()` names it using kMomentNames
/// (or the operation name for helpers outside the moment vector).
class StatisticError : public std::runtime_error {
public:
    StatisticError(std::string component, const std::string& what)
        : std::runtime_error(component + ": " + what), component_(std::move(component)) {}
    [[nodiscard]] const std::string& component() const noexcept { return component_; }

private:
    std::string component_;
};

struct SampleMoments {
    double mean;
    double stdev;            // n - 1 denominator
    double excess_kurtosis;  // m4 / m2^2 - 3 with population central moments
};

[[nodiscard]] SampleMoments sample_moments(std::span<const double> r);

/// Two-sample Kolmogorov-Smirnov distance between empirical CDFs.
[[nodiscard]] double ks_statistic(std::span<const double> a, std::span<const double> b);

struct HurstEstimate {
    double exponent;
    bool degenerate;  // no window had positive spread; exponent is the 1.0 fallback
};

/// Rescaled-range Hurst exponent on dyadic windows 16, 32, ..., n/4, with the
/// Anis-Lloyd-Peters expected R/S subtracted so that white noise gives 0.5.
[[nodiscard]] HurstEstimate hurst_exponent(std::span<const double> r);

/// Geweke-Porter-Hudak estimate of d for |r| using floor(sqrt(n)) frequencies.
[[nodiscard]] double gph_estimator(std::span<const double> r);

/// ADF t-statistic with intercept, no trend, floor((n-1)^(1/3)) lagged differences.
[[nodiscard]] double adf_statistic(std::span<const double> r);

struct GarchFit {
    double mu = 0;
    double omega = 0;
    double alpha = 0;
    double beta = 0;
    double nll = 0;           // Gaussian negative log-likelihood (constants dropped)
    double nll_constant = 0;  // same for the constant-variance model
    bool arch_effect = false; // likelihood-ratio test rejected constant variance
    [[nodiscard]] double persistence() const noexcept { return arch_effect ? alpha + beta : 0.0; }
};

/// GARCH(1,1) QMLE with constant mean, deterministic three-start Nelder-Mead.
[[nodiscard]] GarchFit fit_garch11(std::span<const double> r);
[[nodiscard]] double garch_persistence(std::span<const double> r);

/// Mean Hill tail index over thresholds at the 90th..95th percentiles of the
/// positive returns (larger means a thinner tail).
[[nodiscard]] double hill_tail_average(std::span<const double> r);

/// All nine statistics of r_sim; the KS entry compares against r_emp.
[[nodiscard]] MomentVector moment_vector(std::span<const double> r_sim, std::span<const double> r_emp);

/// Sample autocorrelations at lags 1..max_lag (n denominator).
[[nodiscard]] std::vector<double> acf(std::span<const double> x, int max_lag);

/// Linear-interpolation quantile (R type 7 / numpy "linear"). p in [0, 1].
[[nodiscard]] double quantile(std::vector<double> values, double p);

/// Standard normal quantile.
[[nodiscard]] double normal_quantile(double p);

}  // namespace fjcal
