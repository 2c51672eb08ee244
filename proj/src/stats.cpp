#include "fjcal/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include "fjcal/optim.hpp"

namespace fjcal {

namespace {

bool is_constant(std::span<const double> x) {
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return *lo == *hi;
}

double mean_of(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y) {
    const double mx = mean_of(x);
    const double my = mean_of(y);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

/// Anis-Lloyd-Peters expected R/S of white noise in a window of w points.
double expected_rescaled_range(int w) {
    const double n = w;
    double sum = 0;
    for (int i = 1; i < w; ++i) sum += std::sqrt((n - i) / i);
    const double ratio = std::exp(std::lgamma((n - 1) / 2) - std::lgamma(n / 2)) / std::sqrt(std::numbers::pi);
    return (n - 0.5) / n * ratio * sum;
}

}  // namespace

SampleMoments sample_moments(std::span<const double> r) {
    if (r.size() < 4) throw StatisticError("sample_moments", "series too short (need >= 4)");
    if (is_constant(r)) throw StatisticError("excess_kurtosis", "zero variance");
    const double n = static_cast<double>(r.size());
    const double m = mean_of(r);
    double s2 = 0, s4 = 0;
    for (double v : r) {
        const double d2 = (v - m) * (v - m);
        s2 += d2;
        s4 += d2 * d2;
    }
    const double m2 = s2 / n;
    const double m4 = s4 / n;
    return {m, std::sqrt(s2 / (n - 1)), m4 / (m2 * m2) - 3.0};
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw StatisticError("ks_stat", "empty sample");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    return d;
}

HurstEstimate hurst_exponent(std::span<const double> r) {
    const std::size_t n = r.size();
    if (n < 128) throw StatisticError("hurst", "series too short (need >= 128)");
    std::vector<double> log_w, log_rs;
    std::vector<double> dev;
    for (std::size_t w = 16; w <= n / 4; w *= 2) {
        double total = 0;
        int used = 0;
        dev.resize(w);
        for (std::size_t c = 0; c + w <= n; c += w) {
            const auto chunk = r.subspan(c, w);
            const double m = mean_of(chunk);
            double cum = 0, lo = 0, hi = 0, ss = 0;
            for (double v : chunk) {
                cum += v - m;
                lo = std::min(lo, cum);
                hi = std::max(hi, cum);
                ss += (v - m) * (v - m);
            }
            const double s = std::sqrt(ss / static_cast<double>(w));
            if (s > 0 && hi - lo > 0) {
                total += (hi - lo) / s;
                ++used;
            }
        }
        if (used == 0) continue;
        log_w.push_back(std::log(static_cast<double>(w)));
        log_rs.push_back(std::log(total / used) - std::log(expected_rescaled_range(static_cast<int>(w))));
    }
    if (log_w.size() < 2) return {1.0, true};
    return {0.5 + ols_slope(log_w, log_rs), false};
}

double gph_estimator(std::span<const double> r) {
    const std::size_t n = r.size();
    if (n < 256) throw StatisticError("gph", "series too short (need >= 256)");
    std::vector<double> x(n);
    std::transform(r.begin(), r.end(), x.begin(), [](double v) { return std::abs(v); });
    if (is_constant(x)) throw StatisticError("gph", "degenerate periodogram");
    const double m = mean_of(x);
    for (double& v : x) v -= m;

    const auto bandwidth = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
    std::vector<double> reg(bandwidth), log_i(bandwidth);
    const double nd = static_cast<double>(n);
    // cos/sin of 2 pi k / n; the Fourier term at (j, t) uses index (j t) mod n
    std::vector<double> cos_table(n), sin_table(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double ang = 2.0 * std::numbers::pi * static_cast<double>(k) / nd;
        cos_table[k] = std::cos(ang);
        sin_table[k] = std::sin(ang);
    }
    for (std::size_t j = 1; j <= bandwidth; ++j) {
        const double freq = 2.0 * std::numbers::pi * static_cast<double>(j) / nd;
        double re = 0, im = 0;
        std::size_t idx = 0;
        for (std::size_t t = 0; t < n; ++t) {
            re += x[t] * cos_table[idx];
            im -= x[t] * sin_table[idx];
            idx += j;
            if (idx >= n) idx -= n;
        }
        const double periodogram = (re * re + im * im) / (2.0 * std::numbers::pi * nd);
        if (!(periodogram > 0)) throw StatisticError("gph", "degenerate periodogram");
        const double s = std::sin(freq / 2.0);
        reg[j - 1] = std::log(4.0 * s * s);
        log_i[j - 1] = std::log(periodogram);
    }
    return -ols_slope(reg, log_i);
}

double adf_statistic(std::span<const double> y) {
    const std::size_t n = y.size();
    if (n < 32) throw StatisticError("adf", "series too short (need >= 32)");
    const auto p = static_cast<std::size_t>(std::floor(std::cbrt(static_cast<double>(n - 1))));
    const std::size_t rows = n - p - 1;
    const std::size_t k = p + 2;
    Eigen::MatrixXd X(rows, k);
    Eigen::VectorXd dy(rows);
    for (std::size_t row = 0; row < rows; ++row) {
        const std::size_t t = row + p + 1;
        dy(row) = y[t] - y[t - 1];
        X(row, 0) = 1.0;
        X(row, 1) = y[t - 1];
        for (std::size_t j = 1; j <= p; ++j) X(row, 1 + j) = y[t - j] - y[t - j - 1];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < static_cast<Eigen::Index>(k)) throw StatisticError("adf", "singular regression");
    const Eigen::VectorXd beta = qr.solve(dy);
    const Eigen::VectorXd resid = dy - X * beta;
    const double sigma2 = resid.squaredNorm() / static_cast<double>(rows - k);

    const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k),
                                                                         static_cast<Eigen::Index>(k)));
    const Eigen::MatrixXd cov_perm = r_inv * r_inv.transpose();
    const Eigen::MatrixXd cov = qr.colsPermutation() * cov_perm * qr.colsPermutation().transpose();
    const double se = std::sqrt(sigma2 * cov(1, 1));
    if (!(se > 0) || !std::isfinite(se)) throw StatisticError("adf", "singular regression (perfect fit)");
    return beta(1) / se;
}

namespace {

constexpr double kLrCritical = 5.991464547107979;  // chi-square(2) 95% quantile

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

struct GarchParams {
    double mu, omega, alpha, beta;
};

GarchParams decode(std::span<const double> z, double mean, double sd, double var) {
    const double s = logistic(z[2]);
    const double q = logistic(z[3]);
    return {mean + sd * z[0], var * std::exp(z[1]), s * q, s * (1.0 - q)};
}

double garch_nll(std::span<const double> r, const GarchParams& g, double var0) {
    double h = var0;
    double nll = 0;
    double e_prev = 0;
    for (std::size_t t = 0; t < r.size(); ++t) {
        if (t > 0) h = g.omega + g.alpha * e_prev * e_prev + g.beta * h;
        const double e = r[t] - g.mu;
        nll += std::log(h) + e * e / h;
        e_prev = e;
    }
    return 0.5 * nll;
}

}  // namespace

GarchFit fit_garch11(std::span<const double> r) {
    if (r.size() < 256) throw StatisticError("garch_persistence", "series too short (need >= 256)");
    if (is_constant(r)) throw StatisticError("garch_persistence", "zero variance");
    const double n = static_cast<double>(r.size());
    const double mean = mean_of(r);
    double ss = 0;
    for (double v : r) ss += (v - mean) * (v - mean);
    const double var = ss / n;
    const double sd = std::sqrt(var);

    const ObjectiveFn nll = [&](std::span<const double> z) {
        const double f = garch_nll(r, decode(z, mean, sd, var), var);
        return std::isfinite(f) ? f : 1e300;
    };
    // (persistence, alpha share) starting points
    constexpr std::array<std::array<double, 2>, 3> starts = {{{0.90, 0.10}, {0.50, 0.30}, {0.98, 0.05}}};
    const std::array<double, 4> steps = {0.05, 0.5, 0.5, 0.5};
    NelderMeadOptions opt;
    opt.max_iterations = 1500;
    opt.f_tolerance = 1e-12;
    opt.x_tolerance = 1e-7;

    NelderMeadResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (const auto& [s, q] : starts) {
        const Point z0 = {0.0, std::log(1.0 - s), logit(s), logit(q)};
        auto res = nelder_mead(nll, z0, steps, opt);
        if (res.value < best.value) best = std::move(res);
    }
    if (!(best.value < 1e299)) throw StatisticError("garch_persistence", "optimizer did not converge");

    const auto g = decode(best.x, mean, sd, var);
    GarchFit fit;
    fit.mu = g.mu;
    fit.omega = g.omega;
    fit.alpha = g.alpha;
    fit.beta = g.beta;
    fit.nll = best.value;
    fit.nll_constant = 0.5 * n * (std::log(var) + 1.0);
    fit.arch_effect = 2.0 * (fit.nll_constant - fit.nll) > kLrCritical;
    return fit;
}

double garch_persistence(std::span<const double> r) { return fit_garch11(r).persistence(); }

double hill_tail_average(std::span<const double> r) {
    if (r.size() < 100) throw StatisticError("hill_avg", "series too short (need >= 100)");
    std::vector<double> pos;
    for (double v : r)
        if (v > 0) pos.push_back(v);
    if (pos.empty()) throw StatisticError("hill_avg", "empty right tail");
    std::sort(pos.begin(), pos.end());
    const double m = static_cast<double>(pos.size());
    // 1-based ranks of the threshold order statistic
    const auto lo = static_cast<std::size_t>(std::max(1.0, std::round(0.90 * m)));
    const auto hi = static_cast<std::size_t>(std::round(0.95 * m));
    if (hi < lo + 2) throw StatisticError("hill_avg", "fewer than 3 order statistics in the 90-95% band");

    // suffix sums of log x_(j) so each threshold costs O(1)
    std::vector<double> suffix(pos.size() + 1, 0.0);
    for (std::size_t j = pos.size(); j-- > 0;) suffix[j] = suffix[j + 1] + std::log(pos[j]);

    double total = 0;
    int used = 0;
    for (std::size_t k = lo; k <= hi && k < pos.size(); ++k) {
        const double exceed = m - static_cast<double>(k);
        const double mean_log = suffix[k] / exceed - std::log(pos[k - 1]);
        if (mean_log > 0) {
            total += 1.0 / mean_log;
            ++used;
        }
    }
    if (used < 3) throw StatisticError("hill_avg", "fewer than 3 usable order statistics in the band");
    return total / used;
}

MomentVector moment_vector(std::span<const double> r_sim, std::span<const double> r_emp) {
    MomentVector mv;
    auto guarded = [](std::string_view name, auto&& fn) -> double {
        try {
            const double v = fn();
            if (!std::isfinite(v)) throw StatisticError(std::string(name), "non-finite value");
            return v;
        } catch (const StatisticError& e) {
            if (e.component() == name) throw;
            throw StatisticError(std::string(name), e.what());
        } catch (const std::exception& e) {
            throw StatisticError(std::string(name), e.what());
        }
    };
    SampleMoments sm{};
    guarded("excess_kurtosis", [&] {
        sm = sample_moments(r_sim);
        return sm.excess_kurtosis;
    });
    mv[0] = sm.mean;
    mv[1] = sm.stdev;
    mv[2] = sm.excess_kurtosis;
    mv[3] = guarded("ks_stat", [&] { return ks_statistic(r_sim, r_emp); });
    mv[4] = guarded("hurst", [&] { return hurst_exponent(r_sim).exponent; });
    mv[5] = guarded("gph", [&] { return gph_estimator(r_sim); });
    mv[6] = guarded("adf", [&] { return adf_statistic(r_sim); });
    mv[7] = guarded("garch_persistence", [&] { return garch_persistence(r_sim); });
    mv[8] = guarded("hill_avg", [&] { return hill_tail_average(r_sim); });
    return mv;
}

std::vector<double> acf(std::span<const double> x, int max_lag) {
    if (max_lag < 1 || static_cast<std::size_t>(max_lag) >= x.size())
        throw StatisticError("acf", "max_lag must be in [1, n)");
    if (is_constant(x)) throw StatisticError("acf", "zero variance");
    const double m = mean_of(x);
    double c0 = 0;
    for (double v : x) c0 += (v - m) * (v - m);
    std::vector<double> out(static_cast<std::size_t>(max_lag));
    for (int k = 1; k <= max_lag; ++k) {
        double ck = 0;
        for (std::size_t t = 0; t + static_cast<std::size_t>(k) < x.size(); ++t)
            ck += (x[t] - m) * (x[t + static_cast<std::size_t>(k)] - m);
        out[static_cast<std::size_t>(k - 1)] = ck / c0;
    }
    return out;
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("quantile of empty set");
    if (!(p >= 0 && p <= 1)) throw std::invalid_argument("quantile level outside [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double normal_quantile(double p) {
    static const boost::math::normal_distribution<double> standard;
    return boost::math::quantile(standard, p);
}

}  // namespace fjcal
