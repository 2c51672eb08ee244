#include <cmath>

#include <gtest/gtest.h>

#include "fjcal/report.hpp"
#include "oracles.hpp"

using namespace fjcal;

namespace {

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Report, SinglePathBandsCollapse) {
    ModelParameters p;
    p.n_traders = 20;
    const auto set = simulate_many(p, Variant::Adaptive, 1, 100, 4.0, 3);
    ASSERT_EQ(set.paths.size(), 1u);
    const auto bands = price_bands(set.paths);
    ASSERT_EQ(bands.size(), 101u);
    for (std::size_t t = 0; t < bands.size(); ++t) {
        EXPECT_EQ(bands[t].lower, set.paths[0].log_prices[t]);
        EXPECT_EQ(bands[t].median, set.paths[0].log_prices[t]);
        EXPECT_EQ(bands[t].upper, set.paths[0].log_prices[t]);
    }
}

TEST(Report, BandsAreOrderedPercentiles) {
    ModelParameters p;
    p.n_traders = 20;
    const auto set = simulate_many(p, Variant::Standard, 9, 50, 0.0, 4);
    EXPECT_EQ(set.paths.size() + static_cast<std::size_t>(set.failed), 9u);
    const auto bands = price_bands(set.paths);
    std::vector<double> col;
    for (const auto& path : set.paths) col.push_back(path.log_prices[30]);
    EXPECT_EQ(bands[30].lower, oracle::percentile7(col, 0.025));
    EXPECT_EQ(bands[30].upper, oracle::percentile7(col, 0.975));
    for (const auto& b : bands) {
        EXPECT_LE(b.lower, b.median);
        EXPECT_LE(b.median, b.upper);
    }
    EXPECT_EQ(simulate_many(p, Variant::Standard, 9, 50, 0.0, 4).paths, set.paths);
}

TEST(Report, ConstantMomentVectorsGiveZeroWidthIntervals) {
    MomentVector m;
    for (std::size_t j = 0; j < kMomentCount; ++j) m[j] = 0.1 * static_cast<double>(j) - 0.3;
    const std::vector<MomentVector> sims(100, m);
    const auto rows = moments_table(sims, m);
    ASSERT_EQ(rows.size(), kMomentCount);
    for (std::size_t j = 0; j < kMomentCount; ++j) {
        EXPECT_EQ(rows[j].name, kMomentNames[j]);
        EXPECT_EQ(rows[j].ci_lower, m[j]);
        EXPECT_EQ(rows[j].ci_upper, m[j]);
        EXPECT_NEAR(rows[j].simulated_mean, m[j], 1e-15);
    }
    const auto csv = format_moments_csv(rows, "# seed: 1\n");
    EXPECT_EQ(csv.rfind("# seed: 1\nmoment,empirical,simulated_mean,ci_lower,ci_upper\nmean,", 0), 0u);
    EXPECT_EQ(lines(csv), 11u);
}

TEST(Report, AcfOutputLengthEqualsMaxLag) {
    ModelParameters p;
    p.n_traders = 20;
    const auto set = simulate_many(p, Variant::Adaptive, 3, 200, 0.0, 5);
    const auto r = oracle::normal_sample(200, 1, 0, 0.01);
    const auto csv = format_acf_csv(set.paths, r, 17);
    EXPECT_EQ(csv.rfind("lag,empirical_r,empirical_abs_r,simulated_r,simulated_abs_r,band,simulated_band\n1,", 0), 0u);
    EXPECT_EQ(lines(csv), 18u);
}

TEST(Report, NormalQq) {
    const auto x = oracle::normal_sample(2001, 3, 5.0, 2.0);
    const auto qq = normal_qq(x);
    ASSERT_EQ(qq.size(), x.size());
    EXPECT_NEAR(qq[1000].theoretical, 0.0, 1e-12);
    for (std::size_t i = 1; i < qq.size(); ++i) {
        EXPECT_LT(qq[i - 1].theoretical, qq[i].theoretical);
        EXPECT_LE(qq[i - 1].sample, qq[i].sample);
    }
    EXPECT_NEAR(qq[1000].sample, 0.0, 0.1);
    EXPECT_THROW((void)normal_qq(std::vector<double>(10, 1.0)), std::invalid_argument);
}

TEST(Report, StylizedFactsOnWhiteNoise) {
    const auto x = oracle::normal_sample(2500, 9);
    const auto f = stylized_facts(x);
    EXPECT_NEAR(f.band, 0.04, 1e-15);
    EXPECT_LT(std::abs(f.mean_abs_acf), f.band);
    EXPECT_GE(f.raw_within_band, 0.8);
    EXPECT_NEAR(f.excess_kurtosis, 0.0, 0.3);

    const auto g = stylized_facts(oracle::synthetic_market_returns(2500, 9));
    EXPECT_GT(g.mean_abs_acf, g.band);
    EXPECT_GT(g.excess_kurtosis, 0.0);
}

TEST(Report, CsvWritersShapes) {
    ModelParameters p;
    p.n_traders = 20;
    const auto set = simulate_many(p, Variant::Adaptive, 4, 60, 0.0, 6);
    const auto r = oracle::normal_sample(60, 1, 0, 0.01);
    std::vector<double> lp(61, 0.0);
    for (std::size_t t = 0; t < r.size(); ++t) lp[t + 1] = lp[t] + r[t];

    const auto bands = format_price_bands_csv(price_bands(set.paths), lp);
    EXPECT_EQ(bands.rfind("day,lower,median,upper,empirical\n0,", 0), 0u);
    EXPECT_EQ(lines(bands), 62u);

    const auto paths = format_return_paths_csv(set.paths, r, 2);
    EXPECT_EQ(lines(paths), 61u);

    const auto qq = format_qq_csv(set.paths, r);
    EXPECT_EQ(qq.rfind("series,theoretical,sample\n", 0), 0u);

    const auto strat = format_strategy_csv(set.paths);
    EXPECT_EQ(lines(strat), 61u);
}
