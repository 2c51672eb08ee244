#include <cmath>

#include <gtest/gtest.h>

#include "fjcal/market.hpp"

using namespace fjcal;

namespace {

/// Deterministic trader draws: every uniform range collapsed to a point.
ModelParameters pinned(int n, double T, double tau, double a, int lag, double v_offset) {
    ModelParameters p;
    p.n_traders = n;
    p.lambda = 10;
    p.a = a;
    p.d_min = p.d_max = lag;
    p.T_min = p.T_max = T;
    p.tau_min = p.tau_max = tau;
    p.v_min = p.v_max = v_offset;
    p.mu_eta = 0;
    p.sigma_eta = 0;
    p.sigma_zeta = 0;
    return p;
}

ModelParameters quiet(int n) {
    // Entry thresholds far beyond any reachable mispricing.
    ModelParameters p;
    p.n_traders = n;
    p.T_min = 1e6;
    p.T_max = 2e6;
    return p;
}

}  // namespace

TEST(MarketImpact, Examples) {
    EXPECT_EQ(market_impact_update(4.6, 0, 10, 0), 4.6);
    EXPECT_EQ(market_impact_update(0, 10, 10, 0), 1.0);
    EXPECT_NEAR(market_impact_update(1, -5, 10, 0.01), 0.51, 1e-15);
}

TEST(Mispricing, Examples) {
    EXPECT_EQ(chartist_mispricing(4.0, 4.0), 0.0);
    EXPECT_EQ(chartist_mispricing(4.0, 4.5), -0.5);
    EXPECT_EQ(chartist_mispricing(4.5, 4.0), 0.5);
    EXPECT_EQ(fundamentalist_mispricing(4.0, 4.0), 0.0);
    EXPECT_EQ(fundamentalist_mispricing(4.5, 4.0), 0.5);
    EXPECT_EQ(fundamentalist_mispricing(4.0, 4.5), -0.5);
}

TEST(ThresholdTransition, FullStateRegionTable) {
    // Regions for T = 0.5, tau = 0.2: m < -T, -T < m < -tau, |m| < tau, tau < m < T, m > T.
    const double m[5] = {-0.6, -0.3, 0.0, 0.3, 0.6};
    const Position F = Position::Flat, L = Position::Long, S = Position::Short;
    const Position from_flat[5] = {L, F, F, F, S};
    const Position from_long[5] = {L, L, F, F, F};
    const Position from_short[5] = {F, F, F, S, S};
    for (int k = 0; k < 5; ++k) {
        EXPECT_EQ(threshold_transition(F, m[k], 0.5, 0.2), from_flat[k]) << "flat, m=" << m[k];
        EXPECT_EQ(threshold_transition(L, m[k], 0.5, 0.2), from_long[k]) << "long, m=" << m[k];
        EXPECT_EQ(threshold_transition(S, m[k], 0.5, 0.2), from_short[k]) << "short, m=" << m[k];
    }
    EXPECT_EQ(threshold_transition(F, 0.5, 0.5, 0.2), F);  // exact equality does not enter
}

TEST(ValuePerception, StepAndDrift) {
    EXPECT_EQ(value_perception_step(4.0, 0), 4.0);
    EXPECT_EQ(value_perception_step(4.0, 0.01), 4.01);
    double v = 4.0;
    for (int i = 0; i < 100; ++i) v = value_perception_step(v, 0.001);
    EXPECT_NEAR(v, 4.1, 1e-12);
}

TEST(StrategyProfit, Examples) {
    const std::vector<double> flat_prices(6, 4.2);
    EXPECT_EQ(strategy_profit(std::vector<double>{1, -1, 1, 0, 1}, flat_prices, 3, 5), 0.0);

    const std::vector<double> rising{0.0, 0.005, 0.01, 0.015, 0.02};
    EXPECT_NEAR(strategy_profit(std::vector<double>(4, 1.0), rising, 4, 4), 0.02, 1e-15);

    EXPECT_NEAR(strategy_profit(std::vector<double>{1, -1}, std::vector<double>{0, 0.03, 0.04}, 2, 2), 0.02, 1e-15);
    // Window shorter than t keeps only the last H terms.
    EXPECT_NEAR(strategy_profit(std::vector<double>{1, -1}, std::vector<double>{0, 0.03, 0.04}, 1, 2), -0.01, 1e-15);
    EXPECT_THROW((void)strategy_profit(std::vector<double>{1}, std::vector<double>{0, 1}, 1, 0), std::invalid_argument);
}

TEST(SwitchProbability, Examples) {
    auto p = switch_probability(0.3, 0.3, 0.05);
    EXPECT_EQ(p.chartist, 0.5);
    EXPECT_EQ(p.chartist + p.fundamentalist, 1.0);

    p = switch_probability(0.05 * std::log(3.0), 0.0, 0.05);
    EXPECT_NEAR(p.chartist, 0.75, 1e-14);

    p = switch_probability(1000 * 0.01, 0.0, 0.01);
    EXPECT_TRUE(std::isfinite(p.chartist));
    EXPECT_NEAR(p.chartist, 1.0, 1e-15);
    p = switch_probability(0.0, 1000 * 0.01, 0.01);
    EXPECT_GE(p.chartist, 0.0);
    EXPECT_NEAR(p.fundamentalist, 1.0, 1e-15);
    EXPECT_THROW((void)switch_probability(0, 0, 0), std::invalid_argument);
}

TEST(Init, DeterministicAndDegenerateDraws) {
    ModelParameters p;
    p.n_traders = 20;
    EXPECT_EQ(init_simulation(p, Variant::Adaptive, 4.0, 9), init_simulation(p, Variant::Adaptive, 4.0, 9));
    EXPECT_NE(init_simulation(p, Variant::Adaptive, 4.0, 9), init_simulation(p, Variant::Adaptive, 4.0, 10));

    p.T_min = p.T_max = 0.5;
    p.tau_min = p.tau_max = 0.1;
    p.a = 2;
    const auto s = init_simulation(p, Variant::Standard, 4.0, 1);
    for (const auto& t : s.traders) {
        EXPECT_EQ(t.entry_threshold, 0.5);
        EXPECT_DOUBLE_EQ(t.capital, 0.8);
        EXPECT_EQ(t.position, 0.0);
        EXPECT_GE(t.lag, p.d_min);
        EXPECT_LE(t.lag, p.d_max);
        EXPECT_GE(t.value_perception, 4.0 + p.v_min);
        EXPECT_LE(t.value_perception, 4.0 + p.v_max);
    }
    EXPECT_EQ(s.day, 0);
    EXPECT_EQ(s.log_prices.size(), 1u);
    EXPECT_EQ(s.price_at(-40), 4.0);
}

TEST(Init, StandardSplitAndInvalidParameters) {
    ModelParameters p;
    p.n_traders = 7;
    const auto s = init_simulation(p, Variant::Standard, 0, 1);
    int fund = 0;
    for (const auto& t : s.traders) fund += t.active == Strategy::Fundamentalist;
    EXPECT_EQ(fund, 4);
    p.tau_max = p.T_min;
    EXPECT_THROW((void)init_simulation(p, Variant::Standard, 0, 1), ParameterError);
}

TEST(StepStandard, AllFlatMovesByNoiseOnly) {
    auto p = quiet(10);
    auto s = init_simulation(p, Variant::Standard, 4.6, 3);
    DayDraws d = draw_day(s, p);
    d.zeta = 0.0123;
    const auto rec = step_standard(s, p, d);
    EXPECT_EQ(s.log_prices.back(), 4.6 + 0.0123);
    EXPECT_EQ(rec.log_return, 0.0123);
    EXPECT_EQ(rec.net_order, 0.0);
}

TEST(StepStandard, SingleEntryMovesByCapitalOverLambda) {
    // One fundamentalist whose value sits 0.3 above the price: enters long.
    auto p = pinned(1, 0.2, 0.05, 2.0, 1, 0.3);
    auto s = init_simulation(p, Variant::Standard, 1.0, 5);
    DayDraws d = draw_day(s, p);
    d.zeta = 0.001;
    (void)step_standard(s, p, d);
    const double c = 2.0 * (0.2 - 0.05);
    EXPECT_EQ(s.traders[0].position, c);
    EXPECT_EQ(s.log_prices.back(), 1.0 + (c / 10 + 0.001));
}

TEST(Simulate, HandTracedTwoTraderStandardPath) {
    // Trader 0 fundamentalist, trader 1 chartist (lag 1); T = 0.05, tau = 0.01,
    // a = 25 so c = 25 * 0.04; value starts 0.1 above p0 and drifts +0.02 a day.
    auto p = pinned(2, 0.05, 0.01, 25.0, 1, 0.1);
    p.mu_eta = 0.02;
    const double c = 25.0 * (0.05 - 0.01);
    // Day 0: fund m = 0 - 0.1 < -T -> long; chart m = 0 -> flat. Net +c.
    const double p1 = 0.0 + (c / 10 + 0.0);
    // Day 1: v = 0.12, fund m = p1 - 0.12 = -0.02 <= -tau -> stays long;
    //        chart m = p0 - p1 = -0.1 < -T -> long. Net +c.
    const double p2 = p1 + (c / 10 + 0.0);
    // Day 2: v = 0.14, fund m = 0.06 > -tau -> flat (-c);
    //        chart m = p1 - p2 = -0.1 -> stays long. Net -c.
    const double p3 = p2 + (-c / 10 + 0.0);

    const auto out = simulate(p, Variant::Standard, 3, 0.0, 77);
    ASSERT_EQ(out.log_prices.size(), 4u);
    EXPECT_EQ(out.log_prices[0], 0.0);
    EXPECT_EQ(out.log_prices[1], p1);
    EXPECT_EQ(out.log_prices[2], p2);
    EXPECT_EQ(out.log_prices[3], p3);
    EXPECT_EQ(out.log_returns, (std::vector<double>{c / 10, c / 10, -c / 10}));
    EXPECT_EQ(out.n_chartists, (std::vector<int>{1, 1, 1}));
    EXPECT_EQ(out.n_fundamentalists, (std::vector<int>{1, 1, 1}));
    EXPECT_EQ(out.profit_chartists, (std::vector<double>{0, 0, 0}));
}

TEST(StepAdaptive, HandTracedOneTraderWithStubbedDraws) {
    // c = 1, value 0.1 below p0 = 0, H = 1, gamma = 0.01.
    auto p = pinned(1, 0.05, 0.01, 25.0, 1, -0.1);
    p.gamma = 0.01;
    p.horizon = 1;
    auto s = init_simulation(p, Variant::Adaptive, 0.0, 1);
    const double c = 25.0 * (0.05 - 0.01);

    // Day 0: no profit history, phi_c = 0.5; u = 0.3 -> chartist.
    // Fund shadow: m = 0.1 > T -> short. Chart shadow: m = 0 -> flat. Actual 0.
    DayDraws d0{0.02, {0.005}, {0.3}};
    auto r0 = step_adaptive(s, p, d0);
    EXPECT_EQ(r0.n_chartists, 1);
    EXPECT_EQ(r0.net_order, 0.0);
    EXPECT_EQ(s.traders[0].fundamentalist_position, Position::Short);
    EXPECT_EQ(s.traders[0].chartist_position, Position::Flat);
    EXPECT_EQ(s.log_prices[1], 0.02);
    EXPECT_EQ(s.traders[0].value_perception, -0.1 + 0.005);

    // Day 1: pi_c = 0 * 0.02 = 0, pi_f = -c * 0.02; phi_c = 1 / (1 + exp(-2c)) = 0.8808;
    // u = 0.9 -> fundamentalist. Fund m = 0.02 + 0.095 = 0.115 >= tau -> stays short.
    // Actual position 0 -> -c, net -c.
    DayDraws d1{-0.01, {0.0}, {0.9}};
    const double pi_f = -c * 0.02;
    ASSERT_GT(0.9, switch_probability(0.0, pi_f, 0.01).chartist);
    auto r1 = step_adaptive(s, p, d1);
    EXPECT_EQ(r1.n_fundamentalists, 1);
    EXPECT_EQ(r1.profit_chartists, 0.0);
    EXPECT_EQ(r1.profit_fundamentalists, pi_f);
    EXPECT_EQ(r1.net_order, -c);
    EXPECT_EQ(s.log_prices[2], 0.02 + (-c / 10 + -0.01));
    EXPECT_EQ(s.traders[0].position, -c);
}

TEST(Simulate, OneDayNoiseEqualsDraw) {
    auto p = quiet(3);
    p.sigma_zeta = 1.0;
    const auto out = simulate(p, Variant::Standard, 1, 0.0, 42);
    EXPECT_EQ(out.log_returns.at(0), CounterRng(42).normal(Stream::PriceNoise, 0));
}

TEST(Simulate, DeterministicAndSeedSensitive) {
    ModelParameters p;
    EXPECT_EQ(simulate(p, Variant::Adaptive, 300, 0, 7), simulate(p, Variant::Adaptive, 300, 0, 7));
    EXPECT_NE(simulate(p, Variant::Adaptive, 300, 0, 7).log_returns,
              simulate(p, Variant::Adaptive, 300, 0, 8).log_returns);
    EXPECT_THROW((void)simulate(p, Variant::Adaptive, 0, 0, 7), std::invalid_argument);
}

TEST(Simulate, StandardIgnoresSwitchingParameters) {
    ModelParameters p;
    p.a = 0.5;
    const auto base = simulate(p, Variant::Standard, 400, 0, 3);
    p.gamma = 123.0;
    p.horizon = 3;
    EXPECT_EQ(simulate(p, Variant::Standard, 400, 0, 3), base);
}

TEST(Simulate, ReturnsAreFirstDifferences) {
    ModelParameters p;
    p.a = 0.5;
    const auto out = simulate(p, Variant::Adaptive, 500, 3.0, 11);
    ASSERT_EQ(out.log_prices.size(), 501u);
    for (std::size_t t = 0; t < out.log_returns.size(); ++t)
        EXPECT_EQ(out.log_prices[t + 1], out.log_prices[t] + out.log_returns[t]);
}

TEST(Simulate, FairCoinSwitchingWithEqualProfits) {
    auto p = quiet(100);
    p.gamma = 1e9;
    const auto out = simulate(p, Variant::Adaptive, 100, 0, 5);
    double chartists = 0;
    for (int c : out.n_chartists) chartists += c;
    const double freq = chartists / 10000.0;
    EXPECT_NEAR(freq, 0.5, 3 * 0.005);
}

TEST(Simulate, OrdersTelescopeAndPositionsStayInDomain) {
    ModelParameters p;
    p.a = 0.5;
    p.T_min = 0.02;
    p.tau_max = 0.01;
    p.tau_min = -0.02;
    for (auto v : {Variant::Standard, Variant::Adaptive}) {
        auto s = init_simulation(p, v, 0.0, 13);
        double net_sum = 0;
        for (int t = 0; t < 400; ++t) {
            const auto d = draw_day(s, p);
            const auto rec = v == Variant::Standard ? step_standard(s, p, d) : step_adaptive(s, p, d);
            net_sum += rec.net_order;
            for (const auto& tr : s.traders) {
                EXPECT_TRUE(tr.position == 0 || tr.position == tr.capital || tr.position == -tr.capital);
                EXPECT_EQ(tr.capital, p.a * (tr.entry_threshold - tr.exit_threshold));
            }
        }
        double final_sum = 0;
        for (const auto& tr : s.traders) final_sum += tr.position;
        EXPECT_NEAR(net_sum, final_sum, 1e-9);
    }
}

TEST(Simulate, RunningProfitsMatchDirectWindowSum) {
    ModelParameters p;
    p.n_traders = 5;
    p.a = 0.5;
    p.T_min = 0.02;
    p.tau_min = -0.02;
    p.tau_max = 0.01;
    p.horizon = 7;
    auto s = init_simulation(p, Variant::Adaptive, 0.0, 21);
    std::vector<std::vector<double>> chart(5), fund(5);
    for (int t = 0; t < 200; ++t) {
        (void)step_adaptive(s, p, draw_day(s, p));
        if (t >= 1) {
            for (std::size_t i = 0; i < 5; ++i) {
                EXPECT_NEAR(s.traders[i].chartist_profit, strategy_profit(chart[i], s.log_prices, p.horizon, t), 1e-12);
                EXPECT_NEAR(s.traders[i].fundamentalist_profit, strategy_profit(fund[i], s.log_prices, p.horizon, t),
                            1e-12);
            }
        }
        for (std::size_t i = 0; i < 5; ++i) {
            chart[i].push_back(s.traders[i].signed_size(s.traders[i].chartist_position));
            fund[i].push_back(s.traders[i].signed_size(s.traders[i].fundamentalist_position));
        }
    }
}

TEST(Simulate, DivergenceRaisesBlowUp) {
    ModelParameters p;
    p.lambda = 1e-3;
    p.a = 10;
    p.T_min = 0.01;
    p.T_max = 0.02;
    p.tau_min = -0.01;
    p.tau_max = 0.0;
    p.sigma_zeta = 0.05;
    EXPECT_THROW((void)simulate(p, Variant::Standard, 2000, 0, 1), SimulationBlowUp);
}

TEST(SimulationCsv, HeaderAndRows) {
    auto p = quiet(2);
    const auto out = simulate(p, Variant::Adaptive, 2, 0.5, 1);
    const auto csv = format_simulation_csv(out, "# seed: 1\n");
    EXPECT_EQ(csv.rfind("# seed: 1\nday,log_price,log_return,n_chartists,n_fundamentalists,profit_chartists,"
                        "profit_fundamentalists\n0,0.5,,,,,\n1,",
                        0),
              0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}
