#include "fjcal/market.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace fjcal {

double market_impact_update(double log_price, double net_order, double lambda, double zeta) {
    return log_price + (net_order / lambda + zeta);
}

double chartist_mispricing(double lagged_log_price, double log_price) noexcept {
    return lagged_log_price - log_price;
}

double fundamentalist_mispricing(double log_price, double value) noexcept { return log_price - value; }

Position threshold_transition(Position current, double m, double entry, double exit) noexcept {
    switch (current) {
        case Position::Flat:
            if (m < -entry) return Position::Long;
            if (m > entry) return Position::Short;
            return Position::Flat;
        case Position::Long:
            return m > -exit ? Position::Flat : Position::Long;
        case Position::Short:
            return m < exit ? Position::Flat : Position::Short;
    }
    return Position::Flat;
}

double value_perception_step(double value, double eta) noexcept { return value + eta; }

double strategy_profit(std::span<const double> positions, std::span<const double> log_prices, int horizon,
                       int t) {
    if (t < 1) throw std::invalid_argument("strategy_profit: t must be >= 1");
    if (horizon < 1) throw std::invalid_argument("strategy_profit: horizon must be >= 1");
    if (positions.size() < static_cast<std::size_t>(t) || log_prices.size() < static_cast<std::size_t>(t) + 1)
        throw std::invalid_argument("strategy_profit: history shorter than t");
    double sum = 0.0;
    for (int k = std::max(1, t - horizon + 1); k <= t; ++k) {
        const auto j = static_cast<std::size_t>(k);
        sum += positions[j - 1] * (log_prices[j] - log_prices[j - 1]);
    }
    return sum;
}

SwitchProbabilities switch_probability(double profit_chartist, double profit_fundamentalist, double gamma) {
    if (!(gamma > 0)) throw std::invalid_argument("switch_probability: gamma must be > 0");
    const double z = (profit_chartist - profit_fundamentalist) / gamma;
    double phi_c;
    if (z >= 0) {
        phi_c = 1.0 / (1.0 + std::exp(-z));
    } else {
        const double e = std::exp(z);
        phi_c = e / (1.0 + e);
    }
    return {phi_c, 1.0 - phi_c};
}

MarketState init_simulation(const ModelParameters& params, Variant variant, double p0, std::uint64_t seed) {
    validate(params);
    if (!std::isfinite(p0)) throw std::invalid_argument("init_simulation: p0 must be finite");
    MarketState state;
    state.variant = variant;
    state.rng = CounterRng(seed);
    state.log_prices.push_back(p0);
    state.day = 0;

    const int n = params.n_traders;
    const int n_fund = standard_fundamentalists(n);
    state.traders.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& tr = state.traders[static_cast<std::size_t>(i)];
        const auto u = [&](std::uint64_t k) { return state.rng.uniform(Stream::TraderInit, i, k); };
        tr.entry_threshold = params.T_min + (params.T_max - params.T_min) * u(0);
        tr.exit_threshold = params.tau_min + (params.tau_max - params.tau_min) * u(1);
        tr.capital = params.a * (tr.entry_threshold - tr.exit_threshold);
        const int span = params.d_max - params.d_min + 1;
        tr.lag = std::min(params.d_max, params.d_min + static_cast<int>(std::floor(u(2) * span)));
        tr.value_perception = p0 + params.v_min + (params.v_max - params.v_min) * u(3);
        if (variant == Variant::Standard) {
            tr.active = i < n_fund ? Strategy::Fundamentalist : Strategy::Chartist;
        } else {
            tr.fundamentalist_terms.assign(static_cast<std::size_t>(params.horizon), 0.0);
            tr.chartist_terms.assign(static_cast<std::size_t>(params.horizon), 0.0);
        }
    }
    return state;
}

DayDraws draw_day(const MarketState& state, const ModelParameters& params) {
    DayDraws d;
    const auto day = static_cast<std::uint64_t>(state.day);
    d.zeta = params.sigma_zeta * state.rng.normal(Stream::PriceNoise, day);
    const std::size_t n = state.traders.size();
    d.eta.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (state.traders[i].holds(Strategy::Fundamentalist, state.variant))
            d.eta[i] = params.mu_eta + params.sigma_eta * state.rng.normal(Stream::ValueNoise, i, day);
    if (state.variant == Variant::Adaptive) {
        d.switch_u.resize(n);
        for (std::size_t i = 0; i < n; ++i) d.switch_u[i] = state.rng.uniform(Stream::Switching, i, day);
    }
    return d;
}

namespace {

DayRecord step_impl(MarketState& state, const ModelParameters& params, const DayDraws& draws, bool adaptive) {
    const std::size_t n = state.traders.size();
    if (draws.eta.size() != n || (adaptive && draws.switch_u.size() != n))
        throw std::invalid_argument("step: draws do not match the number of traders");
    const int t = state.day;
    const double p_t = state.log_prices.back();
    const std::span<const double> prices(state.log_prices);
    const auto h = static_cast<std::size_t>(params.horizon);

    DayRecord rec;
    double net_order = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto& tr = state.traders[i];
        const bool use_fund = !adaptive ? tr.active == Strategy::Fundamentalist : true;
        const bool use_chart = !adaptive ? tr.active == Strategy::Chartist : true;

        if (adaptive) {
            if (t >= 1) {
                // Add day t's term x_{t-1} (p_t - p_{t-1}); the slot held day t-H's.
                const double dp = p_t - prices[static_cast<std::size_t>(t - 1)];
                const std::size_t slot = static_cast<std::size_t>(t) % h;
                const double term_c = tr.signed_size(tr.chartist_position) * dp;
                const double term_f = tr.signed_size(tr.fundamentalist_position) * dp;
                tr.chartist_profit += term_c - tr.chartist_terms[slot];
                tr.fundamentalist_profit += term_f - tr.fundamentalist_terms[slot];
                tr.chartist_terms[slot] = term_c;
                tr.fundamentalist_terms[slot] = term_f;
            }
            const auto phi = switch_probability(tr.chartist_profit, tr.fundamentalist_profit, params.gamma);
            tr.active = draws.switch_u[i] < phi.chartist ? Strategy::Chartist : Strategy::Fundamentalist;
            rec.profit_chartists += tr.chartist_profit;
            rec.profit_fundamentalists += tr.fundamentalist_profit;
        }
        if (use_fund) {
            const double m = fundamentalist_mispricing(p_t, tr.value_perception);
            tr.fundamentalist_position =
                threshold_transition(tr.fundamentalist_position, m, tr.entry_threshold, tr.exit_threshold);
        }
        if (use_chart) {
            const double m = chartist_mispricing(state.price_at(static_cast<long>(t) - tr.lag), p_t);
            tr.chartist_position =
                threshold_transition(tr.chartist_position, m, tr.entry_threshold, tr.exit_threshold);
        }
        const double target = tr.signed_size(tr.active == Strategy::Chartist ? tr.chartist_position
                                                                             : tr.fundamentalist_position);
        net_order += target - tr.position;
        tr.position = target;
        if (tr.active == Strategy::Chartist)
            ++rec.n_chartists;
        else
            ++rec.n_fundamentalists;
    }

    const double increment = net_order / params.lambda + draws.zeta;
    const double p_next = p_t + increment;
    if (!std::isfinite(p_next) || std::abs(p_next) > kBlowUpLogPrice)
        throw SimulationBlowUp("simulation blow-up on day " + std::to_string(t + 1) +
                               ": log price left [-50, 50] (net order " + std::to_string(net_order) + ")");
    state.log_prices.push_back(p_next);
    state.day = t + 1;

    for (std::size_t i = 0; i < n; ++i) {
        auto& tr = state.traders[i];
        if (tr.holds(Strategy::Fundamentalist, state.variant))
            tr.value_perception = value_perception_step(tr.value_perception, draws.eta[i]);
    }
    rec.log_return = increment;
    rec.net_order = net_order;
    return rec;
}

}  // namespace

DayRecord step_standard(MarketState& state, const ModelParameters& params, const DayDraws& draws) {
    return step_impl(state, params, draws, false);
}

DayRecord step_adaptive(MarketState& state, const ModelParameters& params, const DayDraws& draws) {
    return step_impl(state, params, draws, true);
}

SimulationOutput simulate(const ModelParameters& params, Variant variant, int days, double p0,
                          std::uint64_t seed) {
    if (days < 1) throw std::invalid_argument("simulate: days must be >= 1");
    auto state = init_simulation(params, variant, p0, seed);
    state.log_prices.reserve(static_cast<std::size_t>(days) + 1);

    SimulationOutput out;
    const auto n = static_cast<std::size_t>(days);
    out.log_returns.reserve(n);
    out.n_chartists.reserve(n);
    out.n_fundamentalists.reserve(n);
    out.profit_chartists.reserve(n);
    out.profit_fundamentalists.reserve(n);
    for (int d = 0; d < days; ++d) {
        const auto draws = draw_day(state, params);
        const auto rec = variant == Variant::Standard ? step_standard(state, params, draws)
                                                      : step_adaptive(state, params, draws);
        out.log_returns.push_back(rec.log_return);
        out.n_chartists.push_back(rec.n_chartists);
        out.n_fundamentalists.push_back(rec.n_fundamentalists);
        out.profit_chartists.push_back(rec.profit_chartists);
        out.profit_fundamentalists.push_back(rec.profit_fundamentalists);
    }
    out.log_prices = std::move(state.log_prices);
    return out;
}

std::string format_simulation_csv(const SimulationOutput& out, const std::string& metadata) {
    std::string s = metadata;
    s += "day,log_price,log_return,n_chartists,n_fundamentalists,profit_chartists,profit_fundamentalists\n";
    char buf[256];
    std::snprintf(buf, sizeof buf, "0,%.17g,,,,,\n", out.log_prices.front());
    s += buf;
    for (std::size_t t = 0; t < out.log_returns.size(); ++t) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%d,%d,%.17g,%.17g\n", t + 1, out.log_prices[t + 1],
                      out.log_returns[t], out.n_chartists[t], out.n_fundamentalists[t], out.profit_chartists[t],
                      out.profit_fundamentalists[t]);
        s += buf;
    }
    return s;
}

}  // namespace fjcal
