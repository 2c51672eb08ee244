#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fjcal/model.hpp"
#include "fjcal/rng.hpp"

namespace fjcal {

enum class Strategy : std::uint8_t { Fundamentalist, Chartist };

/// Sign of a threshold position; the size is the trader's capital.
enum class Position : std::int8_t { Short = -1, Flat = 0, Long = 1 };

/// Raised when a path leaves the finite region |p| <= kBlowUpLogPrice.
class SimulationBlowUp : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kBlowUpLogPrice = 50.0;

// Single-equation building blocks.

/// p + net_order / lambda + zeta.
[[nodiscard]] double market_impact_update(double log_price, double net_order, double lambda, double zeta);
/// p_{t-d} - p_t. Rising prices give a negative value and long pressure.
[[nodiscard]] double chartist_mispricing(double lagged_log_price, double log_price) noexcept;
/// p_t - v_t. Overpricing gives a positive value and short pressure.
[[nodiscard]] double fundamentalist_mispricing(double log_price, double value) noexcept;

/// Entry/exit state machine. From flat, enter long when m < -T and short
/// when m > T. A long exits to flat once m > -tau; a short once m < tau.
[[nodiscard]] Position threshold_transition(Position current, double mispricing, double entry, double exit) noexcept;

[[nodiscard]] double value_perception_step(double value, double eta) noexcept;

/// Profit of a strategy over the last `horizon` days ending at day t:
/// sum over k = max(1, t-H+1)..t of positions[k-1] * (log_prices[k] - log_prices[k-1]).
/// positions[k] is the (signed) position decided on day k.
[[nodiscard]] double strategy_profit(std::span<const double> positions, std::span<const double> log_prices,
                                     int horizon, int t);

struct SwitchProbabilities {
    double chartist;
    double fundamentalist;
};

/// Logistic choice between the two strategies, evaluated without overflow.
[[nodiscard]] SwitchProbabilities switch_probability(double profit_chartist, double profit_fundamentalist,
                                                     double gamma);

/// Per-trader state. In the standard model only the position of the trader's
/// fixed strategy moves; in the adaptive model both strategy positions evolve
/// every day and the actual position is the active strategy's one.
struct TraderState {
    double entry_threshold = 0;  // T^i
    double exit_threshold = 0;   // tau^i
    double capital = 0;          // a (T^i - tau^i)
    int lag = 1;                 // d^i
    double value_perception = 0; // v^i_t, log units
    Strategy active = Strategy::Fundamentalist;
    Position fundamentalist_position = Position::Flat;
    Position chartist_position = Position::Flat;
    double position = 0;  // actual signed position held
    // Adaptive only: last H daily profit terms of each strategy (indexed by day % H)
    // and their running sums.
    std::vector<double> fundamentalist_terms;
    std::vector<double> chartist_terms;
    double fundamentalist_profit = 0;
    double chartist_profit = 0;

    [[nodiscard]] bool holds(Strategy s, Variant v) const noexcept {
        return v == Variant::Adaptive || active == s;
    }
    [[nodiscard]] double signed_size(Position p) const noexcept { return static_cast<double>(p) * capital; }

    bool operator==(const TraderState&) const = default;
};

struct MarketState {
    Variant variant = Variant::Standard;
    std::vector<double> log_prices;  // p_0 .. p_t
    std::vector<TraderState> traders;
    int day = 0;                     // t; always log_prices.size() - 1
    CounterRng rng;

    /// p_k, with p_k = p_0 for k < 0 (history before the start is flat at p0).
    [[nodiscard]] double price_at(long k) const noexcept {
        return k < 0 ? log_prices.front() : log_prices[static_cast<std::size_t>(k)];
    }

    bool operator==(const MarketState&) const = default;
};

/// Random inputs consumed by one day.
struct DayDraws {
    double zeta = 0;                 // price noise, already scaled by sigma_zeta
    std::vector<double> eta;         // per-trader value increments
    std::vector<double> switch_u;    // per-trader uniforms for strategy choice (adaptive)
};

/// Aggregates recorded for the day just stepped.
struct DayRecord {
    double log_return = 0;
    int n_chartists = 0;
    int n_fundamentalists = 0;
    double profit_chartists = 0;
    double profit_fundamentalists = 0;
    double net_order = 0;
};

[[nodiscard]] MarketState init_simulation(const ModelParameters& params, Variant variant, double p0,
                                          std::uint64_t seed);

/// Draws for day state.day from the state's counter streams.
[[nodiscard]] DayDraws draw_day(const MarketState& state, const ModelParameters& params);

/// Advances one day: positions from day-t mispricing, orders, price update,
/// value random walk. Throws SimulationBlowUp on divergence.
DayRecord step_standard(MarketState& state, const ModelParameters& params, const DayDraws& draws);
DayRecord step_adaptive(MarketState& state, const ModelParameters& params, const DayDraws& draws);

struct SimulationOutput {
    std::vector<double> log_prices;  // T + 1
    std::vector<double> log_returns; // T; exact increments net/lambda + zeta
    std::vector<int> n_chartists;
    std::vector<int> n_fundamentalists;
    std::vector<double> profit_chartists;
    std::vector<double> profit_fundamentalists;

    bool operator==(const SimulationOutput&) const = default;
};

[[nodiscard]] SimulationOutput simulate(const ModelParameters& params, Variant variant, int days, double p0,
                                        std::uint64_t seed);

/// CSV with columns day,log_price,log_return,n_chartists,n_fundamentalists,
/// profit_chartists,profit_fundamentalists. Day 0 carries only the price.
[[nodiscard]] std::string format_simulation_csv(const SimulationOutput& out, const std::string& metadata = {});

}  // namespace fjcal
