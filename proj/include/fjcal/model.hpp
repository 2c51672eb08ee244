#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fjcal {

enum class Variant { Standard, Adaptive };

[[nodiscard]] std::string_view to_string(Variant v) noexcept;
[[nodiscard]] Variant parse_variant(std::string_view name);

/// Full parameter set of the standard and adaptive models. Prices, values and
/// thresholds are in log units.
struct ModelParameters {
    int n_traders = 100;      // N (standard: split into fundamentalists and chartists)
    double lambda = 10.0;     // liquidity
    double a = 0.05;          // capital scale, c = a (T - tau)
    int d_min = 1;            // chartist lag bounds
    int d_max = 50;
    double mu_eta = 0.0;      // value random walk drift
    double sigma_eta = 0.01;  // value random walk s.d.
    double sigma_zeta = 0.01; // price noise s.d.
    double T_min = 0.2;       // entry thresholds
    double T_max = 1.0;
    double tau_min = -0.2;    // exit thresholds
    double tau_max = 0.1;
    double v_min = -0.2;      // initial value offset from p0
    double v_max = 0.2;
    double gamma = 0.05;      // switching intensity (adaptive only)
    int horizon = 50;         // profit window H in days (adaptive only)

    bool operator==(const ModelParameters&) const = default;
};

class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Throws ParameterError describing the first violated constraint.
void validate(const ModelParameters& p);

/// Number of fundamentalists in the standard model (ceil(N/2)); the rest are chartists.
[[nodiscard]] int standard_fundamentalists(int n_traders) noexcept;

/// Names of all parameters in canonical order.
inline constexpr std::array<std::string_view, 16> kParameterNames = {
    "n_traders", "lambda",  "a",       "d_min",   "d_max", "mu_eta", "sigma_eta", "sigma_zeta",
    "T_min",     "T_max",   "tau_min", "tau_max", "v_min", "v_max",  "gamma",     "horizon"};

[[nodiscard]] bool is_parameter_name(std::string_view name) noexcept;
[[nodiscard]] bool is_integral_parameter(std::string_view name) noexcept;

/// Reads/writes a parameter by name; integral fields are rounded on write.
/// Unknown names throw std::invalid_argument listing the valid ones.
[[nodiscard]] double get_parameter(const ModelParameters& p, std::string_view name);
void set_parameter(ModelParameters& p, std::string_view name, double value);

/// Parameters that influence a run of the given variant.
[[nodiscard]] std::vector<std::string_view> free_parameters(Variant v);

[[nodiscard]] std::string valid_parameter_list();

}  // namespace fjcal
