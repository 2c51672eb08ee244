#include "fjcal/model.hpp"

#include <algorithm>
#include <cmath>

namespace fjcal {

std::string_view to_string(Variant v) noexcept {
    return v == Variant::Standard ? "standard" : "adaptive";
}

Variant parse_variant(std::string_view name) {
    if (name == "standard") return Variant::Standard;
    if (name == "adaptive") return Variant::Adaptive;
    throw std::invalid_argument("unknown variant '" + std::string(name) + "' (expected standard|adaptive)");
}

void validate(const ModelParameters& p) {
    auto fail = [](const std::string& m) { throw ParameterError("invalid parameters: " + m); };
    auto finite = [](double x) { return std::isfinite(x); };
    for (auto name : kParameterNames)
        if (!finite(get_parameter(p, name))) fail(std::string(name) + " is not finite");
    if (p.n_traders < 1) fail("n_traders must be >= 1");
    if (!(p.lambda > 0)) fail("lambda must be > 0");
    if (!(p.a > 0)) fail("a must be > 0");
    if (p.d_min < 1) fail("d_min must be >= 1");
    if (p.d_min > p.d_max) fail("d_min must be <= d_max");
    if (p.sigma_eta < 0) fail("sigma_eta must be >= 0");
    if (p.sigma_zeta < 0) fail("sigma_zeta must be >= 0");
    if (!(p.T_min > 0)) fail("T_min must be > 0");
    if (p.T_min > p.T_max) fail("T_min must be <= T_max");
    if (p.tau_min > p.tau_max) fail("tau_min must be <= tau_max");
    if (!(p.tau_max < p.T_min)) fail("tau_max must be < T_min");
    if (p.v_min > p.v_max) fail("v_min must be <= v_max");
    if (!(p.gamma > 0)) fail("gamma must be > 0");
    if (p.horizon < 1) fail("horizon must be >= 1");
}

int standard_fundamentalists(int n_traders) noexcept { return (n_traders + 1) / 2; }

bool is_parameter_name(std::string_view name) noexcept {
    return std::find(kParameterNames.begin(), kParameterNames.end(), name) != kParameterNames.end();
}

bool is_integral_parameter(std::string_view name) noexcept {
    return name == "n_traders" || name == "d_min" || name == "d_max" || name == "horizon";
}

std::string valid_parameter_list() {
    std::string out;
    for (auto n : kParameterNames) {
        if (!out.empty()) out += ", ";
        out += n;
    }
    return out;
}

namespace {

[[noreturn]] void unknown(std::string_view name) {
    throw std::invalid_argument("unknown parameter '" + std::string(name) + "'; valid names: " +
                                valid_parameter_list());
}

}  // namespace

double get_parameter(const ModelParameters& p, std::string_view n) {
    if (n == "n_traders") return p.n_traders;
    if (n == "lambda") return p.lambda;
    if (n == "a") return p.a;
    if (n == "d_min") return p.d_min;
    if (n == "d_max") return p.d_max;
    if (n == "mu_eta") return p.mu_eta;
    if (n == "sigma_eta") return p.sigma_eta;
    if (n == "sigma_zeta") return p.sigma_zeta;
    if (n == "T_min") return p.T_min;
    if (n == "T_max") return p.T_max;
    if (n == "tau_min") return p.tau_min;
    if (n == "tau_max") return p.tau_max;
    if (n == "v_min") return p.v_min;
    if (n == "v_max") return p.v_max;
    if (n == "gamma") return p.gamma;
    if (n == "horizon") return p.horizon;
    unknown(n);
}

void set_parameter(ModelParameters& p, std::string_view n, double v) {
    auto as_int = [](double x) { return static_cast<int>(std::lround(x)); };
    if (n == "n_traders") p.n_traders = as_int(v);
    else if (n == "lambda") p.lambda = v;
    else if (n == "a") p.a = v;
    else if (n == "d_min") p.d_min = as_int(v);
    else if (n == "d_max") p.d_max = as_int(v);
    else if (n == "mu_eta") p.mu_eta = v;
    else if (n == "sigma_eta") p.sigma_eta = v;
    else if (n == "sigma_zeta") p.sigma_zeta = v;
    else if (n == "T_min") p.T_min = v;
    else if (n == "T_max") p.T_max = v;
    else if (n == "tau_min") p.tau_min = v;
    else if (n == "tau_max") p.tau_max = v;
    else if (n == "v_min") p.v_min = v;
    else if (n == "v_max") p.v_max = v;
    else if (n == "gamma") p.gamma = v;
    else if (n == "horizon") p.horizon = as_int(v);
    else unknown(n);
}

std::vector<std::string_view> free_parameters(Variant v) {
    std::vector<std::string_view> out(kParameterNames.begin(), kParameterNames.end());
    if (v == Variant::Standard) out.resize(out.size() - 2);
    return out;
}

}  // namespace fjcal
