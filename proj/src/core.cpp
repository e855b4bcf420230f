#include "ehpc/core.hpp"

#include <cmath>
#include <memory>

namespace ehpc {

namespace {
constexpr double kLn2 = 0.6931471805599453;
constexpr double kEdgeProb = 1e-12;
} // namespace

void SystemParams::validate() const {
    if (!(battery_capacity > 0.0) || !std::isfinite(battery_capacity))
        throw std::invalid_argument("battery_capacity must be positive");
    if (!(channel_gain > 0.0) || !std::isfinite(channel_gain))
        throw std::invalid_argument("channel_gain must be positive");
    if (!(arrival_prob >= kEdgeProb) || !(arrival_prob <= 1.0 - kEdgeProb))
        throw std::invalid_argument("arrival_prob must lie in [1e-12, 1-1e-12]");
    if (window < 0)
        throw std::invalid_argument("window must be >= 0");
}

double reward(double a, double gain) {
    if (a < 0.0 || !std::isfinite(a))
        throw std::domain_error("reward: energy must be nonnegative");
    return 0.5 * std::log1p(gain * a) / kLn2;
}

double reward_deriv(double a, double gain) {
    if (a < 0.0 || !std::isfinite(a))
        throw std::domain_error("reward_deriv: energy must be nonnegative");
    return gain / (2.0 * kLn2 * (1.0 + gain * a));
}

double reward_deriv_inv(double y, double gain) {
    const double y0 = gain / (2.0 * kLn2);
    if (!(y > 0.0) || y > y0 * (1.0 + 1e-14))
        throw std::domain_error("reward_deriv_inv: marginal rate out of (0, R'(0)]");
    const double a = (y0 / y - 1.0) / gain;
    return a > 0.0 ? a : 0.0;
}

int distance(std::span<const double> window) {
    for (std::size_t i = 0; i < window.size(); ++i)
        if (window[i] > 0.0) return static_cast<int>(i) + 1;
    return 0;
}

void validate_state(const PolicyState& state, const SystemParams& params) {
    const double B = params.battery_capacity;
    if (!(state.battery >= 0.0) || state.battery > B * (1.0 + 1e-12))
        throw std::invalid_argument("state battery outside [0, B]");
    if (state.window.arrivals.size() != static_cast<std::size_t>(params.window))
        throw std::invalid_argument("window length does not match params.window");
    for (double e : state.window.arrivals)
        if (!(e >= 0.0) || e > B * (1.0 + 1e-12))
            throw std::invalid_argument("window entry outside [0, B]");
}

} // namespace ehpc
