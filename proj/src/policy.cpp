#include "ehpc/policy.hpp"

#include <algorithm>
#include <cmath>

namespace ehpc {

namespace {

// Taut string through the cumulative-spend corridor [L_k, U_k]: pins the
// chord at the point of maximum violation and recurses. Slopes of the
// result are the per-slot expenditures.
void taut_fill(std::vector<double>& a, const std::vector<double>& lo, const std::vector<double>& up,
               int k0, int k1, double tol) {
    if (k1 - k0 <= 1) return;
    const double slope = (a[k1] - a[k0]) / (k1 - k0);
    int pin = -1;
    bool pin_upper = false;
    double worst = tol;
    for (int k = k0 + 1; k < k1; ++k) {
        const double d = a[k0] + slope * (k - k0);
        if (d - up[k] > worst) { worst = d - up[k]; pin = k; pin_upper = true; }
        if (lo[k] - d > worst) { worst = lo[k] - d; pin = k; pin_upper = false; }
    }
    if (pin < 0) {
        for (int k = k0 + 1; k < k1; ++k) a[k] = a[k0] + slope * (k - k0);
        return;
    }
    a[pin] = pin_upper ? up[pin] : lo[pin];
    taut_fill(a, lo, up, k0, pin, tol);
    taut_fill(a, lo, up, pin, k1, tol);
}

} // namespace

std::vector<double> offline_allocation(double battery, std::span<const double> window,
                                       const SystemParams& params) {
    const double B = params.battery_capacity;
    if (!(battery >= 0.0) || battery > B * (1.0 + 1e-12))
        throw std::domain_error("offline_allocation: battery outside [0, B]");
    for (double e : window)
        if (!(e >= 0.0) || e > B * (1.0 + 1e-12))
            throw std::domain_error("offline_allocation: window entry outside [0, B]");

    const int w = static_cast<int>(window.size());
    const int horizon = w + 1;
    std::vector<double> up(horizon + 1, 0.0), lo(horizon + 1, 0.0);
    double avail = battery; // arrived by the start of the slot
    for (int k = 1; k <= horizon; ++k) {
        up[k] = avail;
        if (k - 1 < w) avail += window[k - 1]; // arrival after slot k
        lo[k] = std::max(avail - B, 0.0);
    }
    const double total = avail;
    up[horizon] = lo[horizon] = total; // spend everything by the end

    std::vector<double> cum(horizon + 1, 0.0);
    cum[horizon] = total;
    taut_fill(cum, lo, up, 0, horizon, 1e-12 * std::max(B, 1.0));

    std::vector<double> actions(horizon);
    for (int k = 1; k <= horizon; ++k) actions[k - 1] = std::max(cum[k] - cum[k - 1], 0.0);
    actions[0] = std::min(actions[0], battery);
    return actions;
}

double offline_allocate(double battery, std::span<const double> window, int horizon,
                        const SystemParams& params) {
    if (horizon != static_cast<int>(window.size()) + 1)
        throw std::invalid_argument("offline_allocate: horizon must equal window size + 1");
    return offline_allocation(battery, window, params).front();
}

BernoulliPolicy::BernoulliPolicy(const SystemParams& params, XiSequence xi_limit)
    : params_(params), xi_(std::make_shared<const XiSequence>(std::move(xi_limit))) {
    params_.validate();
    if (xi_->values.empty()) throw std::invalid_argument("BernoulliPolicy: empty xi sequence");
}

double BernoulliPolicy::act(const PolicyState& state) {
    validate_state(state, params_);
    const double B = params_.battery_capacity;
    for (double e : state.window.arrivals)
        if (e != 0.0 && e != B)
            throw std::domain_error("BernoulliPolicy: window entries must be 0 or B");

    const int dd = distance(state.window);
    double a;
    if (dd > 0) {
        a = state.battery / dd;
        d_ = dd - 1;
        j_ = 1; // battery recharges when the arrival lands; next cycle restarts the schedule
    } else {
        d_ = 0;
        const auto& xs = xi_->values;
        const std::size_t idx = std::min<std::size_t>(j_ - 1, xs.size() - 1);
        a = xs[idx];
        ++j_;
    }
    return std::clamp(a, 0.0, state.battery);
}

void BernoulliPolicy::reset() {
    d_ = 0;
    j_ = 1;
}

std::unique_ptr<Policy> BernoulliPolicy::clone() const {
    auto p = std::make_unique<BernoulliPolicy>(*this);
    p->reset();
    return p;
}

BernoulliPolicy make_bernoulli_policy(const SystemParams& params, double eps) {
    params.validate();
    if (params.window == 0)
        return BernoulliPolicy(params, solve_online_w0(params).xi);
    return BernoulliPolicy(params, xi_star(params, eps).xi);
}

double OfflineRecedingPolicy::act(const PolicyState& state) {
    validate_state(state, params_);
    return std::clamp(offline_allocation(state.battery, state.window.arrivals, params_).front(),
                      0.0, state.battery);
}

double OmegaTable::eval(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= level.back()) return omega.back();
    if (x <= level.front()) return omega.front() * (x / level.front());
    const auto it = std::upper_bound(level.begin(), level.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - level.begin());
    const double t = (x - level[hi - 1]) / (level[hi] - level[hi - 1]);
    return omega[hi - 1] + t * (omega[hi] - omega[hi - 1]);
}

OmegaTable build_omega_table(const SystemParams& params, double mcr_value, int levels,
                             double rel_eps, double x_max_factor) {
    params.validate();
    if (levels < 2) throw std::invalid_argument("build_omega_table: levels must be >= 2");
    OmegaTable t;
    t.x_max = params.battery_capacity * x_max_factor;
    t.level.resize(levels);
    t.omega.resize(levels);
    const double x_min = t.x_max * 1e-4;
    const double ratio = std::pow(t.x_max / x_min, 1.0 / (levels - 1));
    SystemParams pr = params;
    pr.arrival_prob = mcr_value;
    double x = x_min;
    int warm = 0;
    for (int i = 0; i < levels; ++i) {
        t.level[i] = (i + 1 == levels) ? t.x_max : x;
        pr.battery_capacity = t.level[i];
        if (pr.window == 0)
            t.omega[i] = solve_online_w0(pr).xi.values.front();
        else
            t.omega[i] = xi_star_first(pr, std::max(rel_eps * t.level[i], 1e-12), 2000, &warm);
        x *= ratio;
    }
    return t;
}

GeneralPolicy::GeneralPolicy(const SystemParams& params, double mcr_value, OmegaTable table)
    : params_(params), mcr_(mcr_value),
      table_(std::make_shared<const OmegaTable>(std::move(table))) {
    params_.validate();
    if (!(mcr_ > 0.0) || !(mcr_ < 1.0)) throw std::invalid_argument("GeneralPolicy: mcr out of (0,1)");
}

double GeneralPolicy::act(const PolicyState& state) {
    validate_state(state, params_);
    const double B = params_.battery_capacity;
    double wsum = 0.0;
    for (double e : state.window.arrivals) wsum += e;
    double a;
    if (wsum >= 0.5 * B) {
        a = offline_allocation(state.battery, state.window.arrivals, params_).front();
    } else {
        a = std::min(table_->eval(std::min(state.battery + wsum, table_->x_max)), state.battery);
    }
    return std::clamp(a, 0.0, state.battery);
}

std::unique_ptr<Policy> GeneralPolicy::clone() const {
    return std::make_unique<GeneralPolicy>(*this);
}

GeneralPolicy make_general_policy(const SystemParams& params, const ArrivalModel& model,
                                  int levels, double rel_eps) {
    const double r = mcr(model, params.battery_capacity);
    return GeneralPolicy(params, r, build_omega_table(params, r, levels, rel_eps));
}

double omega_lower(double x, const OmegaTable& table, const SystemParams& params) {
    if (x < 0.0 || x > params.battery_capacity * (1.0 + 1e-12))
        throw std::domain_error("omega_lower: battery level outside [0, B]");
    return table.eval(x);
}

} // namespace ehpc
