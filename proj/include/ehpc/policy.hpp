// Stationary control policies: the Bernoulli-optimal lookahead policy, the
// receding-horizon offline allocator, and the general-arrival extension
// parameterized by the mean-to-capacity ratio.
#pragma once

#include <memory>

#include "ehpc/arrivals.hpp"
#include "ehpc/core.hpp"
#include "ehpc/solver.hpp"

namespace ehpc {

// Full optimal allocation over a horizon of window.size()+1 slots starting
// from `battery`, with window[i] arriving after slot i+1. Exact taut-string
// (staircase water-filling) solution of the concave program; all available
// energy is spent by the end of the horizon.
std::vector<double> offline_allocation(double battery, std::span<const double> window,
                                       const SystemParams& params);

// First action of the allocation above. `horizon` must equal w+1.
double offline_allocate(double battery, std::span<const double> window, int horizon,
                        const SystemParams& params);

// Optimal stationary policy for Bernoulli arrivals: uniform allocation
// battery/d while an arrival is visible at distance d, otherwise the
// xi* schedule indexed by slots since the last full battery.
class BernoulliPolicy : public Policy {
public:
    BernoulliPolicy(const SystemParams& params, XiSequence xi_limit);

    double act(const PolicyState& state) override;
    void reset() override;
    std::unique_ptr<Policy> clone() const override;
    int lookahead() const override { return params_.window; }
    std::string name() const override { return "bernoulli"; }

    const XiSequence& xi() const { return *xi_; }
    int cycle_index() const { return j_; }
    int distance_countdown() const { return d_; }

private:
    SystemParams params_;
    std::shared_ptr<const XiSequence> xi_;
    int d_ = 0; // remaining uniform-stage slots
    int j_ = 1; // 1-based index into xi* within the current cycle
};

// Builds the policy from its defining sequence (xi_star for w >= 1, the
// online ladder for w = 0).
BernoulliPolicy make_bernoulli_policy(const SystemParams& params, double eps = -1.0);

// Receding-horizon offline policy: replans offline_allocation every slot.
class OfflineRecedingPolicy : public Policy {
public:
    explicit OfflineRecedingPolicy(const SystemParams& params) : params_(params) {}
    double act(const PolicyState& state) override;
    void reset() override {}
    std::unique_ptr<Policy> clone() const override {
        return std::make_unique<OfflineRecedingPolicy>(params_);
    }
    int lookahead() const override { return params_.window; }
    std::string name() const override { return "offline"; }

private:
    SystemParams params_;
};

// Battery-indexed first-action table: omega(x) = xi*_1 with the capacity set
// to x and p set to the model's mean-to-capacity ratio. Monotone
// piecewise-linear interpolation over a logarithmic grid.
struct OmegaTable {
    std::vector<double> level;  // grid over (0, x_max]
    std::vector<double> omega;
    double x_max = 0.0;

    double eval(double x) const;
};

// Grid cap defaults to 1.5 B: the general policy queries the table at
// battery + window-sum, which stays below 1.5 B on the branch that uses it.
OmegaTable build_omega_table(const SystemParams& params, double mcr_value, int levels = 256,
                             double rel_eps = 1e-6, double x_max_factor = 1.5);

// General-arrival extension: offline replanning when the visible window
// holds at least B/2 of energy, otherwise the omega table applied to the
// virtual battery level battery + window-sum.
class GeneralPolicy : public Policy {
public:
    GeneralPolicy(const SystemParams& params, double mcr_value, OmegaTable table);

    double act(const PolicyState& state) override;
    void reset() override {}
    std::unique_ptr<Policy> clone() const override;
    int lookahead() const override { return params_.window; }
    std::string name() const override { return "general"; }

    double mcr_value() const { return mcr_; }
    const OmegaTable& table() const { return *table_; }

private:
    SystemParams params_;
    double mcr_ = 0.0;
    std::shared_ptr<const OmegaTable> table_;
};

GeneralPolicy make_general_policy(const SystemParams& params, const ArrivalModel& model,
                                  int levels = 256, double rel_eps = 1e-6);

// omega_w-lower evaluated on [0, B] (the public query form). Throws
// std::domain_error outside [0, B].
double omega_lower(double x, const OmegaTable& table, const SystemParams& params);

} // namespace ehpc
