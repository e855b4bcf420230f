// Independent value-iteration oracle: discretizes the state space
// [0,B] x {0,B}^w and solves the average-reward optimality equation by
// relative value iteration. Reported as an oracle, not a certified bound.
#pragma once

#include <cstdint>
#include <vector>

#include "ehpc/core.hpp"

namespace ehpc {

struct DiscreteMdp {
    SystemParams params;
    std::vector<double> battery_grid; // n_b levels including 0 and B
    int n_actions = 0;                // uniform action fractions of [0, b]
    int n_windows = 0;                // 2^w binary windows (bit i = e_{tau+1+i})

    int state_count() const { return n_windows * static_cast<int>(battery_grid.size()); }
};

struct ValueTable {
    std::vector<double> h;  // relative value, indexed window-major
    double gain = 0.0;      // g, the average reward
    double span = 0.0;      // sup-inf of the final Bellman update residual
    int sweeps = 0;
};

// Grid construction. Throws ConfigError if 2^w * n_b would not fit memory.
DiscreteMdp build_mdp(const SystemParams& params, int n_b, int n_a);

// Outcome distribution of one (state, action) pair: the next battery level
// is split between its two neighboring grid points with mean-preserving
// weights, the window shifts left and a fresh arrival enters at the back.
struct Outcome {
    int window_idx;
    int battery_idx;
    double prob;
};
std::vector<Outcome> transitions(const DiscreteMdp& mdp, int window_idx, int battery_idx,
                                 double action);

// Synchronous (Jacobi) relative value iteration with span-based stopping;
// deterministic for any thread count. Throws SolverError on non-convergence.
ValueTable relative_value_iteration(const DiscreteMdp& mdp, double tol = 1e-9,
                                    int max_sweeps = 50000);

// Greedy action per state from a converged table; ties break toward the
// smaller action.
std::vector<double> greedy_policy(const ValueTable& table, const DiscreteMdp& mdp);

// Adapts a greedy table to the continuous-state Policy interface by linear
// interpolation in the battery coordinate.
class GreedyMdpPolicy : public Policy {
public:
    GreedyMdpPolicy(DiscreteMdp mdp, std::vector<double> actions);
    double act(const PolicyState& state) override;
    void reset() override {}
    std::unique_ptr<Policy> clone() const override;
    int lookahead() const override { return mdp_.params.window; }
    std::string name() const override { return "mdp-greedy"; }

private:
    DiscreteMdp mdp_;
    std::vector<double> actions_;
};

} // namespace ehpc
