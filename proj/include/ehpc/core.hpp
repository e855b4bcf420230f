// Core vocabulary: system parameters, the rate/reward function and its
// derivative pair, the lookahead distance function, and policy state.
#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ehpc {

// Thrown when a numerical routine fails to converge or a bracket is invalid.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a simulated policy violates energy causality or battery bounds.
class SimulationError : public std::runtime_error {
public:
    explicit SimulationError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown on malformed configuration input.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Battery capacity B, arrival probability p, channel gain, lookahead window w.
struct SystemParams {
    double battery_capacity = 100.0;
    double arrival_prob = 0.3;
    double channel_gain = 0.5;
    int window = 1;

    // Rejects out-of-range parameters. p within 1e-12 of 0 or 1 is refused
    // (the conditioning of every downstream computation degrades there).
    void validate() const;
};

// Per-slot rate in bits for spending energy `a` over a gain-`gain` channel:
// 0.5 * log2(1 + gain*a). Strictly increasing and strictly concave.
double reward(double a, double gain);

// d/da reward(a) = gain / (2 ln2 (1 + gain*a)). Strictly decreasing,
// reward_deriv(0) = gain / (2 ln2).
double reward_deriv(double a, double gain);

// Inverse of reward_deriv on (0, reward_deriv(0)]. Out-of-range arguments
// throw std::domain_error (the solvers use this to detect infeasible steps).
double reward_deriv_inv(double y, double gain);

// The w future arrivals visible at decision time; entries are clipped to
// [0, B] on ingestion.
struct LookaheadWindow {
    std::vector<double> arrivals;
};

struct PolicyState {
    double battery = 0.0;
    LookaheadWindow window;
};

// 1-based index of the earliest nonzero window entry, or 0 if the window is
// all zeros. Matches max{1<=i<=w+1 : sum_{j<i} e_j = 0} mod (w+1).
int distance(std::span<const double> window);

inline int distance(const LookaheadWindow& w) {
    return distance(std::span<const double>(w.arrivals));
}

// Validates a state against params: battery in [0,B], window length w,
// entries in [0,B]. Throws std::invalid_argument.
void validate_state(const PolicyState& state, const SystemParams& params);

// Stationary policy interface. A policy instance owns per-trajectory
// counters, so each simulated trajectory needs its own clone.
class Policy {
public:
    virtual ~Policy() = default;
    virtual double act(const PolicyState& state) = 0;
    virtual void reset() = 0;
    virtual std::unique_ptr<Policy> clone() const = 0;
    virtual int lookahead() const = 0;
    virtual std::string name() const = 0;
};

} // namespace ehpc
