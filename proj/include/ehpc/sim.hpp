// Monte Carlo policy evaluation with per-run counter-based streams,
// renewal statistics, and common-random-number policy comparisons.
#pragma once

#include <cstdint>
#include <vector>

#include "ehpc/arrivals.hpp"
#include "ehpc/core.hpp"

namespace ehpc {

struct SimConfig {
    SystemParams params;
    ArrivalModel model;
    long horizon = 100000;      // T slots per run
    int runs = 50;
    std::uint64_t seed = 1;
    double initial_battery = -1.0; // beta; negative means "full battery"

    void validate() const;
};

struct RunRecord {
    int run = 0;
    std::uint64_t stream_key = 0;
    double total_reward = 0.0;
    double mean_throughput = 0.0;
    long cycles = 0;           // arrivals of a full B from slot 2 on
    double mean_cycle_len = 0.0;
};

struct SimResult {
    double mean_throughput = 0.0;
    double stderr_throughput = 0.0;
    double mean_cycle_len = 0.0;
    long total_cycles = 0;
    std::vector<RunRecord> per_run;
};

// Runs `runs` independent trajectories of the policy and averages the
// per-slot reward. Energy causality and the battery bounds are checked at
// every slot; a violation raises SimulationError naming slot and amounts.
SimResult simulate(const Policy& policy, const SimConfig& config);

// Instants at which a full battery B arrives (starting the count from
// slot 2), prefixed with F_0 = 1. arrivals[0] is E_1.
std::vector<long> renewal_instants(std::span<const double> arrivals, double capacity);

// T-horizon throughput ratio of `policy` over `baseline` under common
// random numbers (identical per-run arrival streams).
double multiplicative_factor(const Policy& policy, const Policy& baseline,
                             const SimConfig& config);

} // namespace ehpc
