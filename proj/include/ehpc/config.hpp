// Experiment configuration: JSON schema, validation, and the policy factory.
// Precedence is CLI overrides > JSON file > built-in defaults.
#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ehpc/arrivals.hpp"
#include "ehpc/core.hpp"
#include "ehpc/sim.hpp"

namespace ehpc {

struct SolverConfig {
    double kkt_tol = 1e-10;
    double eps = -1.0;       // elementwise xi* tolerance; negative = 1e-8 * B
    double width_tol = 1e-9; // throughput sandwich width
    int horizon_cap = 600;
};

struct MdpConfig {
    int battery_grid = 800;
    int action_grid = 800;
    double tol = 1e-9;
    int max_sweeps = 50000;
    std::vector<int> grids = {200, 400, 800};
};

struct SweepConfig {
    std::vector<int> w_list = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<int> n_list = {1, 2, 5, 10, 20};
    std::vector<double> mcr_list = {0.05, 0.10, 0.15, 0.20, 0.24, 0.28, 0.32, 0.36, 0.40};
    int solve_n = 10; // horizon for `solve lower|upper`
};

struct ExperimentConfig {
    SystemParams params;
    ArrivalModel arrivals;
    std::string policy_kind = "bernoulli"; // bernoulli | general | offline
    SolverConfig solver;
    MdpConfig mdp;
    SweepConfig sweep;
    long sim_horizon = 100000;
    int sim_runs = 50;
    std::uint64_t seed = 1;
    double initial_battery = -1.0;
    std::string output_dir = "out";

    SimConfig sim_config() const;
    double xi_eps() const { return solver.eps > 0.0 ? solver.eps : 1e-8 * params.battery_capacity; }
};

// Parses and validates a config document. Unknown keys anywhere are
// rejected. Throws ConfigError with the offending path.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config_file(const std::string& path);

// Applies a dotted-path override, e.g. "params.window=5" or
// "sweep.n_list=[1,5,25]". The value is parsed as JSON when possible and as
// a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& key_eq_value);

// Builds the configured policy (same schema as the CLI config file).
std::unique_ptr<Policy> make_policy(const ExperimentConfig& cfg);

} // namespace ehpc
