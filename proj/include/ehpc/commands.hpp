// CLI command bodies. Each writes CSV/JSON artifacts under the configured
// output directory and returns a process exit code (0 ok, 2 config error,
// 3 numerical non-convergence, 4 simulation invariant violation).
#pragma once

#include <functional>
#include <string>

#include "ehpc/config.hpp"

namespace ehpc {

int cmd_solve(const ExperimentConfig& cfg, const std::string& kind, int n);
int cmd_fig1(const ExperimentConfig& cfg);
int cmd_fig2(const ExperimentConfig& cfg);
int cmd_fig3(const ExperimentConfig& cfg);
int cmd_fig4(const ExperimentConfig& cfg);
int cmd_fig5(const ExperimentConfig& cfg);
int cmd_simulate(const ExperimentConfig& cfg);
int cmd_bellman_check(const ExperimentConfig& cfg);

// Shared exit-code mapping for main() and tests.
int run_command_guarded(const std::function<int()>& body);

// Uniform-[0,c] / exponential parameter with a prescribed mean-to-capacity
// ratio (used by the fig5 scan).
double uniform_max_for_mcr(double target, double capacity);
double exp_mean_for_mcr(double target, double capacity);

} // namespace ehpc
