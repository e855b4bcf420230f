// ehpc: solver + simulator for lookahead energy-harvesting power control.
//
// Subcommands compute certified expenditure sequences and throughput bounds
// (solve, fig1-fig3), policy tables and benchmark scans (fig4, fig5), Monte
// Carlo evaluation (simulate), and the value-iteration cross-check
// (bellman-check). Outputs are CSV files plus JSON summaries.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ehpc/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"lookahead energy-harvesting power control toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--set", overrides, "override config values, e.g. --set params.window=5");
    app.add_option("--out", out_dir, "output directory (shorthand for --set output.dir=...)");

    std::string solve_kind = "limit";
    int solve_n = 0;
    auto* c_solve = app.add_subcommand("solve", "compute an expenditure sequence and its certificates");
    c_solve->add_option("--kind", solve_kind, "lower|upper|limit")->default_str("limit");
    c_solve->add_option("--n", solve_n, "horizon N for lower/upper");

    auto* c_fig1 = app.add_subcommand("fig1", "throughput and bounds vs window size");
    auto* c_fig2 = app.add_subcommand("fig2", "optimal sequences across window sizes");
    auto* c_fig3 = app.add_subcommand("fig3", "sandwich sequences across horizons");
    auto* c_fig4 = app.add_subcommand("fig4", "battery-indexed first-action curves");
    auto* c_fig5 = app.add_subcommand("fig5", "multiplicative factor vs mean-to-capacity ratio");
    auto* c_sim = app.add_subcommand("simulate", "Monte Carlo policy evaluation");
    auto* c_bell = app.add_subcommand("bellman-check", "value-iteration cross-check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2; // usage problems are configuration errors
    }

    return ehpc::run_command_guarded([&]() -> int {
        nlohmann::json doc = nlohmann::json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            try {
                in >> doc;
            } catch (const std::exception& e) {
                throw ehpc::ConfigError(std::string("config parse error: ") + e.what());
            }
        }
        for (const std::string& kv : overrides) ehpc::apply_override(doc, kv);
        if (!out_dir.empty()) ehpc::apply_override(doc, "output.dir=\"" + out_dir + "\"");
        ehpc::ExperimentConfig cfg = ehpc::parse_config(doc);

        if (c_solve->parsed())
            return ehpc::cmd_solve(cfg, solve_kind, solve_n > 0 ? solve_n : cfg.sweep.solve_n);
        if (c_fig1->parsed()) return ehpc::cmd_fig1(cfg);
        if (c_fig2->parsed()) return ehpc::cmd_fig2(cfg);
        if (c_fig3->parsed()) return ehpc::cmd_fig3(cfg);
        if (c_fig4->parsed()) return ehpc::cmd_fig4(cfg);
        if (c_fig5->parsed()) return ehpc::cmd_fig5(cfg);
        if (c_sim->parsed()) return ehpc::cmd_simulate(cfg);
        if (c_bell->parsed()) return ehpc::cmd_bellman_check(cfg);
        std::cerr << "no subcommand\n";
        return 2;
    });
}
