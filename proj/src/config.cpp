#include "ehpc/config.hpp"

#include <fstream>
#include <set>

#include "ehpc/policy.hpp"

namespace ehpc {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& known) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError("unknown config key: " + path + it.key());
}

double get_num(const json& obj, const std::string& path, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError("config key must be numeric: " + path + key);
    return obj[key].get<double>();
}

long get_int(const json& obj, const std::string& path, const char* key, long fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer()) throw ConfigError("config key must be integer: " + path + key);
    return obj[key].get<long>();
}

} // namespace

SimConfig ExperimentConfig::sim_config() const {
    SimConfig s;
    s.params = params;
    s.model = arrivals;
    s.horizon = sim_horizon;
    s.runs = sim_runs;
    s.seed = seed;
    s.initial_battery = initial_battery;
    return s;
}

ExperimentConfig parse_config(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
    reject_unknown(doc, "", {"params", "arrivals", "policy", "solver", "mdp", "sweep", "sim", "output"});
    ExperimentConfig cfg;

    if (doc.contains("params")) {
        const json& p = doc["params"];
        reject_unknown(p, "params.", {"battery_capacity", "arrival_prob", "channel_gain", "window"});
        cfg.params.battery_capacity = get_num(p, "params.", "battery_capacity", cfg.params.battery_capacity);
        cfg.params.arrival_prob = get_num(p, "params.", "arrival_prob", cfg.params.arrival_prob);
        cfg.params.channel_gain = get_num(p, "params.", "channel_gain", cfg.params.channel_gain);
        cfg.params.window = static_cast<int>(get_int(p, "params.", "window", cfg.params.window));
    }
    try {
        cfg.params.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("params: ") + e.what());
    }

    cfg.arrivals = bernoulli_arrivals(cfg.params.arrival_prob);
    if (doc.contains("arrivals")) {
        const json& a = doc["arrivals"];
        reject_unknown(a, "arrivals.", {"kind", "p", "uniform_max", "exp_mean", "atoms"});
        const std::string kind = a.value("kind", "bernoulli");
        try {
            if (kind == "bernoulli") {
                cfg.arrivals = bernoulli_arrivals(get_num(a, "arrivals.", "p", cfg.params.arrival_prob));
            } else if (kind == "uniform") {
                cfg.arrivals = uniform_arrivals(get_num(a, "arrivals.", "uniform_max", 0.0));
            } else if (kind == "exponential") {
                cfg.arrivals = exponential_arrivals(get_num(a, "arrivals.", "exp_mean", 0.0));
            } else if (kind == "custom") {
                if (!a.contains("atoms") || !a["atoms"].is_array())
                    throw ConfigError("arrivals.atoms must be an array of [value, weight]");
                std::vector<std::pair<double, double>> atoms;
                for (const auto& row : a["atoms"]) {
                    if (!row.is_array() || row.size() != 2)
                        throw ConfigError("arrivals.atoms entries must be [value, weight]");
                    atoms.emplace_back(row[0].get<double>(), row[1].get<double>());
                }
                cfg.arrivals = custom_arrivals(std::move(atoms));
            } else {
                throw ConfigError("arrivals.kind must be bernoulli|uniform|exponential|custom");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(std::string("arrivals: ") + e.what());
        }
    }

    if (doc.contains("policy")) {
        const json& p = doc["policy"];
        reject_unknown(p, "policy.", {"kind"});
        cfg.policy_kind = p.value("kind", cfg.policy_kind);
        if (cfg.policy_kind != "bernoulli" && cfg.policy_kind != "general" &&
            cfg.policy_kind != "offline")
            throw ConfigError("policy.kind must be bernoulli|general|offline");
    }

    if (doc.contains("solver")) {
        const json& s = doc["solver"];
        reject_unknown(s, "solver.", {"kkt_tol", "eps", "width_tol", "horizon_cap"});
        cfg.solver.kkt_tol = get_num(s, "solver.", "kkt_tol", cfg.solver.kkt_tol);
        cfg.solver.eps = get_num(s, "solver.", "eps", cfg.solver.eps);
        cfg.solver.width_tol = get_num(s, "solver.", "width_tol", cfg.solver.width_tol);
        cfg.solver.horizon_cap = static_cast<int>(get_int(s, "solver.", "horizon_cap", cfg.solver.horizon_cap));
        if (!(cfg.solver.kkt_tol > 0.0) || !(cfg.solver.width_tol > 0.0) || cfg.solver.horizon_cap < 4)
            throw ConfigError("solver tolerances must be positive and horizon_cap >= 4");
    }

    if (doc.contains("mdp")) {
        const json& m = doc["mdp"];
        reject_unknown(m, "mdp.", {"battery_grid", "action_grid", "tol", "max_sweeps", "grids"});
        cfg.mdp.battery_grid = static_cast<int>(get_int(m, "mdp.", "battery_grid", cfg.mdp.battery_grid));
        cfg.mdp.action_grid = static_cast<int>(get_int(m, "mdp.", "action_grid", cfg.mdp.action_grid));
        cfg.mdp.tol = get_num(m, "mdp.", "tol", cfg.mdp.tol);
        cfg.mdp.max_sweeps = static_cast<int>(get_int(m, "mdp.", "max_sweeps", cfg.mdp.max_sweeps));
        if (m.contains("grids")) {
            if (!m["grids"].is_array()) throw ConfigError("mdp.grids must be an array");
            cfg.mdp.grids.clear();
            for (const auto& v : m["grids"]) cfg.mdp.grids.push_back(v.get<int>());
        }
    }

    if (doc.contains("sweep")) {
        const json& s = doc["sweep"];
        reject_unknown(s, "sweep.", {"w_list", "n_list", "mcr_list", "solve_n"});
        auto read_list = [&](const char* key, auto& out) {
            if (!s.contains(key)) return;
            if (!s[key].is_array()) throw ConfigError(std::string("sweep.") + key + " must be an array");
            out.clear();
            for (const auto& v : s[key]) out.push_back(v.get<typename std::decay_t<decltype(out)>::value_type>());
        };
        read_list("w_list", cfg.sweep.w_list);
        read_list("n_list", cfg.sweep.n_list);
        read_list("mcr_list", cfg.sweep.mcr_list);
        cfg.sweep.solve_n = static_cast<int>(get_int(s, "sweep.", "solve_n", cfg.sweep.solve_n));
        if (cfg.sweep.solve_n < 1) throw ConfigError("sweep.solve_n must be >= 1");
    }

    if (doc.contains("sim")) {
        const json& s = doc["sim"];
        reject_unknown(s, "sim.", {"horizon", "runs", "seed", "initial_battery"});
        cfg.sim_horizon = get_int(s, "sim.", "horizon", cfg.sim_horizon);
        cfg.sim_runs = static_cast<int>(get_int(s, "sim.", "runs", cfg.sim_runs));
        if (s.contains("seed")) cfg.seed = s["seed"].get<std::uint64_t>();
        cfg.initial_battery = get_num(s, "sim.", "initial_battery", cfg.initial_battery);
        if (cfg.sim_horizon < 1 || cfg.sim_runs < 1) throw ConfigError("sim.horizon and sim.runs must be >= 1");
    }

    if (doc.contains("output")) {
        const json& o = doc["output"];
        reject_unknown(o, "output.", {"dir"});
        cfg.output_dir = o.value("dir", cfg.output_dir);
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(doc);
}

void apply_override(nlohmann::json& doc, const std::string& key_eq_value) {
    const auto eq = key_eq_value.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override must look like section.key=value: " + key_eq_value);
    const std::string path = key_eq_value.substr(0, eq);
    const std::string raw = key_eq_value.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (...) {
        value = raw; // plain string
    }
    json* node = &doc;
    std::size_t start = 0;
    for (;;) {
        const auto dot = path.find('.', start);
        const std::string part = path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (part.empty()) throw ConfigError("bad override path: " + path);
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

std::unique_ptr<Policy> make_policy(const ExperimentConfig& cfg) {
    if (cfg.policy_kind == "bernoulli")
        return std::make_unique<BernoulliPolicy>(make_bernoulli_policy(cfg.params, cfg.xi_eps()));
    if (cfg.policy_kind == "offline")
        return std::make_unique<OfflineRecedingPolicy>(cfg.params);
    return std::make_unique<GeneralPolicy>(make_general_policy(cfg.params, cfg.arrivals));
}

} // namespace ehpc
