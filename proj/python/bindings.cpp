// Python bindings for the main operations: reward primitives, the sequence
// solvers and throughput functionals, policies, and the simulators.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ehpc/arrivals.hpp"
#include "ehpc/core.hpp"
#include "ehpc/mdp.hpp"
#include "ehpc/policy.hpp"
#include "ehpc/sim.hpp"
#include "ehpc/solver.hpp"

namespace py = pybind11;
using namespace ehpc;

namespace {

SystemParams make_params(double battery, double p, double gain, int window) {
    SystemParams pr{battery, p, gain, window};
    pr.validate();
    return pr;
}

py::dict estimate_dict(const ThroughputEstimate& t) {
    py::dict d;
    d["value"] = t.value;
    d["error_bound"] = t.error_bound;
    switch (t.method) {
    case ThroughputMethod::AnalyticLower: d["method"] = "analytic-lower"; break;
    case ThroughputMethod::AnalyticUpper: d["method"] = "analytic-upper"; break;
    case ThroughputMethod::AnalyticLimit: d["method"] = "analytic-limit"; break;
    case ThroughputMethod::ValueIteration: d["method"] = "value-iteration"; break;
    case ThroughputMethod::MonteCarlo: d["method"] = "monte-carlo"; break;
    }
    return d;
}

ArrivalModel model_from_args(const std::string& kind, double a) {
    if (kind == "bernoulli") return bernoulli_arrivals(a);
    if (kind == "uniform") return uniform_arrivals(a);
    if (kind == "exponential") return exponential_arrivals(a);
    throw std::invalid_argument("kind must be bernoulli|uniform|exponential");
}

} // namespace

PYBIND11_MODULE(_ehpc, m) {
    m.doc() = "lookahead energy-harvesting power control toolkit";

    py::class_<SystemParams>(m, "SystemParams")
        .def(py::init(&make_params), py::arg("battery_capacity"), py::arg("arrival_prob"),
             py::arg("channel_gain"), py::arg("window"))
        .def_readonly("battery_capacity", &SystemParams::battery_capacity)
        .def_readonly("arrival_prob", &SystemParams::arrival_prob)
        .def_readonly("channel_gain", &SystemParams::channel_gain)
        .def_readonly("window", &SystemParams::window);

    m.def("reward", &reward, py::arg("a"), py::arg("gain"));
    m.def("reward_deriv", &reward_deriv, py::arg("a"), py::arg("gain"));
    m.def("reward_deriv_inv", &reward_deriv_inv, py::arg("y"), py::arg("gain"));
    m.def("distance",
          [](const std::vector<double>& w) { return distance(std::span<const double>(w)); },
          py::arg("window"));

    m.def("solve_lower", [](const SystemParams& pr, int n, double tol) {
        SolveResult r = solve_lower(pr, n, tol);
        return py::make_tuple(r.xi.values, r.xi.kkt_residual);
    }, py::arg("params"), py::arg("n"), py::arg("tol") = kDefaultKktTol);
    m.def("solve_upper", [](const SystemParams& pr, int n, double tol) {
        SolveResult r = solve_upper(pr, n, tol);
        return py::make_tuple(r.xi.values, r.xi.kkt_residual);
    }, py::arg("params"), py::arg("n"), py::arg("tol") = kDefaultKktTol);
    m.def("solve_online_w0", [](const SystemParams& pr, double tol) {
        SolveResult r = solve_online_w0(pr, tol);
        return py::make_tuple(r.xi.values, r.xi.kkt_residual);
    }, py::arg("params"), py::arg("tol") = kDefaultKktTol);
    m.def("xi_star", [](const SystemParams& pr, double eps, int n_report, int n_cap) {
        XiStarResult r = xi_star(pr, eps, n_report, n_cap);
        py::dict d;
        d["values"] = r.xi.values;
        d["widths"] = r.widths;
        d["elementwise_error"] = r.elementwise_error;
        d["n_used"] = r.n_used;
        d["kkt_residual"] = r.xi.kkt_residual;
        return d;
    }, py::arg("params"), py::arg("eps") = -1.0, py::arg("n_report") = 0, py::arg("n_cap") = 600);

    m.def("throughput_lower_n", [](const std::vector<double>& xi, const SystemParams& pr) {
        return estimate_dict(throughput_lower_n(xi, pr));
    });
    m.def("throughput_upper_n", [](const std::vector<double>& xi, const SystemParams& pr) {
        return estimate_dict(throughput_upper_n(xi, pr));
    });
    m.def("throughput_inf", [](const std::vector<double>& xi, const SystemParams& pr, double err) {
        return estimate_dict(throughput_inf(xi, pr, err));
    }, py::arg("xi_prefix"), py::arg("params"), py::arg("elementwise_error") = 0.0);
    m.def("offline_throughput",
          [](const SystemParams& pr) { return estimate_dict(offline_throughput(pr)); });
    m.def("gamma_star", [](const SystemParams& pr, double width_tol) {
        return estimate_dict(gamma_star(pr, width_tol));
    }, py::arg("params"), py::arg("width_tol") = 1e-9);

    m.def("offline_allocation",
          [](double battery, const std::vector<double>& window, const SystemParams& pr) {
              return offline_allocation(battery, window, pr);
          });
    m.def("mcr", [](const std::string& kind, double arg, double capacity) {
        return mcr(model_from_args(kind, arg), capacity);
    }, py::arg("kind"), py::arg("arg"), py::arg("capacity"));

    m.def("simulate_bernoulli",
          [](const SystemParams& pr, long horizon, int runs, std::uint64_t seed) {
              BernoulliPolicy pol = make_bernoulli_policy(pr);
              SimConfig sc;
              sc.params = pr;
              sc.model = bernoulli_arrivals(pr.arrival_prob);
              sc.horizon = horizon;
              sc.runs = runs;
              sc.seed = seed;
              SimResult r = simulate(pol, sc);
              py::dict d;
              d["mean_throughput"] = r.mean_throughput;
              d["stderr"] = r.stderr_throughput;
              d["mean_cycle_len"] = r.mean_cycle_len;
              d["total_cycles"] = r.total_cycles;
              return d;
          },
          py::arg("params"), py::arg("horizon") = 100000, py::arg("runs") = 20,
          py::arg("seed") = 1);

    m.def("bellman_g", [](const SystemParams& pr, int n_b, int n_a, double tol, int max_sweeps) {
        DiscreteMdp mdp = build_mdp(pr, n_b, n_a);
        ValueTable vt = relative_value_iteration(mdp, tol, max_sweeps);
        py::dict d;
        d["g"] = vt.gain;
        d["span"] = vt.span;
        d["sweeps"] = vt.sweeps;
        return d;
    }, py::arg("params"), py::arg("n_b") = 400, py::arg("n_a") = 400, py::arg("tol") = 1e-9,
       py::arg("max_sweeps") = 50000);
}
