#include "ehpc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "ehpc/rng.hpp"
#include "ehpc/threading.hpp"

namespace ehpc {

namespace {

double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

RunRecord run_trajectory(const Policy& proto, const SimConfig& cfg, int run) {
    const double B = cfg.params.battery_capacity;
    const double gain = cfg.params.channel_gain;
    const int w = proto.lookahead();
    auto policy = proto.clone();

    RunRng rng(cfg.seed, static_cast<std::uint64_t>(run));
    RunRecord rec;
    rec.run = run;
    rec.stream_key = rng.stream_key();

    const double beta = cfg.initial_battery < 0.0 ? B : cfg.initial_battery;
    const double e1 = sample_arrival(cfg.model, B, rng);
    double battery = std::min(beta + e1, B);

    PolicyState state;
    state.window.arrivals.resize(w);
    std::vector<double>& win = state.window.arrivals;
    for (int i = 0; i < w; ++i) win[i] = sample_arrival(cfg.model, B, rng);

    double total = 0.0;
    long cycles = 0, last_renewal = 1;
    for (long tau = 1; tau <= cfg.horizon; ++tau) {
        state.battery = battery;
        const double a = policy->act(state);
        if (!(a >= 0.0) || a > battery) {
            std::ostringstream os;
            os << "causality violation at slot " << tau << ": action " << a << " vs battery "
               << battery << " (policy " << policy->name() << ")";
            throw SimulationError(os.str());
        }
        total += reward(a, gain);

        const double e_next = w >= 1 ? win[0] : sample_arrival(cfg.model, B, rng); // E_{tau+1}
        if (tau + 1 <= cfg.horizon && e_next == B) {
            ++cycles;
            last_renewal = tau + 1;
        }
        battery = std::min(battery - a + e_next, B);
        if (battery < 0.0) {
            std::ostringstream os;
            os << "battery went negative at slot " << tau;
            throw SimulationError(os.str());
        }
        if (w >= 1) {
            for (int i = 0; i + 1 < w; ++i) win[i] = win[i + 1];
            win[w - 1] = sample_arrival(cfg.model, B, rng); // E_{tau+w+1}
        }
    }
    rec.total_reward = total;
    rec.mean_throughput = total / static_cast<double>(cfg.horizon);
    rec.cycles = cycles;
    rec.mean_cycle_len = cycles > 0 ? static_cast<double>(last_renewal - 1) / cycles : 0.0;
    return rec;
}

} // namespace

void SimConfig::validate() const {
    params.validate();
    model.validate();
    if (horizon < 1) throw std::invalid_argument("sim horizon must be >= 1");
    if (runs < 1) throw std::invalid_argument("sim runs must be >= 1");
    if (initial_battery > params.battery_capacity * (1.0 + 1e-12))
        throw std::invalid_argument("initial battery exceeds capacity");
}

SimResult simulate(const Policy& policy, const SimConfig& config) {
    config.validate();
    if (policy.name() == "bernoulli" && config.model.kind != ArrivalKind::Bernoulli)
        throw std::invalid_argument("BernoulliPolicy requires Bernoulli arrivals");

    SimResult res;
    res.per_run.resize(config.runs);
    std::exception_ptr failure;
    std::mutex fail_mtx;
    parallel_for(config.runs, [&](int r) {
        try {
            res.per_run[r] = run_trajectory(policy, config, r);
        } catch (...) {
            std::lock_guard<std::mutex> lk(fail_mtx);
            if (!failure) failure = std::current_exception();
        }
    });
    if (failure) std::rethrow_exception(failure);

    const int n = config.runs;
    std::vector<double> means(n);
    for (int i = 0; i < n; ++i) means[i] = res.per_run[i].mean_throughput;
    const double mean = pairwise_sum(means.data(), means.size()) / n;
    double var = 0.0;
    if (n > 1) {
        std::vector<double> sq(n);
        for (int i = 0; i < n; ++i) sq[i] = (means[i] - mean) * (means[i] - mean);
        var = pairwise_sum(sq.data(), sq.size()) / (n - 1);
    }
    res.mean_throughput = mean;
    res.stderr_throughput = n > 1 ? std::sqrt(var / n) : 0.0;

    long cyc = 0;
    double len_weighted = 0.0;
    for (const auto& r : res.per_run) {
        cyc += r.cycles;
        len_weighted += r.mean_cycle_len * r.cycles;
    }
    res.total_cycles = cyc;
    res.mean_cycle_len = cyc > 0 ? len_weighted / cyc : 0.0;
    return res;
}

std::vector<long> renewal_instants(std::span<const double> arrivals, double capacity) {
    std::vector<long> out;
    out.push_back(1); // F_0
    for (std::size_t i = 1; i < arrivals.size(); ++i)
        if (arrivals[i] == capacity) out.push_back(static_cast<long>(i) + 1);
    return out;
}

double multiplicative_factor(const Policy& policy, const Policy& baseline,
                             const SimConfig& config) {
    const SimResult num = simulate(policy, config);
    const SimResult den = simulate(baseline, config);
    if (den.mean_throughput == 0.0)
        throw std::invalid_argument("multiplicative_factor: baseline throughput is zero");
    return num.mean_throughput / den.mean_throughput;
}

} // namespace ehpc
