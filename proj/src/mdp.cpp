#include "ehpc/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ehpc/threading.hpp"

namespace ehpc {

namespace {

// distance of a window bitmask: 1-based position of the lowest set bit
int mask_distance(int mask, int w) {
    for (int i = 0; i < w; ++i)
        if (mask >> i & 1) return i + 1;
    return 0;
}

struct Lerp {
    int idx;
    double t;
};

inline Lerp locate(const std::vector<double>& grid, double x) {
    const int n = static_cast<int>(grid.size());
    if (x <= grid.front()) return {0, 0.0};
    if (x >= grid.back()) return {n - 2, 1.0};
    const double step = grid[1] - grid[0];
    int i = static_cast<int>((x - grid.front()) / step);
    if (i > n - 2) i = n - 2;
    while (i > 0 && x < grid[i]) --i;
    while (i < n - 2 && x > grid[i + 1]) ++i;
    return {i, (x - grid[i]) / (grid[i + 1] - grid[i])};
}

inline double lerp(const double* h, const Lerp& l) {
    return h[l.idx] * (1.0 - l.t) + h[l.idx + 1] * l.t;
}

} // namespace

DiscreteMdp build_mdp(const SystemParams& params, int n_b, int n_a) {
    params.validate();
    if (n_b < 2 || n_a < 2) throw std::invalid_argument("build_mdp: grids need >= 2 points");
    if (params.window > 12) throw ConfigError("build_mdp: window > 12 exceeds the state budget");
    const long states = (1L << params.window) * static_cast<long>(n_b);
    if (states > 64L * 1000 * 1000) throw ConfigError("build_mdp: state count too large");
    DiscreteMdp m;
    m.params = params;
    m.n_actions = n_a;
    m.n_windows = 1 << params.window;
    m.battery_grid.resize(n_b);
    const double B = params.battery_capacity;
    for (int i = 0; i < n_b; ++i)
        m.battery_grid[i] = B * static_cast<double>(i) / (n_b - 1);
    m.battery_grid.front() = 0.0;
    m.battery_grid.back() = B;
    return m;
}

std::vector<Outcome> transitions(const DiscreteMdp& mdp, int window_idx, int battery_idx,
                                 double action) {
    const SystemParams& pr = mdp.params;
    const double B = pr.battery_capacity, p = pr.arrival_prob;
    const int w = pr.window;
    const int nb = static_cast<int>(mdp.battery_grid.size());
    if (window_idx < 0 || window_idx >= mdp.n_windows) throw std::invalid_argument("bad window");
    if (battery_idx < 0 || battery_idx >= nb) throw std::invalid_argument("bad battery index");
    const double b = mdp.battery_grid[battery_idx];
    if (!(action >= 0.0) || action > b * (1.0 + 1e-12))
        throw std::invalid_argument("action outside [0, b]");

    const int shifted = w >= 1 ? (window_idx >> 1) : 0;
    const int s0 = shifted, s1 = w >= 1 ? (shifted | (1 << (w - 1))) : 0;
    std::vector<Outcome> out;
    auto push_battery = [&](int win, double prob, double bprime) {
        const Lerp l = locate(mdp.battery_grid, bprime);
        if (1.0 - l.t > 0.0) out.push_back({win, l.idx, prob * (1.0 - l.t)});
        if (l.t > 0.0) out.push_back({win, l.idx + 1, prob * l.t});
    };
    if (w == 0) {
        push_battery(0, 1.0 - p, b - action);
        push_battery(0, p, std::min(b - action + B, B));
    } else {
        const double e1 = (window_idx & 1) ? B : 0.0;
        const double bprime = std::min(b - action + e1, B);
        push_battery(s0, 1.0 - p, bprime);
        push_battery(s1, p, bprime);
    }
    return out;
}

ValueTable relative_value_iteration(const DiscreteMdp& mdp, double tol, int max_sweeps) {
    if (!(tol > 0.0)) throw std::invalid_argument("relative_value_iteration: tol must be positive");
    const SystemParams& pr = mdp.params;
    const double B = pr.battery_capacity, p = pr.arrival_prob, g = pr.channel_gain;
    const int w = pr.window, nb = static_cast<int>(mdp.battery_grid.size()), na = mdp.n_actions;
    const int nw = mdp.n_windows;
    const auto& grid = mdp.battery_grid;

    // Fixed per-battery action set: fractions of b, plus b/d appended per
    // window class. Rewards and next-battery interpolation weights for each
    // (battery, action, e1) are sweep-invariant, so precompute them.
    std::vector<double> frac(na);
    for (int j = 0; j < na; ++j) frac[j] = static_cast<double>(j) / (na - 1);

    struct Pre {
        double r;
        Lerp next0;  // e1 = 0
        Lerp next1;  // e1 = B
    };
    std::vector<Pre> pre(static_cast<std::size_t>(nb) * na);
    parallel_for(nb, [&](int ib) {
        const double b = grid[ib];
        for (int j = 0; j < na; ++j) {
            const double a = b * frac[j];
            Pre& q = pre[static_cast<std::size_t>(ib) * na + j];
            q.r = reward(a, g);
            q.next0 = locate(grid, b - a);
            q.next1 = locate(grid, std::min(b - a + B, B));
        }
    });
    // exact uniform-allocation action b/d for window classes with d > 0
    std::vector<std::vector<Pre>> pre_unif(w + 1);
    for (int d = 1; d <= w; ++d) {
        pre_unif[d].resize(nb);
        for (int ib = 0; ib < nb; ++ib) {
            const double b = grid[ib];
            const double a = b / d;
            Pre& q = pre_unif[d][ib];
            q.r = reward(a, g);
            q.next0 = locate(grid, b - a);
            q.next1 = locate(grid, std::min(b - a + B, B));
        }
    }

    std::vector<int> succ0(nw), succ1(nw), dist(nw), e1bit(nw);
    for (int m = 0; m < nw; ++m) {
        e1bit[m] = w >= 1 ? (m & 1) : 0;
        const int shifted = w >= 1 ? (m >> 1) : 0;
        succ0[m] = shifted;
        succ1[m] = w >= 1 ? (shifted | (1 << (w - 1))) : 0;
        dist[m] = mask_distance(m, w);
    }

    std::vector<double> h(static_cast<std::size_t>(nw) * nb, 0.0);
    std::vector<double> tnew(h.size());
    std::vector<double> vnext(static_cast<std::size_t>(nw) * nb);
    const int ref = (nw > 0 ? 0 : 0) * nb + (nb - 1); // full battery, all-zero window

    ValueTable out;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        // V_m(b') = E over the fresh arrival of h(successor window, b')
        parallel_for(nw, [&](int m) {
            const double* h0 = h.data() + static_cast<std::size_t>(succ0[m]) * nb;
            const double* h1 = h.data() + static_cast<std::size_t>(succ1[m]) * nb;
            double* v = vnext.data() + static_cast<std::size_t>(m) * nb;
            for (int ib = 0; ib < nb; ++ib) v[ib] = (1.0 - p) * h0[ib] + p * h1[ib];
        });
        parallel_for(nw, [&](int m) {
            const double* v = vnext.data() + static_cast<std::size_t>(m) * nb;
            double* t = tnew.data() + static_cast<std::size_t>(m) * nb;
            const bool charged = e1bit[m] != 0;
            const int d = dist[m];
            for (int ib = 0; ib < nb; ++ib) {
                const Pre* row = pre.data() + static_cast<std::size_t>(ib) * na;
                double best = -std::numeric_limits<double>::infinity();
                if (w == 0) {
                    // no lookahead: the incoming arrival is unobserved, so the
                    // next battery level mixes both outcomes
                    for (int j = 0; j < na; ++j) {
                        const double val = row[j].r + (1.0 - p) * lerp(v, row[j].next0) +
                                           p * lerp(v, row[j].next1);
                        if (val > best) best = val;
                    }
                } else {
                    for (int j = 0; j < na; ++j) {
                        const Lerp& l = charged ? row[j].next1 : row[j].next0;
                        const double val = row[j].r + lerp(v, l);
                        if (val > best) best = val;
                    }
                    if (d > 0) {
                        const Pre& q = pre_unif[d][ib];
                        const Lerp& l = charged ? q.next1 : q.next0;
                        best = std::max(best, q.r + lerp(v, l));
                    }
                }
                t[ib] = best;
            }
        });
        double lo = tnew[0] - h[0], hi = lo;
        for (std::size_t s = 1; s < h.size(); ++s) {
            const double d = tnew[s] - h[s];
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        const double shift = tnew[ref];
        for (std::size_t s = 0; s < h.size(); ++s) h[s] = tnew[s] - shift;
        out.gain = 0.5 * (lo + hi);
        out.span = hi - lo;
        out.sweeps = sweep + 1;
        if (out.span < tol) {
            out.h = h;
            return out;
        }
    }
    throw SolverError("relative_value_iteration: span " + std::to_string(out.span) +
                      " above tol after max_sweeps");
}

std::vector<double> greedy_policy(const ValueTable& table, const DiscreteMdp& mdp) {
    const SystemParams& pr = mdp.params;
    const double B = pr.battery_capacity, p = pr.arrival_prob, g = pr.channel_gain;
    const int w = pr.window, nb = static_cast<int>(mdp.battery_grid.size()), na = mdp.n_actions;
    const int nw = mdp.n_windows;
    const auto& grid = mdp.battery_grid;
    std::vector<double> actions(static_cast<std::size_t>(nw) * nb, 0.0);
    std::vector<double> v(nb);
    for (int m = 0; m < nw; ++m) {
        const int shifted = w >= 1 ? (m >> 1) : 0;
        const int s0 = shifted, s1 = w >= 1 ? (shifted | (1 << (w - 1))) : 0;
        const double e1 = (w >= 1 && (m & 1)) ? B : 0.0;
        for (int ib = 0; ib < nb; ++ib)
            v[ib] = (1.0 - p) * table.h[static_cast<std::size_t>(s0) * nb + ib] +
                    p * table.h[static_cast<std::size_t>(s1) * nb + ib];
        const int d = mask_distance(m, w);
        for (int ib = 0; ib < nb; ++ib) {
            const double b = grid[ib];
            double best = -std::numeric_limits<double>::infinity(), best_a = 0.0;
            auto value_at = [&](const std::vector<double>& vv, double x) {
                const Lerp l = locate(grid, x);
                return vv[l.idx] * (1.0 - l.t) + vv[l.idx + 1] * l.t;
            };
            auto consider = [&](double a) {
                double ev;
                if (w == 0)
                    ev = (1.0 - p) * value_at(v, b - a) + p * value_at(v, std::min(b - a + B, B));
                else
                    ev = value_at(v, std::min(b - a + e1, B));
                const double val = reward(a, g) + ev;
                if (val > best + 1e-13 || (val > best - 1e-13 && a < best_a)) {
                    if (val > best) best = val;
                    best_a = a;
                }
            };
            for (int j = 0; j < na; ++j) consider(b * j / (na - 1));
            if (d > 0) consider(b / d);
            actions[static_cast<std::size_t>(m) * nb + ib] = best_a;
        }
    }
    return actions;
}

GreedyMdpPolicy::GreedyMdpPolicy(DiscreteMdp mdp, std::vector<double> actions)
    : mdp_(std::move(mdp)), actions_(std::move(actions)) {}

double GreedyMdpPolicy::act(const PolicyState& state) {
    validate_state(state, mdp_.params);
    const double B = mdp_.params.battery_capacity;
    const int w = mdp_.params.window, nb = static_cast<int>(mdp_.battery_grid.size());
    int mask = 0;
    for (int i = 0; i < w; ++i)
        if (state.window.arrivals[i] > 0.5 * B) mask |= 1 << i;
    const Lerp l = locate(mdp_.battery_grid, state.battery);
    const double* row = actions_.data() + static_cast<std::size_t>(mask) * nb;
    const double a = row[l.idx] * (1.0 - l.t) + row[l.idx + 1] * l.t;
    return std::clamp(a, 0.0, state.battery);
}

std::unique_ptr<Policy> GreedyMdpPolicy::clone() const {
    return std::make_unique<GreedyMdpPolicy>(*this);
}

} // namespace ehpc
