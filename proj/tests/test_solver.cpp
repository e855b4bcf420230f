#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "ehpc/solver.hpp"
#include "oracles.hpp"

using namespace ehpc;

namespace {
const SystemParams kRef{100.0, 0.3, 0.5, 4};

double seq_sum(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0);
}
} // namespace

TEST_CASE("solve_lower N=1 closed form: xi_1 = B/(w+1)") {
    for (int w : {1, 2, 4, 8}) {
        SystemParams pr = kRef;
        pr.window = w;
        SolveResult r = solve_lower(pr, 1);
        CHECK(r.xi.values.size() == 1);
        CHECK(r.xi.values[0] == doctest::Approx(100.0 / (w + 1)).epsilon(1e-12));
    }
}

TEST_CASE("solve_upper N=1 matches the scalar bisection oracle") {
    // root of R'(x) = sum_{k>=4} p(1-p)^{k-4} R'((100-x)/k), K=500 tail,
    // frozen from an independent bisection run
    SolveResult r = solve_upper(kRef, 1);
    CHECK(r.xi.values[0] == doctest::Approx(13.9068774765512).epsilon(1e-10));
}

TEST_CASE("lower/upper sequences: shape invariants at w=4, N=10") {
    SolveResult lo = solve_lower(kRef, 10);
    SolveResult up = solve_upper(kRef, 10);
    const double B = kRef.battery_capacity;
    const int w = kRef.window;
    for (const auto* r : {&lo, &up}) {
        const auto& v = r->xi.values;
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            CHECK(v[i] > 0.0);
            if (i + 1 < v.size()) CHECK(v[i] > v[i + 1] + 1e-12);
            s += v[i];
            const bool last_lower = (r == &lo && i + 1 == v.size());
            if (!last_lower) CHECK(v[i] < (B - s) / w - 1e-12);
        }
        CHECK(s < B);
    }
    for (std::size_t i = 0; i < 10; ++i) CHECK(up.xi.values[i] < lo.xi.values[i]);
}

TEST_CASE("re-substituted KKT residuals stay below 1e-10") {
    for (int w : {1, 2, 8}) {
        SystemParams pr = kRef;
        pr.window = w;
        for (int n : {1, 3, 17, 30}) {
            SolveResult lo = solve_lower(pr, n);
            SolveResult up = solve_upper(pr, n);
            CHECK(kkt_residual_lower(lo.xi.values, pr) < 1e-10);
            CHECK(kkt_residual_upper(up.xi.values, pr) < 1e-10);
        }
    }
}

TEST_CASE("monotone in N: lower decreases, upper increases") {
    SolveResult prev_lo = solve_lower(kRef, 1), prev_up = solve_upper(kRef, 1);
    for (int n = 2; n <= 12; ++n) {
        SolveResult lo = solve_lower(kRef, n);
        SolveResult up = solve_upper(kRef, n);
        for (int i = 0; i + 1 < n; ++i) {
            CHECK(lo.xi.values[i] < prev_lo.xi.values[i] + 1e-12);
            CHECK(up.xi.values[i] > prev_up.xi.values[i] - 1e-12);
        }
        prev_lo = lo;
        prev_up = up;
    }
}

TEST_CASE("projected-gradient oracle equivalence for small N") {
    for (int n : {1, 3, 6}) {
        SolveResult lo = solve_lower(kRef, n);
        SolveResult up = solve_upper(kRef, n);
        std::vector<double> pg_lo = oracle::pg_lower(kRef, n);
        std::vector<double> pg_up = oracle::pg_upper(kRef, n);
        for (int i = 0; i < n; ++i) {
            CHECK(lo.xi.values[i] == doctest::Approx(pg_lo[i]).epsilon(1e-6));
            CHECK(up.xi.values[i] == doctest::Approx(pg_up[i]).epsilon(1e-6));
        }
    }
}

TEST_CASE("throughput_lower_n: N=1 closed sum and optimality spot-checks") {
    const double B = 100.0, p = 0.3, q = 0.7, g = 0.5;
    const int w = 4;
    SolveResult r = solve_lower(kRef, 1);
    const double xi1 = r.xi.values[0];
    double expect = 0.0, wgt = p * p;
    for (int k = 1; k <= w; ++k) {
        expect += wgt * k * reward(B / k, g);
        wgt *= q;
    }
    expect += p * std::pow(q, w) * (reward(xi1, g) + w * reward((B - xi1) / w, g));
    ThroughputEstimate t = throughput_lower_n(r.xi.values, kRef);
    CHECK(t.value == doctest::Approx(expect).epsilon(1e-14));
    CHECK(t.error_bound == 0.0);

    // the solved sequence beats random feasible sequences
    SolveResult opt = solve_lower(kRef, 6);
    const double best = throughput_lower_n(opt.xi.values, kRef).value;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> xi(6);
        double s = 0.0;
        for (double& v : xi) {
            v = u(rng);
            s += v;
        }
        const double scale = u(rng) * B / s;
        for (double& v : xi) v *= scale;
        CHECK(throughput_lower_n(xi, kRef).value <= best + 1e-12);
    }
}

TEST_CASE("throughput values increase with richer horizons") {
    double prev = -1.0;
    for (int n = 1; n <= 20; ++n) {
        SolveResult r = solve_lower(kRef, n);
        const double v = throughput_lower_n(r.xi.values, kRef).value;
        CHECK(v >= prev - 1e-13);
        prev = v;
    }
}

TEST_CASE("upper dominates lower on any feasible sequence") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(u(rng) * 12);
        std::vector<double> xi(n);
        double s = 0.0;
        for (double& v : xi) {
            v = u(rng);
            s += v;
        }
        for (double& v : xi) v *= 0.9 * kRef.battery_capacity / s;
        const double lo = throughput_lower_n(xi, kRef).value;
        const double hi = throughput_upper_n(xi, kRef).value;
        CHECK(hi >= lo - 1e-13);
    }
    std::vector<double> too_big(3, 40.0);
    CHECK_THROWS_AS(throughput_lower_n(too_big, kRef), std::domain_error);
}

TEST_CASE("gap bound of the sandwich") {
    const double p = 0.3, q = 0.7;
    for (int n : {5, 10, 25}) {
        SolveResult lo = solve_lower(kRef, n);
        SolveResult up = solve_upper(kRef, n);
        const double gl = throughput_lower_n(lo.xi.values, kRef).value;
        ThroughputEstimate gu = throughput_upper_n(up.xi.values, kRef);
        const double bound = p * std::pow(q, n + kRef.window) * reward_deriv(0.0, 0.5) *
                             (kRef.battery_capacity - seq_sum(up.xi.values));
        CHECK(gu.value + gu.error_bound - gl < bound);
        CHECK(gu.value + gu.error_bound - gl > 0.0);
    }
}

TEST_CASE("xi_star: containment, limit-system residual, budget exhaustion") {
    XiStarResult star = xi_star(kRef, 1e-6, 20);
    SolveResult lo = solve_lower(kRef, star.n_used);
    SolveResult up = solve_upper(kRef, star.n_used);
    for (int i = 0; i < 20; ++i) {
        CHECK(star.xi.values[i] < lo.xi.values[i]);
        CHECK(star.xi.values[i] > up.xi.values[i]);
        CHECK(star.widths[i] < 1e-6);
    }
    CHECK(star.elementwise_error <= 5e-7);
    // interior equations of the limit system hold to an eps-scaled residual
    CHECK(kkt_residual_limit(star.xi.values, kRef) < 1e-6);
    // sum xi* approaches B as the reported horizon grows
    XiStarResult big = xi_star(kRef, 1e-7, 60);
    CHECK(seq_sum(big.xi.values) > 0.99 * kRef.battery_capacity);
    CHECK(seq_sum(big.xi.values) < kRef.battery_capacity);
}

TEST_CASE("throughput_inf: consistency with the sandwich and p->1 limit") {
    XiStarResult star = xi_star(kRef, 1e-8, 40);
    ThroughputEstimate g = throughput_inf(star.xi.values, kRef, star.elementwise_error);
    for (int n : {1, 4, 12, 25}) {
        SolveResult lo = solve_lower(kRef, n);
        SolveResult up = solve_upper(kRef, n);
        const double gl = throughput_lower_n(lo.xi.values, kRef).value;
        ThroughputEstimate gu = throughput_upper_n(up.xi.values, kRef);
        CHECK(g.value + g.error_bound >= gl);
        CHECK(g.value - g.error_bound <= gu.value + gu.error_bound);
    }
    SystemParams pr = kRef;
    pr.arrival_prob = 1.0 - 1e-9;
    ThroughputEstimate gs = gamma_star(pr, 1e-9);
    CHECK(gs.value == doctest::Approx(reward(100.0, 0.5)).epsilon(1e-7));
}

TEST_CASE("offline_throughput matches the direct partial sum") {
    // sum_{k<=2000} p^2 (1-p)^{k-1} k R(B/k), evaluated directly
    double expect = 0.0, wgt = 0.09;
    for (int k = 1; k <= 2000; ++k) {
        expect += wgt * k * reward(100.0 / k, 0.5);
        wgt *= 0.7;
    }
    ThroughputEstimate off = offline_throughput(kRef);
    CHECK(off.value == doctest::Approx(expect).epsilon(1e-12));
    CHECK(off.error_bound < 1e-12 * off.value);

    SystemParams pr = kRef;
    pr.arrival_prob = 1.0 - 1e-9;
    CHECK(offline_throughput(pr).value == doctest::Approx(reward(100.0, 0.5)).epsilon(1e-7));

    // dominance over the lookahead optimum for every tested window
    double prev_gamma = 0.0;
    for (int w = 1; w <= 10; ++w) {
        SystemParams pw = kRef;
        pw.window = w;
        const double gw = gamma_star(pw, 1e-8).value;
        CHECK(off.value >= gw);
        CHECK(gw > prev_gamma);
        prev_gamma = gw;
    }
}

TEST_CASE("online w0 ladder matches the projected-gradient maximizer") {
    SystemParams pr = kRef;
    pr.window = 0;
    SolveResult r = solve_online_w0(pr);
    const int m = static_cast<int>(r.xi.values.size());
    const double p = pr.arrival_prob, q = 1.0 - p, g = pr.channel_gain;
    // maximize sum_k p q^{k-1} R(xi_k) over 20 >= M slots
    const int n = 20;
    auto objective = [&](std::span<const double> x) {
        double s = 0.0, wgt = p;
        for (double v : x) {
            s += wgt * reward(v, g);
            wgt *= q;
        }
        return s;
    };
    auto gradient = [&](std::span<const double> x) {
        std::vector<double> gr(x.size());
        double wgt = p;
        for (std::size_t i = 0; i < x.size(); ++i) {
            gr[i] = wgt * reward_deriv(x[i], g);
            wgt *= q;
        }
        return gr;
    };
    std::vector<double> pg =
        oracle::projected_gradient_max(objective, gradient, n, pr.battery_capacity);
    for (int i = 0; i < n; ++i) {
        const double want = i < m ? r.xi.values[i] : 0.0;
        CHECK(pg[i] == doctest::Approx(want).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("solve_online_w0: geometric ladder structure") {
    SystemParams pr = kRef;
    pr.window = 0;
    SolveResult r = solve_online_w0(pr);
    const auto& xs = r.xi.values;
    const double q = 0.7, g = 0.5;
    REQUIRE(xs.size() >= 2);
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        CHECK(reward_deriv(xs[i], g) / reward_deriv(xs[i + 1], g) ==
              doctest::Approx(q).epsilon(1e-9));
    CHECK(seq_sum(xs) == doctest::Approx(100.0).epsilon(1e-9));
    CHECK(reward_deriv(xs.back(), g) >= q * reward_deriv(0.0, g) - 1e-12);
    CHECK(kkt_residual_online_w0(xs, pr) < 1e-9);

    // optimality: beats random feasible ladders under the online objective
    const double p = 0.3;
    auto online_value = [&](const std::vector<double>& v) {
        double s = 0.0, wgt = p;
        for (double x : v) {
            s += wgt * reward(x, g);
            wgt *= q;
        }
        return s;
    };
    const double best = online_value(xs);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(xs.size() + trial % 5);
        double s = 0.0;
        for (double& x : v) {
            x = u(rng);
            s += x;
        }
        for (double& x : v) x *= 100.0 / s;
        CHECK(online_value(v) <= best + 1e-12);
    }
}

TEST_CASE("w0 bound forms bracket the online optimum") {
    SystemParams pr = kRef;
    pr.window = 0;
    const double g0 = gamma_star(pr).value;
    const double p = 0.3, q = 0.7;
    for (int n : {2, 5, 8, 12}) {
        W0Bounds b = w0_bound_forms(pr, n);
        CHECK(b.gamma_lower.value <= g0 + 1e-12);
        CHECK(b.gamma_upper.value + b.gamma_upper.error_bound >= g0 - 1e-12);
        const double bound = p * std::pow(q, n) * reward_deriv(0.0, 0.5) *
                             (100.0 - seq_sum(b.xi_upper.values));
        const double gap = b.gamma_upper.value + b.gamma_upper.error_bound - b.gamma_lower.value;
        CHECK(gap <= bound + 1e-12);
    }
}

TEST_CASE("solver invariants hold across parameter scales") {
    // different battery scales, gains, and arrival probabilities
    for (double B : {1.0, 100.0, 5000.0}) {
        for (double p : {0.05, 0.5, 0.9}) {
            for (double g : {0.1, 2.0}) {
                SystemParams pr{B, p, g, 3};
                for (int n : {1, 7, 24}) {
                    SolveResult lo = solve_lower(pr, n);
                    SolveResult up = solve_upper(pr, n);
                    CHECK(kkt_residual_lower(lo.xi.values, pr) < 1e-10 * std::max(1.0, B / 100.0));
                    CHECK(kkt_residual_upper(up.xi.values, pr) < 1e-10 * std::max(1.0, B / 100.0));
                    for (int i = 0; i < n; ++i) {
                        // at large p the true gap drops below double
                        // resolution, hence the slack
                        CHECK(up.xi.values[i] < lo.xi.values[i] + 1e-12 * B);
                        CHECK(up.xi.values[i] > 0.0);
                        if (i + 1 < n) CHECK(lo.xi.values[i] > lo.xi.values[i + 1]);
                    }
                    const double gl = throughput_lower_n(lo.xi.values, pr).value;
                    ThroughputEstimate gu = throughput_upper_n(up.xi.values, pr);
                    CHECK(gl <= gu.value + gu.error_bound);
                }
                // sandwich midpoint sits inside the widest bracket
                ThroughputEstimate gs = gamma_star(pr, 1e-7 * reward(B, g));
                CHECK(gs.value < offline_throughput(pr).value);
            }
        }
    }
}

TEST_CASE("solve_lower tolerance scales with the battery") {
    // default kkt tolerance is absolute; re-substitution stays tiny even at
    // B = 5000 where the equations carry larger magnitudes
    SystemParams pr{5000.0, 0.3, 0.5, 4};
    SolveResult lo = solve_lower(pr, 30, 1e-8);
    CHECK(kkt_residual_lower(lo.xi.values, pr) < 1e-10);
}

TEST_CASE("solver input validation") {
    CHECK_THROWS_AS(solve_lower(SystemParams{100.0, 0.3, 0.5, 0}, 5), std::invalid_argument);
    CHECK_THROWS_AS(solve_lower(kRef, 0), std::invalid_argument);
    CHECK_THROWS_AS(solve_lower(kRef, 5, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(solve_online_w0(kRef, -1.0), std::invalid_argument);
    SystemParams bad = kRef;
    bad.arrival_prob = 1e-13;
    CHECK_THROWS_AS(solve_lower(bad, 5), std::invalid_argument);
}
