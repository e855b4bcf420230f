#include "ehpc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace ehpc {

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kTailRel = 1e-16;   // relative stop for geometric tails
constexpr long kTailCap = 4'000'000; // hard cap on tail terms

double reward_deriv2(double a, double gain) {
    const double d = 1.0 + gain * a;
    return -gain * gain / (2.0 * kLn2 * d * d);
}

// sum_{k=max(w,1)}^inf p (1-p)^{k-w} R'(T/k), the genie terminal average.
// The k = 0 term of the w = 0 case is identically zero and is skipped.
double genie_rate_sum(double t, const SystemParams& pr, double* trunc_bound = nullptr) {
    const double p = pr.arrival_prob, q = 1.0 - p, g = pr.channel_gain;
    const int k0 = std::max(pr.window, 1);
    double wgt = p * std::pow(q, k0 - pr.window);
    double s = 0.0, tail = 0.0;
    const double rp0 = reward_deriv(0.0, g);
    long k = k0;
    for (;;) {
        s += wgt * reward_deriv(t / static_cast<double>(k), g);
        tail = wgt * q / p * rp0;
        if (tail < kTailRel * s || k >= kTailCap) break;
        wgt *= q;
        ++k;
    }
    if (trunc_bound) *trunc_bound = tail;
    return s;
}

// d/dT of genie_rate_sum.
double genie_rate_sum_deriv(double t, const SystemParams& pr) {
    const double p = pr.arrival_prob, q = 1.0 - p, g = pr.channel_gain;
    const int k0 = std::max(pr.window, 1);
    double wgt = p * std::pow(q, k0 - pr.window);
    double s = 0.0;
    const double scale = std::abs(reward_deriv2(0.0, g));
    long k = k0;
    for (;;) {
        const double kk = static_cast<double>(k);
        s += wgt * reward_deriv2(t / kk, g) / kk;
        if (wgt * q / p * scale < kTailRel * std::abs(s) || k >= kTailCap) break;
        wgt *= q;
        ++k;
    }
    return s;
}

// Backward evaluation of the stationarity chain in tail variables:
// given the unspent tail T = B - sum(xi), the terminal condition yields
// xi_N, and each interior equation is solved backward for xi_i. The tail
// accumulators t_i = T + sum_{j>i} xi_j are sums of positives, so no
// precision is lost where the entries are small. Residual is
// (T + sum(xi)) - B, strictly increasing in T.
struct Chain {
    std::vector<double> xi; // xi[0..n-1] = xi_1..xi_N
    double residual = 0.0;
};

Chain eval_chain(double t_tail, const SystemParams& pr, int n, bool upper) {
    const double B = pr.battery_capacity, p = pr.arrival_prob, q = 1.0 - p, g = pr.channel_gain;
    const int w = pr.window;
    Chain c;
    c.xi.assign(n, 0.0);
    double xin;
    if (upper) {
        const double y = std::min(genie_rate_sum(t_tail, pr), reward_deriv(0.0, g));
        xin = reward_deriv_inv(y, g);
    } else {
        xin = t_tail / w;
    }
    c.xi[n - 1] = xin;
    double tail = t_tail;
    for (int i = n - 2; i >= 0; --i) {
        tail += c.xi[i + 1];
        const double head = (w >= 1) ? reward_deriv(tail / w, g) : 0.0;
        const double rhs = p * head + q * reward_deriv(c.xi[i + 1], g);
        c.xi[i] = reward_deriv_inv(std::min(rhs, reward_deriv(0.0, g)), g);
    }
    tail += c.xi[0];
    c.residual = tail - B;
    return c;
}

// Dense LU solve with partial pivoting; a is overwritten.
bool solve_dense(std::vector<std::vector<double>>& a, std::vector<double>& b) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (a[piv][col] == 0.0) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (int cc = col; cc < n; ++cc) a[r][cc] -= f * a[col][cc];
            b[r] -= f * b[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int cc = r + 1; cc < n; ++cc) s -= a[r][cc] * b[cc];
        b[r] = s / a[r][r];
    }
    return true;
}

// Newton polish of the full stationarity system in (xi_1..xi_N, T).
// Shooting alone loses accuracy at large N (the chain has an exponential
// dichotomy); two or three global Newton steps restore machine-level
// residuals regardless of N.
void newton_polish(std::vector<double>& xi, double& t_tail, const SystemParams& pr, bool upper) {
    const int n = static_cast<int>(xi.size());
    const double B = pr.battery_capacity, p = pr.arrival_prob, q = 1.0 - p, g = pr.channel_gain;
    const int w = pr.window;
    std::vector<double> f(n + 1), tails(n + 1);
    std::vector<std::vector<double>> jac;

    auto eval_f = [&](const std::vector<double>& x, double t, std::vector<double>& out) {
        // tails[i] = t + sum_{j>i} x_j (1-based i), tails[n] = t
        tails[n] = t;
        for (int i = n - 1; i >= 0; --i) tails[i] = tails[i + 1] + x[i];
        double maxabs = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            const double head = (w >= 1) ? reward_deriv(tails[i + 1] / w, g) : 0.0;
            out[i] = reward_deriv(x[i], g) - p * head - q * reward_deriv(x[i + 1], g);
            maxabs = std::max(maxabs, std::abs(out[i]));
        }
        if (upper)
            out[n - 1] = reward_deriv(x[n - 1], g) - genie_rate_sum(t, pr);
        else
            out[n - 1] = x[n - 1] - t / w;
        out[n] = tails[0] - B;
        maxabs = std::max({maxabs, std::abs(out[n - 1]), std::abs(out[n]) / B});
        return maxabs;
    };

    double best = eval_f(xi, t_tail, f);
    for (int iter = 0; iter < 6; ++iter) {
        if (best < 1e-15) break;
        jac.assign(n + 1, std::vector<double>(n + 1, 0.0));
        for (int i = 0; i + 1 < n; ++i) {
            jac[i][i] = reward_deriv2(xi[i], g);
            const double c = (w >= 1) ? -(p / w) * reward_deriv2(tails[i + 1] / w, g) : 0.0;
            jac[i][i + 1] = -q * reward_deriv2(xi[i + 1], g) + c;
            for (int j = i + 2; j < n; ++j) jac[i][j] = c;
            jac[i][n] = c;
        }
        if (upper) {
            jac[n - 1][n - 1] = reward_deriv2(xi[n - 1], g);
            jac[n - 1][n] = -genie_rate_sum_deriv(t_tail, pr);
        } else {
            jac[n - 1][n - 1] = 1.0;
            jac[n - 1][n] = -1.0 / w;
        }
        for (int j = 0; j <= n; ++j) jac[n][j] = 1.0;

        std::vector<double> rhs(n + 1);
        for (int i = 0; i <= n; ++i) rhs[i] = -f[i];
        if (!solve_dense(jac, rhs)) break;

        // damped update keeping the iterate strictly feasible
        double step = 1.0;
        std::vector<double> cand(n);
        double tcand = 0.0, cur = best;
        for (int h = 0; h < 30; ++h) {
            bool ok = true;
            for (int i = 0; i < n; ++i) {
                cand[i] = xi[i] + step * rhs[i];
                if (!(cand[i] > 0.0)) { ok = false; break; }
            }
            tcand = t_tail + step * rhs[n];
            if (ok && tcand > 0.0) {
                cur = eval_f(cand, tcand, f);
                if (cur < best || h == 29) break;
            }
            step *= 0.5;
        }
        if (cur >= best) { eval_f(xi, t_tail, f); break; }
        xi = cand;
        t_tail = tcand;
        best = cur;
    }
}

SolveResult solve_horizon(const SystemParams& pr, int n, double tol, bool upper) {
    pr.validate();
    if (pr.window < 1) throw std::invalid_argument("solver requires window >= 1 (use solve_online_w0)");
    if (n < 1) throw std::invalid_argument("horizon must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");

    const double B = pr.battery_capacity;
    SolverDiagnostics diag;

    // r(T) = (T + sum xi(T)) - B is strictly increasing with r(0+) = -B < 0;
    // validate the upper end of the bracket before bisecting.
    double lo = 0.0, hi = B;
    Chain chi = eval_chain(hi, pr, n, upper);
    if (!(chi.residual > 0.0))
        throw SolverError("solver bracket invalid at T = B (residual not positive)");
    Chain clo; // residual at lo=0 is -B by construction
    for (int it = 0; it < 140; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        Chain cm = eval_chain(mid, pr, n, upper);
        if (cm.residual < 0.0) { lo = mid; clo = std::move(cm); }
        else { hi = mid; chi = std::move(cm); }
        ++diag.bisection_iters;
    }
    diag.bracket_lo = clo.xi.empty() ? 0.0 : clo.xi.front();
    diag.bracket_hi = chi.xi.front();

    double t_tail = hi;
    std::vector<double> xi = chi.xi;
    if (!clo.xi.empty() && std::abs(clo.residual) < std::abs(chi.residual)) {
        t_tail = lo;
        xi = clo.xi;
    }
    newton_polish(xi, t_tail, pr, upper);

    SolveResult res;
    res.xi.values = std::move(xi);
    res.xi.kind = upper ? XiKind::UpperBound : XiKind::LowerBound;
    res.xi.params = pr;
    res.xi.kkt_residual =
        upper ? kkt_residual_upper(res.xi.values, pr) : kkt_residual_lower(res.xi.values, pr);
    diag.terminal_residual = res.xi.kkt_residual;
    if (upper) genie_rate_sum(t_tail, pr, &diag.truncation_error);
    res.diag = diag;
    if (res.xi.kkt_residual > tol) {
        std::ostringstream os;
        os << "solver did not reach tol: residual " << res.xi.kkt_residual << " > " << tol
           << " (N=" << n << ", w=" << pr.window << ", iters=" << diag.bisection_iters << ")";
        throw SolverError(os.str());
    }
    return res;
}

// Geometric ladder for w = 0: R'(xi_i) = theta / q^{i-1} while that stays
// within (0, R'(0)], truncated at `cap` entries.
std::vector<double> w0_ladder(double theta, const SystemParams& pr, long cap) {
    const double q = 1.0 - pr.arrival_prob, g = pr.channel_gain;
    const double rp0 = reward_deriv(0.0, g);
    std::vector<double> xs;
    double y = theta;
    while (static_cast<long>(xs.size()) < cap && y <= rp0) {
        xs.push_back(reward_deriv_inv(y, g));
        y /= q;
    }
    return xs;
}

double ladder_sum(double theta, const SystemParams& pr, long cap) {
    const double q = 1.0 - pr.arrival_prob, g = pr.channel_gain;
    const double rp0 = reward_deriv(0.0, g);
    double y = theta, s = 0.0;
    long m = 0;
    while (m < cap && y <= rp0) {
        s += reward_deriv_inv(y, g);
        y /= q;
        ++m;
    }
    return s;
}

// Budget ladder: theta with sum(ladder) = B. Monotone bisection on theta.
double solve_budget_theta(const SystemParams& pr, long cap, int* iters = nullptr) {
    const double g = pr.channel_gain;
    double lo = 1e-300, hi = reward_deriv(0.0, g);
    int it = 0;
    for (; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (ladder_sum(mid, pr, cap) > pr.battery_capacity) lo = mid;
        else hi = mid;
    }
    if (iters) *iters = it;
    return 0.5 * (lo + hi);
}

// D(S) = sum_{k>=1} p^2 q^{k+N-1} R'((B-S)/k): marginal value of reserved
// energy under the w = 0 genie continuation.
double w0_genie_marginal(double s_total, const SystemParams& pr, int n) {
    const double B = pr.battery_capacity, p = pr.arrival_prob, q = 1.0 - p, g = pr.channel_gain;
    const double rem = std::max(B - s_total, 0.0);
    double wgt = p * p * std::pow(q, n);
    double s = 0.0;
    const double rp0 = reward_deriv(0.0, g);
    long k = 1;
    for (;;) {
        s += wgt * reward_deriv(rem / static_cast<double>(k), g);
        if (wgt * q / p * rp0 < kTailRel * s || k >= kTailCap) break;
        wgt *= q;
        ++k;
    }
    return s;
}

double series_value(std::span<const double> xi, const SystemParams& pr, bool upper,
                    double* trunc_bound);

} // namespace

SolveResult solve_lower(const SystemParams& params, int n, double tol) {
    return solve_horizon(params, n, tol, /*upper=*/false);
}

SolveResult solve_upper(const SystemParams& params, int n, double tol) {
    return solve_horizon(params, n, tol, /*upper=*/true);
}

SolveResult solve_online_w0(const SystemParams& params, double tol) {
    params.validate();
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    SystemParams pr = params;
    pr.window = 0;
    SolveResult res;
    int iters = 0;
    const double theta = solve_budget_theta(pr, std::numeric_limits<long>::max(), &iters);
    res.xi.values = w0_ladder(theta, pr, std::numeric_limits<long>::max());
    res.xi.kind = XiKind::Limit;
    res.xi.params = pr;
    res.xi.kkt_residual = kkt_residual_online_w0(res.xi.values, pr);
    res.diag.bisection_iters = iters;
    res.diag.bracket_lo = res.diag.bracket_hi = res.xi.values.front();
    res.diag.terminal_residual = res.xi.kkt_residual;
    if (res.xi.kkt_residual > tol)
        throw SolverError("solve_online_w0 did not reach tol");
    return res;
}

W0Bounds w0_bound_forms(const SystemParams& params, int n, double tol) {
    params.validate();
    if (n < 1) throw std::invalid_argument("horizon must be >= 1");
    SystemParams pr = params;
    pr.window = 0;
    W0Bounds out;

    // Lower form: budget ladder truncated at n slots.
    const double theta_budget = solve_budget_theta(pr, n);
    out.xi_lower.values = w0_ladder(theta_budget, pr, n);
    out.xi_lower.kind = XiKind::LowerBound;
    out.xi_lower.params = pr;

    // Upper form: interior stationarity p*theta = D(S(theta)) if the root
    // keeps S < B, otherwise the budget constraint binds and the maximizer
    // is the budget ladder itself.
    const double f_at_budget =
        pr.arrival_prob * theta_budget - w0_genie_marginal(ladder_sum(theta_budget, pr, n), pr, n);
    if (f_at_budget >= 0.0) {
        out.xi_upper.values = out.xi_lower.values;
    } else {
        double lo = theta_budget, hi = reward_deriv(0.0, pr.channel_gain);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            const double f =
                pr.arrival_prob * mid - w0_genie_marginal(ladder_sum(mid, pr, n), pr, n);
            if (f < 0.0) lo = mid;
            else hi = mid;
        }
        out.xi_upper.values = w0_ladder(0.5 * (lo + hi), pr, n);
    }
    out.xi_upper.kind = XiKind::UpperBound;
    out.xi_upper.params = pr;

    const double q = 1.0 - pr.arrival_prob;
    auto ladder_res = [&](const std::vector<double>& xs) {
        double r = 0.0;
        for (std::size_t i = 0; i + 1 < xs.size(); ++i)
            r = std::max(r, std::abs(reward_deriv(xs[i], pr.channel_gain) -
                                     q * reward_deriv(xs[i + 1], pr.channel_gain)));
        return r;
    };
    const double sum_lower =
        std::accumulate(out.xi_lower.values.begin(), out.xi_lower.values.end(), 0.0);
    out.xi_lower.kkt_residual =
        std::max(ladder_res(out.xi_lower.values), std::abs(sum_lower - pr.battery_capacity));
    out.xi_upper.kkt_residual = ladder_res(out.xi_upper.values);
    if (out.xi_lower.kkt_residual > std::max(tol, 1e-9 * pr.battery_capacity))
        throw SolverError("w0 lower bound form did not converge");

    out.gamma_lower = throughput_lower_n(out.xi_lower.values, pr);
    out.gamma_upper = throughput_upper_n(out.xi_upper.values, pr);
    return out;
}

XiStarResult xi_star(const SystemParams& params, double eps, int n_report, int n_cap) {
    params.validate();
    if (params.window < 1) throw std::invalid_argument("xi_star requires window >= 1");
    if (eps <= 0.0) eps = 1e-8 * params.battery_capacity;

    int n = std::max(8, n_report + 4);
    XiStarResult best;
    for (;;) {
        SolveResult lo = solve_lower(params, n);
        SolveResult up = solve_upper(params, n);
        int report = n_report > 0 ? std::min(n_report, n) : 0;
        if (n_report <= 0) {
            // report every entry that is still above eps
            report = 0;
            while (report < n && lo.xi.values[report] >= eps) ++report;
            report = std::max(report, 1);
        }
        double gap = 0.0;
        for (int i = 0; i < report; ++i)
            gap = std::max(gap, lo.xi.values[i] - up.xi.values[i]);

        best.n_used = n;
        best.widths.assign(report, 0.0);
        best.xi.values.assign(report, 0.0);
        for (int i = 0; i < report; ++i) {
            best.widths[i] = lo.xi.values[i] - up.xi.values[i];
            best.xi.values[i] = 0.5 * (lo.xi.values[i] + up.xi.values[i]);
        }
        best.xi.kind = XiKind::Limit;
        best.xi.params = params;
        best.xi.kkt_residual = kkt_residual_limit(best.xi.values, params);
        best.elementwise_error = 0.5 * std::max(gap, 0.0);

        const bool report_complete = (n_report > 0) ? (n >= n_report + 4) : (report < n);
        if (gap < eps && report_complete) return best;
        if (n >= n_cap) {
            std::ostringstream os;
            os << "xi_star: horizon cap " << n_cap << " reached with gap " << gap << " > eps " << eps;
            throw SolverError(os.str());
        }
        n = std::min(n_cap, std::max(n + 4, (3 * n) / 2));
    }
}

double xi_star_first(const SystemParams& params, double eps, int n_cap, int* n_hint) {
    params.validate();
    if (params.window < 1) throw std::invalid_argument("xi_star_first requires window >= 1");
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    int n = 8;
    if (n_hint && *n_hint >= 8) n = std::min(*n_hint, n_cap);
    for (;;) {
        SolveResult lo = solve_lower(params, n);
        SolveResult up = solve_upper(params, n);
        const double gap = lo.xi.values[0] - up.xi.values[0];
        if (gap < eps) {
            if (n_hint) *n_hint = n;
            return 0.5 * (lo.xi.values[0] + up.xi.values[0]);
        }
        if (n >= n_cap)
            throw SolverError("xi_star_first: horizon cap reached before eps");
        n = std::min(n_cap, std::max(n + 8, (3 * n) / 2));
    }
}

namespace {

// Shared series evaluator for the truncated throughput functionals.
// lower: exact finite sum. upper: finite part plus the truncated genie tail
// sum_{k>=max(w,1)} p^2 q^{k+N-1} k R((B - S_N)/k).
double series_value(std::span<const double> xi, const SystemParams& pr, bool upper,
                    double* trunc_bound) {
    const double B = pr.battery_capacity, p = pr.arrival_prob, q = 1.0 - p, g = pr.channel_gain;
    const int w = pr.window;
    const int n = static_cast<int>(xi.size());
    if (n < 1) throw std::invalid_argument("throughput: empty sequence");
    double sum_xi = 0.0;
    for (double v : xi) {
        if (!(v >= 0.0)) throw std::domain_error("throughput: negative entry");
        sum_xi += v;
    }
    if (sum_xi > B * (1.0 + 1e-9)) throw std::domain_error("throughput: sum exceeds battery capacity");

    double s = 0.0;
    {
        double wgt = p * p;
        for (int k = 1; k <= w; ++k) {
            s += wgt * k * reward(B / k, g);
            wgt *= q;
        }
    }
    double running = 0.0;
    double wgt = p * std::pow(q, w);
    for (int k = 1; k <= n; ++k) {
        running += xi[k - 1];
        s += wgt * reward(xi[k - 1], g);
        if (w >= 1) {
            const double head = reward(std::max(B - running, 0.0) / w, g);
            if (k < n) s += wgt * p * w * head;
            else if (!upper) s += wgt * w * head;
        }
        wgt *= q;
    }
    if (trunc_bound) *trunc_bound = 0.0;
    if (upper) {
        const double rem = std::max(B - running, 0.0);
        const double rp0 = reward_deriv(0.0, g);
        long k = std::max(w, 1);
        double gw = p * p * std::pow(q, static_cast<double>(k + n - 1));
        double tail_bound = 0.0;
        for (;;) {
            const double kk = static_cast<double>(k);
            s += gw * kk * reward(rem / kk, g);
            tail_bound = gw * q / p * rp0 * rem; // k R(rem/k) <= R'(0) rem
            if (tail_bound < kTailRel * std::max(s, 1e-300) || k >= kTailCap) break;
            gw *= q;
            ++k;
        }
        if (trunc_bound) *trunc_bound = tail_bound;
    }
    return s;
}

} // namespace

ThroughputEstimate throughput_lower_n(std::span<const double> xi, const SystemParams& params) {
    ThroughputEstimate est;
    est.value = series_value(xi, params, /*upper=*/false, nullptr);
    est.method = ThroughputMethod::AnalyticLower;
    est.error_bound = 0.0;
    return est;
}

ThroughputEstimate throughput_upper_n(std::span<const double> xi, const SystemParams& params) {
    ThroughputEstimate est;
    double tb = 0.0;
    est.value = series_value(xi, params, /*upper=*/true, &tb);
    est.method = ThroughputMethod::AnalyticUpper;
    est.error_bound = tb;
    return est;
}

ThroughputEstimate throughput_inf(std::span<const double> xi_prefix, const SystemParams& params,
                                  double elementwise_error) {
    const double B = params.battery_capacity, p = params.arrival_prob, q = 1.0 - p,
                 g = params.channel_gain;
    const int w = params.window;
    const int j = static_cast<int>(xi_prefix.size());
    if (j < 1) throw std::invalid_argument("throughput_inf: empty prefix");

    double s = 0.0;
    {
        double wgt = p * p;
        for (int k = 1; k <= w; ++k) {
            s += wgt * k * reward(B / k, g);
            wgt *= q;
        }
    }
    double running = 0.0, wgt = p * std::pow(q, w), sens = 0.0;
    for (int k = 1; k <= j; ++k) {
        running += xi_prefix[k - 1];
        s += wgt * reward(xi_prefix[k - 1], g);
        sens += wgt * reward_deriv(xi_prefix[k - 1], g);
        if (w >= 1) {
            const double head = std::max(B - running, 0.0) / w;
            s += wgt * p * w * reward(head, g);
            sens += wgt * p * k * reward_deriv(head, g);
        }
        wgt *= q;
    }
    const double tail = std::pow(q, j + w) * (1.0 + p * w) * reward(B, g);
    ThroughputEstimate est;
    est.value = s;
    est.method = ThroughputMethod::AnalyticLimit;
    est.error_bound = tail + sens * elementwise_error;
    return est;
}

ThroughputEstimate offline_throughput(const SystemParams& params) {
    params.validate();
    const double B = params.battery_capacity, p = params.arrival_prob, q = 1.0 - p,
                 g = params.channel_gain;
    const double rp0 = reward_deriv(0.0, g);
    double wgt = p * p, s = 0.0, tail = 0.0;
    long k = 1;
    for (;;) {
        s += wgt * k * reward(B / static_cast<double>(k), g);
        tail = wgt * q / p * rp0 * B;
        if (tail < kTailRel * s || k >= kTailCap) break;
        wgt *= q;
        ++k;
    }
    ThroughputEstimate est;
    est.value = s;
    est.method = ThroughputMethod::AnalyticLimit;
    est.error_bound = tail;
    return est;
}

GammaInterval gamma_star_interval(const SystemParams& params, double width_tol, int n_cap) {
    params.validate();
    if (params.window < 1) throw std::invalid_argument("gamma_star_interval requires window >= 1");
    if (!(width_tol > 0.0)) throw std::invalid_argument("width_tol must be positive");
    int n = 4;
    GammaInterval best{0.0, std::numeric_limits<double>::infinity(), 0};
    for (;;) {
        SolveResult lo = solve_lower(params, n);
        SolveResult up = solve_upper(params, n);
        ThroughputEstimate tl = throughput_lower_n(lo.xi.values, params);
        ThroughputEstimate tu = throughput_upper_n(up.xi.values, params);
        GammaInterval iv{tl.value, tu.value + tu.error_bound, n};
        if (iv.upper - iv.lower < best.upper - best.lower) best = iv;
        if (best.upper - best.lower < width_tol) return best;
        if (n >= n_cap) {
            std::ostringstream os;
            os << "gamma_star_interval: width " << best.upper - best.lower << " > " << width_tol
               << " at horizon cap " << n_cap;
            throw SolverError(os.str());
        }
        n = std::min(n_cap, std::max(n + 4, (3 * n) / 2));
    }
}

ThroughputEstimate gamma_star(const SystemParams& params, double width_tol) {
    params.validate();
    if (params.window == 0) {
        SolveResult online = solve_online_w0(params);
        const double p = params.arrival_prob, q = 1.0 - p, g = params.channel_gain;
        double wgt = p, s = 0.0;
        for (double v : online.xi.values) {
            s += wgt * reward(v, g);
            wgt *= q;
        }
        ThroughputEstimate est;
        est.value = s;
        est.method = ThroughputMethod::AnalyticLimit;
        est.error_bound = online.xi.kkt_residual * reward_deriv(0.0, g);
        return est;
    }
    GammaInterval iv = gamma_star_interval(params, width_tol);
    ThroughputEstimate est;
    est.value = 0.5 * (iv.lower + iv.upper);
    est.method = ThroughputMethod::AnalyticLimit;
    est.error_bound = 0.5 * (iv.upper - iv.lower);
    return est;
}

double kkt_residual_lower(std::span<const double> xi, const SystemParams& params) {
    const double B = params.battery_capacity, p = params.arrival_prob, q = 1.0 - p,
                 g = params.channel_gain;
    const int w = params.window, n = static_cast<int>(xi.size());
    double s = 0.0, res = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        s += xi[i];
        res = std::max(res, std::abs(reward_deriv(xi[i], g) - p * reward_deriv((B - s) / w, g) -
                                     q * reward_deriv(xi[i + 1], g)));
    }
    s += xi[n - 1];
    res = std::max(res, std::abs(xi[n - 1] - (B - s) / w));
    return res;
}

double kkt_residual_upper(std::span<const double> xi, const SystemParams& params) {
    const double B = params.battery_capacity, p = params.arrival_prob, q = 1.0 - p,
                 g = params.channel_gain;
    const int w = params.window, n = static_cast<int>(xi.size());
    double s = 0.0, res = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        s += xi[i];
        res = std::max(res, std::abs(reward_deriv(xi[i], g) - p * reward_deriv((B - s) / w, g) -
                                     q * reward_deriv(xi[i + 1], g)));
    }
    s += xi[n - 1];
    res = std::max(res, std::abs(reward_deriv(xi[n - 1], g) -
                                 genie_rate_sum(std::max(B - s, 0.0), params)));
    return res;
}

double kkt_residual_online_w0(std::span<const double> xi, const SystemParams& params) {
    const double B = params.battery_capacity, q = 1.0 - params.arrival_prob,
                 g = params.channel_gain;
    const int n = static_cast<int>(xi.size());
    double res = 0.0, s = 0.0;
    for (int i = 0; i + 1 < n; ++i)
        res = std::max(res, std::abs(reward_deriv(xi[i], g) - q * reward_deriv(xi[i + 1], g)));
    for (double v : xi) s += v;
    res = std::max(res, std::abs(s - B));
    // terminal inequality R'(xi_M) >= q R'(0)
    res = std::max(res, std::max(0.0, q * reward_deriv(0.0, g) - reward_deriv(xi[n - 1], g)));
    return res;
}

double kkt_residual_limit(std::span<const double> xi, const SystemParams& params) {
    const double B = params.battery_capacity, p = params.arrival_prob, q = 1.0 - p,
                 g = params.channel_gain;
    const int w = params.window, n = static_cast<int>(xi.size());
    double s = 0.0, res = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        s += xi[i];
        res = std::max(res, std::abs(reward_deriv(xi[i], g) - p * reward_deriv((B - s) / w, g) -
                                     q * reward_deriv(xi[i + 1], g)));
    }
    return res;
}

} // namespace ehpc
