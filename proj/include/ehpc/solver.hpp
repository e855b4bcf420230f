// Certified computation of the optimal expenditure sequences and the
// maximum average throughput for Bernoulli arrivals.
//
// For w >= 1, the N-horizon lower/upper sequences are the unique solutions
// of a tridiagonal-structured stationarity system: a marginal-rate recursion
// coupling consecutive entries plus a terminal condition (uniform-stage
// matching for the lower problem, a geometric genie average for the upper).
// They bracket the limit sequence elementwise and their induced throughputs
// bracket the maximum average throughput with a gap that vanishes
// geometrically in N.
#pragma once

#include <span>
#include <vector>

#include "ehpc/core.hpp"

namespace ehpc {

enum class XiKind { LowerBound, UpperBound, Limit };

// A finite expenditure sequence together with its defining-system residual.
struct XiSequence {
    std::vector<double> values;
    XiKind kind = XiKind::Limit;
    double kkt_residual = 0.0;
    SystemParams params;
};

struct SolverDiagnostics {
    int bisection_iters = 0;
    double bracket_lo = 0.0;     // bracket endpoints mapped to xi_1
    double bracket_hi = 0.0;
    double terminal_residual = 0.0;
    double truncation_error = 0.0;
};

struct SolveResult {
    XiSequence xi;
    SolverDiagnostics diag;
};

enum class ThroughputMethod { AnalyticLower, AnalyticUpper, AnalyticLimit, ValueIteration, MonteCarlo };

struct ThroughputEstimate {
    double value = 0.0;
    ThroughputMethod method = ThroughputMethod::AnalyticLimit;
    double error_bound = 0.0;    // truncation bound for analytic methods, confidence half-width for MC
};

constexpr double kDefaultKktTol = 1e-10;

// N-horizon lower sequence (w >= 1): positive, strictly decreasing, and
// xi_i < (B - sum_{j<=i} xi_j)/w for i < N with equality at i = N.
SolveResult solve_lower(const SystemParams& params, int n, double tol = kDefaultKktTol);

// N-horizon upper (genie) sequence (w >= 1): positive, strictly decreasing,
// strict headroom at every index including N.
SolveResult solve_upper(const SystemParams& params, int n, double tol = kDefaultKktTol);

// Online (w = 0) optimal sequence: finite geometric ladder of some length M
// with R'(xi_i) = (1-p) R'(xi_{i+1}), terminal slack at M, and sum = B.
SolveResult solve_online_w0(const SystemParams& params, double tol = kDefaultKktTol);

// Degenerate w = 0 bound forms. For N >= M the upper program's budget
// constraint binds and both sequences coincide with the online ladder.
struct W0Bounds {
    XiSequence xi_lower;
    XiSequence xi_upper;
    ThroughputEstimate gamma_lower;
    ThroughputEstimate gamma_upper;
};
W0Bounds w0_bound_forms(const SystemParams& params, int n, double tol = kDefaultKktTol);

// Limit sequence via the elementwise sandwich: grows N until
// max_i (lower_i - upper_i) < eps over the reported prefix, then returns the
// midpoint. widths[i] is the sandwich width at index i.
struct XiStarResult {
    XiSequence xi;                // kind = Limit
    std::vector<double> widths;
    double elementwise_error = 0.0; // certified: eps/2
    int n_used = 0;
};
XiStarResult xi_star(const SystemParams& params, double eps = -1.0, int n_report = 0, int n_cap = 600);

// First entry of the limit sequence, certified within eps. Used for the
// battery-indexed policy tables where only xi*_1 is needed. n_hint, when
// given, seeds and receives the horizon that met the tolerance so sweeps
// over nearby parameters can warm-start.
double xi_star_first(const SystemParams& params, double eps, int n_cap = 2000,
                     int* n_hint = nullptr);

// Exact finite evaluation of the N-horizon truncated throughput.
ThroughputEstimate throughput_lower_n(std::span<const double> xi, const SystemParams& params);

// Genie-aided N-horizon throughput; the infinite tail is truncated with a
// certified geometric bound recorded in error_bound.
ThroughputEstimate throughput_upper_n(std::span<const double> xi, const SystemParams& params);

// Average throughput of the limit policy from a certified prefix of xi*.
// error_bound covers the series tail beyond the prefix plus the propagated
// elementwise error of the prefix itself.
ThroughputEstimate throughput_inf(std::span<const double> xi_prefix, const SystemParams& params,
                                  double elementwise_error = 0.0);

// w = infinity reference: sum_k p^2 (1-p)^{k-1} k R(B/k).
ThroughputEstimate offline_throughput(const SystemParams& params);

// Certified two-sided interval for the maximum average throughput at the
// given parameters (w >= 1), grown in N until upper - lower < width_tol.
struct GammaInterval {
    double lower = 0.0;
    double upper = 0.0;
    int n_used = 0;
};
GammaInterval gamma_star_interval(const SystemParams& params, double width_tol, int n_cap = 600);

// Maximum average throughput for any w >= 0 (w = 0 routes to the online
// ladder, w >= 1 to the sandwich midpoint).
ThroughputEstimate gamma_star(const SystemParams& params, double width_tol = 1e-9);

// Max-norm residual of a sequence re-substituted into its defining system.
// Exposed so callers can re-verify solver output independently.
double kkt_residual_lower(std::span<const double> xi, const SystemParams& params);
double kkt_residual_upper(std::span<const double> xi, const SystemParams& params);
double kkt_residual_online_w0(std::span<const double> xi, const SystemParams& params);
// Interior-equation residual of a prefix of the limit system (no terminal).
double kkt_residual_limit(std::span<const double> xi, const SystemParams& params);

} // namespace ehpc
