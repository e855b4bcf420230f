// Arrival process descriptors. Sampled energies are clipped at the battery
// capacity on ingestion; the mean-to-capacity ratio is E[min(E,B)]/B.
#pragma once

#include <vector>

#include "ehpc/core.hpp"
#include "ehpc/rng.hpp"

namespace ehpc {

enum class ArrivalKind { Bernoulli, Uniform, Exponential, Custom };

struct ArrivalModel {
    ArrivalKind kind = ArrivalKind::Bernoulli;
    double bernoulli_p = 0.3;   // Bernoulli: B with prob p, else 0
    double uniform_max = 0.0;   // Uniform on [0, uniform_max]
    double exp_mean = 0.0;      // Exponential with this mean
    // Custom: discrete atoms (value, weight); weights need not be normalized.
    std::vector<std::pair<double, double>> atoms;

    void validate() const;
};

ArrivalModel bernoulli_arrivals(double p);
ArrivalModel uniform_arrivals(double max_value);
ArrivalModel exponential_arrivals(double mean);
ArrivalModel custom_arrivals(std::vector<std::pair<double, double>> atoms);

// One arrival, clipped to [0, capacity].
double sample_arrival(const ArrivalModel& model, double capacity, RunRng& rng);

// Mean-to-capacity ratio E[min(E, capacity)] / capacity, clamped to (0, 1).
// Throws std::domain_error for a degenerate zero-mean model.
double mcr(const ArrivalModel& model, double capacity);

} // namespace ehpc
