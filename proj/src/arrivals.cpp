#include "ehpc/arrivals.hpp"

#include <algorithm>
#include <cmath>

namespace ehpc {

void ArrivalModel::validate() const {
    switch (kind) {
    case ArrivalKind::Bernoulli:
        if (!(bernoulli_p > 0.0) || !(bernoulli_p < 1.0))
            throw std::invalid_argument("bernoulli_p must lie in (0,1)");
        break;
    case ArrivalKind::Uniform:
        if (!(uniform_max > 0.0)) throw std::invalid_argument("uniform_max must be positive");
        break;
    case ArrivalKind::Exponential:
        if (!(exp_mean > 0.0)) throw std::invalid_argument("exp_mean must be positive");
        break;
    case ArrivalKind::Custom: {
        if (atoms.empty()) throw std::invalid_argument("custom model needs at least one atom");
        double wsum = 0.0;
        for (auto& [v, w] : atoms) {
            if (!(v >= 0.0)) throw std::invalid_argument("custom atom value must be nonnegative");
            if (!(w >= 0.0)) throw std::invalid_argument("custom atom weight must be nonnegative");
            wsum += w;
        }
        if (!(wsum > 0.0)) throw std::invalid_argument("custom atom weights sum to zero");
        break;
    }
    }
}

ArrivalModel bernoulli_arrivals(double p) {
    ArrivalModel m;
    m.kind = ArrivalKind::Bernoulli;
    m.bernoulli_p = p;
    m.validate();
    return m;
}

ArrivalModel uniform_arrivals(double max_value) {
    ArrivalModel m;
    m.kind = ArrivalKind::Uniform;
    m.uniform_max = max_value;
    m.validate();
    return m;
}

ArrivalModel exponential_arrivals(double mean) {
    ArrivalModel m;
    m.kind = ArrivalKind::Exponential;
    m.exp_mean = mean;
    m.validate();
    return m;
}

ArrivalModel custom_arrivals(std::vector<std::pair<double, double>> atoms) {
    ArrivalModel m;
    m.kind = ArrivalKind::Custom;
    m.atoms = std::move(atoms);
    m.validate();
    return m;
}

double sample_arrival(const ArrivalModel& model, double capacity, RunRng& rng) {
    double e = 0.0;
    switch (model.kind) {
    case ArrivalKind::Bernoulli:
        e = rng.next_unit() < model.bernoulli_p ? capacity : 0.0;
        break;
    case ArrivalKind::Uniform:
        e = rng.next_unit() * model.uniform_max;
        break;
    case ArrivalKind::Exponential:
        e = -model.exp_mean * std::log1p(-rng.next_unit());
        break;
    case ArrivalKind::Custom: {
        double wsum = 0.0;
        for (auto& [v, w] : model.atoms) wsum += w;
        double u = rng.next_unit() * wsum;
        e = model.atoms.back().first;
        for (auto& [v, w] : model.atoms) {
            if (u < w) { e = v; break; }
            u -= w;
        }
        break;
    }
    }
    return std::min(e, capacity);
}

double mcr(const ArrivalModel& model, double capacity) {
    model.validate();
    if (!(capacity > 0.0)) throw std::invalid_argument("capacity must be positive");
    double mean = 0.0;
    switch (model.kind) {
    case ArrivalKind::Bernoulli:
        mean = model.bernoulli_p * capacity;
        break;
    case ArrivalKind::Uniform: {
        const double c = model.uniform_max;
        // E[min(E,B)] = c/2 when c <= B, else B - B^2/(2c)
        mean = c <= capacity ? 0.5 * c : capacity - capacity * capacity / (2.0 * c);
        break;
    }
    case ArrivalKind::Exponential:
        mean = model.exp_mean * (1.0 - std::exp(-capacity / model.exp_mean));
        break;
    case ArrivalKind::Custom: {
        double wsum = 0.0;
        for (auto& [v, w] : model.atoms) {
            mean += w * std::min(v, capacity);
            wsum += w;
        }
        mean /= wsum;
        break;
    }
    }
    if (!(mean > 0.0)) throw std::domain_error("mcr: arrival model has zero clipped mean");
    const double r = mean / capacity;
    return std::clamp(r, 1e-12, 1.0 - 1e-12);
}

} // namespace ehpc
