#pragma once

// Sampled driving function U_t = sqrt(kappa) B_t on a uniform capacity-time
// grid. The stored values are the running sums of the Gaussian step draws
// scaled by sqrt(kappa * dt), so a path is fully determined by
// (kappa, T, n_steps, seed, trace index).

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "slereg/exponents.hpp"
#include "slereg/rng.hpp"

namespace slereg {

struct DrivingPath {
    double kappa = 0.0;  // 0 marks the deliberate zero-driving oracle path
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t trace_index = 0;
    std::vector<double> values;  // U_{t_k}, k = 0..n_steps; values[0] = 0

    std::size_t n_steps() const { return values.size() - 1; }
    double total_time() const { return dt * static_cast<double>(n_steps()); }

    // Brownian scaling: space by lambda, time by lambda^2
    DrivingPath scaled(double lambda) const {
        DrivingPath out = *this;
        out.dt = dt * lambda * lambda;
        for (double& u : out.values) u *= lambda;
        return out;
    }
};

inline DrivingPath sample_driving(Kappa kappa, double T, std::size_t n_steps,
                                  std::uint64_t seed, std::uint64_t trace_index = 0) {
    if (!(T > 0.0)) throw std::invalid_argument("driving horizon T must be positive");
    if (n_steps < 1) throw std::invalid_argument("need at least one driving step");

    DrivingPath d;
    d.kappa = kappa.value;
    d.dt = T / static_cast<double>(n_steps);
    d.seed = seed;
    d.trace_index = trace_index;
    d.values.resize(n_steps + 1);
    d.values[0] = 0.0;

    Philox gen(seed, trace_index);
    const double scale = std::sqrt(kappa.value * d.dt);
    double u = 0.0;
    for (std::size_t k = 1; k <= n_steps; ++k) {
        u += scale * gen.next_gaussian();
        d.values[k] = u;
    }
    return d;
}

// deliberate kappa -> 0 path used by the analytic oracles
inline DrivingPath zero_driving(double T, std::size_t n_steps) {
    if (!(T > 0.0)) throw std::invalid_argument("driving horizon T must be positive");
    if (n_steps < 1) throw std::invalid_argument("need at least one driving step");
    DrivingPath d;
    d.kappa = 0.0;
    d.dt = T / static_cast<double>(n_steps);
    d.values.assign(n_steps + 1, 0.0);
    return d;
}

}  // namespace slereg
