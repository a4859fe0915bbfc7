#pragma once

// Zipper discretization of the chordal Loewner flow. Over one step of
// length dt with the driving frozen at its left-endpoint value u, the
// flow is solved exactly by the vertical-slit map pair
//
//   forward:  z  ->  u + sqrt((z - u)^2 + 4 dt)
//   inverse:  w  ->  u + sqrt((w - u)^2 - 4 dt),
//
// both taken with the square-root branch mapping the upper half-plane
// into itself. The trace is evaluated as gamma(t_k) ~ fhat_{t_k}(i y)
// by composing the k inverse maps in reverse order, and |fhat'| by the
// chain rule along the same orbit (never by finite differences).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "slereg/driving.hpp"

#if defined(__GNUC__) || defined(__clang__)
#define SLEREG_RESTRICT __restrict__
#else
#define SLEREG_RESTRICT
#endif

namespace slereg {

struct FlowDiagnostics {
    std::size_t branch_clamps = 0;   // Im < 0 after a step (clamped to 0)
    std::size_t near_tip_flags = 0;  // sqrt argument within 1e-14 of the tip

    void merge(const FlowDiagnostics& other) {
        branch_clamps += other.branch_clamps;
        near_tip_flags += other.near_tip_flags;
    }
};

namespace detail {

constexpr double kNearTipTol = 1e-14;

// w -> u + sqrt((w-u)^2 +/- 4dt) with Im(result) >= 0; the real part of
// the root keeps the sign of Re(w - u), which is the branch continuity
// rule across steps on the upper half-plane. Division-free so the batched
// sweep below vectorizes; the max(..., 0) guards absorb rounding when the
// root collapses onto an axis.
struct StepState {
    double x;
    double y;
    double log_deriv = 0.0;
    bool near_tip = false;
    std::size_t clamps = 0;  // kept for diagnostics; zero by construction
};

inline void slit_step(StepState& st, double u, double four_dt_signed, bool want_deriv) {
    const double s = st.x - u;
    const double a = s * s - st.y * st.y + four_dt_signed;
    const double b = 2.0 * s * st.y;
    const double mag = std::sqrt(a * a + b * b);

    if (mag < kNearTipTol) st.near_tip = true;
    if (want_deriv) st.log_deriv += 0.5 * std::log((s * s + st.y * st.y) / mag);

    st.x = u + std::copysign(std::sqrt(std::max(0.5 * (mag + a), 0.0)), s);
    st.y = std::sqrt(std::max(0.5 * (mag - a), 0.0));
}

}  // namespace detail

// f_{t_k}(w): inverse flow composed over the first k steps
inline std::complex<double> inverse_flow(const DrivingPath& d, std::size_t k,
                                         std::complex<double> w,
                                         FlowDiagnostics* diag = nullptr) {
    if (k > d.n_steps()) throw std::out_of_range("time index beyond driving grid");
    detail::StepState st{w.real(), w.imag()};
    const double four_dt = -4.0 * d.dt;
    for (std::size_t j = k; j-- > 0;) detail::slit_step(st, d.values[j], four_dt, false);
    if (diag) {
        diag->branch_clamps += st.clamps;
        diag->near_tip_flags += st.near_tip ? 1 : 0;
    }
    return {st.x, st.y};
}

// g_{t_k}(z): forward flow composed over the first k steps
inline std::complex<double> forward_flow(const DrivingPath& d, std::size_t k,
                                         std::complex<double> z,
                                         FlowDiagnostics* diag = nullptr) {
    if (k > d.n_steps()) throw std::out_of_range("time index beyond driving grid");
    detail::StepState st{z.real(), z.imag()};
    const double four_dt = 4.0 * d.dt;
    for (std::size_t j = 0; j < k; ++j) detail::slit_step(st, d.values[j], four_dt, false);
    if (diag) {
        diag->branch_clamps += st.clamps;
        diag->near_tip_flags += st.near_tip ? 1 : 0;
    }
    return {st.x, st.y};
}

// fhat_t(i y) = f_t(i y + U_t)
inline std::complex<double> fhat_eval(const DrivingPath& d, std::size_t t_index, double y,
                                      FlowDiagnostics* diag = nullptr) {
    if (!(y > 0.0)) throw std::invalid_argument("evaluation height y must be positive");
    return inverse_flow(d, t_index, {d.values[t_index], y}, diag);
}

struct DerivativeSample {
    double log_abs;    // log |f'| at the requested point
    bool flagged;      // orbit passed within 1e-14 of a slit tip
};

// log |f_{t_k}'(w)| by the chain rule: the product of the elementary-map
// derivatives (w-u)/sqrt((w-u)^2 - 4dt) along the reverse orbit,
// accumulated in log space.
inline DerivativeSample inverse_flow_log_derivative(const DrivingPath& d, std::size_t k,
                                                    std::complex<double> w,
                                                    FlowDiagnostics* diag = nullptr) {
    if (k > d.n_steps()) throw std::out_of_range("time index beyond driving grid");
    detail::StepState st{w.real(), w.imag()};
    const double four_dt = -4.0 * d.dt;
    for (std::size_t j = k; j-- > 0;) detail::slit_step(st, d.values[j], four_dt, true);
    if (diag) {
        diag->branch_clamps += st.clamps;
        diag->near_tip_flags += st.near_tip ? 1 : 0;
    }
    return DerivativeSample{st.log_deriv, st.near_tip};
}

// log |fhat'_t(i y)| = log |f_t'(i y + U_t)|
inline DerivativeSample fhat_log_derivative(const DrivingPath& d, std::size_t t_index,
                                            double y, FlowDiagnostics* diag = nullptr) {
    if (!(y > 0.0)) throw std::invalid_argument("evaluation height y must be positive");
    if (t_index > d.n_steps()) throw std::out_of_range("time index beyond driving grid");
    return inverse_flow_log_derivative(d, t_index, {d.values[t_index], y}, diag);
}

inline double fhat_derivative(const DrivingPath& d, std::size_t t_index, double y,
                              FlowDiagnostics* diag = nullptr) {
    return std::exp(fhat_log_derivative(d, t_index, y, diag).log_abs);
}

struct TracePath {
    double kappa = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    double y_eval = 0.0;
    std::vector<double> times;
    std::vector<std::complex<double>> points;
    FlowDiagnostics diagnostics;
};

// gamma at selected grid indices; cost is O(sum of the indices). All
// orbits share the reverse sweep over the driving values: at step j every
// evaluation with index > j is live, so the inner loop runs over a flat
// state array and vectorizes.
inline TracePath trace_at_indices(const DrivingPath& d, std::span<const std::size_t> indices,
                                  double y_eval) {
    if (!(y_eval > 0.0)) throw std::invalid_argument("evaluation height y must be positive");
    TracePath tr;
    tr.kappa = d.kappa;
    tr.dt = d.dt;
    tr.seed = d.seed;
    tr.y_eval = y_eval;
    tr.times.resize(indices.size());
    tr.points.resize(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] > d.n_steps()) throw std::out_of_range("time index beyond driving grid");
        tr.times[i] = d.dt * static_cast<double>(indices[i]);
    }

    std::vector<std::size_t> order(indices.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return indices[a] > indices[b]; });

    std::vector<double> xs(indices.size()), ys(indices.size()), min_mag(indices.size());
    const double* u = d.values.data();
    const double four_dt = 4.0 * d.dt;
    std::size_t active = 0;
    std::size_t next = 0;
    std::size_t j = indices.empty() ? 0 : indices[order[0]];
    while (j-- > 0) {
        while (next < order.size() && indices[order[next]] == j + 1) {
            xs[active] = u[j + 1];
            ys[active] = y_eval;
            min_mag[active] = std::numeric_limits<double>::infinity();
            ++active;
            ++next;
        }
        const double uj = u[j];
        double* SLEREG_RESTRICT px = xs.data();
        double* SLEREG_RESTRICT py = ys.data();
        double* SLEREG_RESTRICT pm = min_mag.data();
        for (std::size_t i = 0; i < active; ++i) {
            const double s = px[i] - uj;
            const double yy = py[i];
            const double a = s * s - yy * yy - four_dt;
            const double b = 2.0 * s * yy;
            const double mag = std::sqrt(a * a + b * b);
            pm[i] = std::min(pm[i], mag);
            px[i] = uj + std::copysign(std::sqrt(std::max(0.5 * (mag + a), 0.0)), s);
            py[i] = std::sqrt(std::max(0.5 * (mag - a), 0.0));
        }
    }

    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const std::size_t i = order[pos];
        if (indices[i] == 0) {
            tr.points[i] = {u[0], y_eval};  // identity map
            continue;
        }
        // states were activated in 'order' sequence
        const std::size_t slot = pos;
        tr.points[i] = {xs[slot], ys[slot]};
        if (min_mag[slot] < detail::kNearTipTol) ++tr.diagnostics.near_tip_flags;
    }
    return tr;
}

// full trace on the driving grid; default height y = sqrt(dt)
inline TracePath trace_from_driving(const DrivingPath& d, double y_eval = 0.0) {
    if (y_eval == 0.0) y_eval = std::sqrt(d.dt);
    std::vector<std::size_t> idx(d.n_steps() + 1);
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    return trace_at_indices(d, idx, y_eval);
}

// gamma at every multiple of stride on the grid (plus the endpoint)
inline TracePath trace_with_stride(const DrivingPath& d, std::size_t stride, double y_eval = 0.0) {
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    if (y_eval == 0.0) y_eval = std::sqrt(d.dt);
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k <= d.n_steps(); k += stride) idx.push_back(k);
    if (idx.back() != d.n_steps()) idx.push_back(d.n_steps());
    return trace_at_indices(d, idx, y_eval);
}

}  // namespace slereg
