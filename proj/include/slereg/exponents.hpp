#pragma once

// Closed-form critical exponents for the SLE_kappa trace in half-plane
// capacity parametrization: the moment exponents q(r), zeta(r), the
// admissible r-sets I, J1, J2 and their intersections, the optimal
// variation index p* = min(1 + kappa/8, 2), the optimal Hoelder exponents
// alpha*, alpha_0, and the moment order Q(p, kappa). A grid+golden-section
// optimizer provides an independent numerical route to the same optima.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "slereg/interval_union.hpp"

namespace slereg {

struct Kappa {
    double value;

    explicit Kappa(double v) : value(v) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument("kappa must be a positive finite real");
    }
};

// kappa = 8 has empty admissible sets; treated as a flag, never an error
inline bool attainable(Kappa k) { return k.value != 8.0; }

inline double q_of_r(double r, Kappa k) {
    return r * (1.0 + k.value / 4.0) - k.value * r * r / 8.0;
}

inline double zeta_of_r(double r, Kappa k) {
    return r - k.value * r * r / 8.0;
}

struct RExponentSet {
    double r;
    double q;
    double zeta;
    double kappa;
};

inline RExponentSet exponents_at(double r, Kappa k) {
    return RExponentSet{r, q_of_r(r, k), zeta_of_r(r, k), k.value};
}

inline double r_critical(Kappa k) { return 0.5 + 4.0 / k.value; }

// I = (r1-, rc), the r for which the increment moment bound is available
inline std::pair<double, double> r_one_pm(Kappa k) {
    const double disc = std::sqrt(k.value * k.value + 16.0);
    return {(4.0 + k.value - disc) / k.value, (4.0 + k.value + disc) / k.value};
}

inline IntervalUnion interval_i(Kappa k) {
    return IntervalUnion::single(r_one_pm(k).first, r_critical(k));
}

// J1 = { zeta(r) < 2 }: the whole line for kappa > 1 (zeta <= 2/kappa),
// otherwise the complement of [j1-, j1+]
inline std::pair<double, double> j_one_pm(Kappa k) {
    if (k.value > 1.0)
        return {std::numeric_limits<double>::quiet_NaN(),
                std::numeric_limits<double>::quiet_NaN()};
    const double s = std::sqrt(1.0 - k.value);
    return {4.0 / k.value * (1.0 - s), 4.0 / k.value * (1.0 + s)};
}

inline IntervalUnion interval_j1(Kappa k) {
    if (k.value > 1.0) return IntervalUnion::full_line();
    const auto [jm, jp] = j_one_pm(k);
    const double inf = std::numeric_limits<double>::infinity();
    return IntervalUnion({Interval{-inf, jm}, Interval{jp, inf}});
}

// J2 = { zeta(r) + q(r) > 2 }: open interval with endpoints 1 and 8/kappa
inline IntervalUnion interval_j2(Kappa k) {
    const double a = std::min(1.0, 8.0 / k.value);
    const double b = std::max(1.0, 8.0 / k.value);
    return IntervalUnion::single(a, b);  // empty when kappa = 8
}

// I cap J1 cap J2 via the generic set algebra
inline IntervalUnion admissible_pvar_by_intersection(Kappa k) {
    return interval_i(k).intersect(interval_j1(k)).intersect(interval_j2(k));
}

// I cap J1 cap J2, piecewise closed form
inline IntervalUnion admissible_pvar(Kappa k) {
    const double rc = r_critical(k);
    if (k.value == 8.0) return IntervalUnion::empty_set();
    if (k.value > 8.0) return IntervalUnion::single(8.0 / k.value, rc);
    if (k.value > 1.0) return IntervalUnion::single(1.0, rc);
    const auto [jm, jp] = j_one_pm(k);
    return IntervalUnion({Interval{1.0, jm}, Interval{std::min(jp, rc), rc}});
}

inline IntervalUnion admissible_besov(Kappa k) {
    return interval_i(k).intersect(interval_j1(k));
}

inline IntervalUnion admissible_hoelder(Kappa k) {
    return interval_i(k).intersect(interval_j2(k));
}

inline double p_star(Kappa k) { return std::min(1.0 + k.value / 8.0, 2.0); }

inline double hausdorff_upper(Kappa k) { return std::min(1.0 + k.value / 8.0, 2.0); }

inline double alpha_star(Kappa k) {
    return 1.0 - k.value / (24.0 + 2.0 * k.value - 8.0 * std::sqrt(k.value + 8.0));
}

inline double alpha_zero(Kappa k) { return std::min(alpha_star(k), 0.5); }

// variation-side objective 2q/(zeta+q); strictly increasing on I
inline double phi_pvar(double r, Kappa k) {
    const double q = q_of_r(r, k);
    const double z = zeta_of_r(r, k);
    if (z + q == 0.0) throw std::domain_error("phi_pvar undefined: zeta(r) + q(r) = 0");
    return 2.0 * q / (z + q);
}

// Hoelder-side objective (zeta+q-2)/(2q); maximized at r+
inline double phi_hoelder(double r, Kappa k) {
    const double q = q_of_r(r, k);
    if (q == 0.0) throw std::domain_error("phi_hoelder undefined: q(r) = 0");
    return (zeta_of_r(r, k) + q - 2.0) / (2.0 * q);
}

// stationary points of phi_hoelder: phi' >= 0 exactly on [r-, r+]
inline std::pair<double, double> r_plus_minus_hoelder(Kappa k) {
    const double s = std::sqrt(8.0 + k.value);
    return {4.0 * (-2.0 - s) / k.value, 4.0 * (-2.0 + s) / k.value};
}

namespace detail {

inline double phi_pvar_inverse(double p, Kappa k) {
    return ((8.0 + k.value) * p - (8.0 + 2.0 * k.value)) / (k.value * (p - 1.0));
}

}  // namespace detail

// Largest moment order Q such that the p-variation norm has finite
// q-moments for q < Q, for a given variation index p > p*. Zero when no
// admissible r produces the pair (p, q).
inline double moment_order_q(double p, Kappa k) {
    if (!(p > 1.0)) throw std::domain_error("moment order requires p > 1");
    const IntervalUnion set = admissible_pvar(k);
    if (set.is_empty()) return 0.0;

    const double rc = r_critical(k);
    if (p >= phi_pvar(rc, k)) return 0.0;

    // r_hat = sup{ r in the admissible set : phi_pvar(r) < p }, using that
    // phi_pvar is strictly increasing on I. On the kappa <= 1 gap
    // (phi(j1-), phi(min(j1+, rc))] this lands exactly on j1-.
    double r_hat = -std::numeric_limits<double>::infinity();
    const double r_inv = detail::phi_pvar_inverse(p, k);
    for (const Interval& c : set.components()) {
        if (phi_pvar(c.lo, k) >= p) continue;
        r_hat = std::max(r_hat, std::min(c.hi, r_inv));
    }
    if (!std::isfinite(r_hat)) return 0.0;  // p <= p*: no admissible r

    const double q_hat = q_of_r(r_hat, k);
    return q_hat > p ? q_hat : 0.0;
}

// Besov space W^{delta,q} parameters. The variation embedding needs
// delta - 1/q > 0 on top of delta in (0,1), q > 1.
struct BesovParams {
    double delta;
    double q;

    bool valid() const { return 0.0 < delta && delta < 1.0 && q > 1.0; }
    bool variation_usable() const { return valid() && delta - 1.0 / q > 0.0; }
};

enum class BesovMode { besov, pvar };

// open window of admissible Besov smoothness delta for a given r; empty
// when r sits outside the set the mode requires
struct DeltaWindow {
    double lo = 0.0;
    double hi = 0.0;
    bool empty() const { return !(lo < hi); }
};

inline DeltaWindow besov_window(double r, Kappa k, BesovMode mode) {
    const double q = q_of_r(r, k);
    const double z = zeta_of_r(r, k);
    if (q <= 0.0) return DeltaWindow{0.0, 0.0};
    const double upper = (z + q) / (2.0 * q);
    if (mode == BesovMode::besov) return DeltaWindow{0.0, upper};
    return DeltaWindow{1.0 / q, upper};
}

enum class ExponentObjective { pvar, hoelder };

struct OptimumResult {
    double r_opt;
    double value;
};

namespace detail {

template <typename F>
double golden_section(F&& f, double a, double b, double tol, bool maximize) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        const bool pick_left = maximize ? (fc > fd) : (fc < fd);
        if (pick_left) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

// Independent optimizer: coarse grid (>= 1e4 points per component) plus
// golden-section refinement to 1e-10 in r. Open endpoints are approached
// by clamping 1e-12 inside. pvar minimizes phi_pvar, hoelder maximizes
// phi_hoelder. Empty domain -> nullopt ("no admissible r").
inline std::optional<OptimumResult> optimize_exponent(Kappa k, ExponentObjective obj,
                                                      const IntervalUnion& domain) {
    if (domain.is_empty()) return std::nullopt;
    if (!domain.bounded())
        throw std::invalid_argument("optimize_exponent requires a bounded domain");

    const bool maximize = (obj == ExponentObjective::hoelder);
    const auto f = [&](double r) {
        return obj == ExponentObjective::pvar ? phi_pvar(r, k) : phi_hoelder(r, k);
    };

    constexpr double kClamp = 1e-12;
    constexpr int kGrid = 10000;
    std::optional<OptimumResult> best;
    const auto consider = [&](double r, double v) {
        if (!best || (maximize ? v > best->value : v < best->value))
            best = OptimumResult{r, v};
    };

    for (const Interval& c : domain.components()) {
        const double lo = c.lo + kClamp;
        const double hi = c.hi - kClamp;
        if (!(lo < hi)) {
            const double mid = 0.5 * (c.lo + c.hi);
            consider(mid, f(mid));
            continue;
        }
        const double h = (hi - lo) / kGrid;
        int ibest = 0;
        double vbest = f(lo);
        for (int i = 1; i <= kGrid; ++i) {
            const double v = f(lo + i * h);
            if (maximize ? v > vbest : v < vbest) {
                vbest = v;
                ibest = i;
            }
        }
        const double a = std::max(lo, lo + (ibest - 1) * h);
        const double b = std::min(hi, lo + (ibest + 1) * h);
        const double r = detail::golden_section(f, a, b, 1e-10, maximize);
        // keep the better of the refined point and the grid winner
        consider(r, f(r));
        consider(lo + ibest * h, vbest);
    }
    return best;
}

// Per-kappa admissible-set table, the data behind the region figures.
struct RegionRow {
    double kappa;
    IntervalUnion set_i;
    IntervalUnion set_i_j1;
    IntervalUnion set_i_j2;
    IntervalUnion set_i_j1_j2;
    std::optional<double> hoelder_maximizer;  // argmax of phi_hoelder over I cap J2
};

inline std::vector<RegionRow> region_scan(double kappa_lo, double kappa_hi, int steps) {
    if (!(0.0 < kappa_lo && kappa_lo < kappa_hi))
        throw std::invalid_argument("region_scan requires 0 < kappa_lo < kappa_hi");
    if (steps < 2) throw std::invalid_argument("region_scan requires steps >= 2");

    std::vector<RegionRow> rows;
    rows.reserve(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        const double kv = kappa_lo + (kappa_hi - kappa_lo) * i / (steps - 1);
        const Kappa k{kv};
        RegionRow row;
        row.kappa = kv;
        row.set_i = interval_i(k);
        row.set_i_j1 = admissible_besov(k);
        row.set_i_j2 = admissible_hoelder(k);
        row.set_i_j1_j2 = admissible_pvar(k);
        if (!row.set_i_j2.is_empty()) {
            const double rp = r_plus_minus_hoelder(k).second;
            const double lo = row.set_i_j2.inf(), hi = row.set_i_j2.sup();
            row.hoelder_maximizer = std::clamp(rp, lo + 1e-12, hi - 1e-12);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace slereg
