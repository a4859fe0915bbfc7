#pragma once

// Monte Carlo harness tying the simulator to the estimators: derivative
// moments against their s,y envelope, trace increment moments against the
// two-term envelope, empirical Besov finiteness, and the critical
// variation / Hoelder exponent estimators.
//
// The theory provides envelope shapes with unspecified constants, so every
// pass/fail criterion here is a slope or stability criterion; constants
// are fitted per table and reported. Heavy-tailed samples near a slit tip
// are excluded with their count recorded; a table whose flagged fraction
// exceeds 1% aborts instead of silently biasing the moments.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "slereg/driving.hpp"
#include "slereg/exponents.hpp"
#include "slereg/loewner.hpp"
#include "slereg/parallel.hpp"
#include "slereg/regularity.hpp"
#include "slereg/stats.hpp"

namespace slereg {

struct ExperimentConfig {
    std::string kind;  // derivative_moment | increment_moment | besov_finiteness |
                       // critical_pvar | critical_hoelder
    double kappa = 2.0;
    int n_traces = 100;
    double dt = 1.0 / 4096.0;
    std::uint64_t seed = 1;
    double r = 1.0;
    double r_tilde = 0.0;  // 0 = default midpoint (r + r_c)/2
    std::vector<std::array<double, 2>> grid;  // (s,y) or (s,t) pairs
    std::string output_path;

    // kind-specific knobs
    double delta = 0.0;
    double q = 0.0;
    double epsilon = 0.0;
    int max_level = 0;
    int grid_n = 1024;  // samples used by path-norm evaluations
    std::size_t threads = 1;

    double r_tilde_or_default() const {
        if (r_tilde != 0.0) return r_tilde;
        return 0.5 * (r + r_critical(Kappa{kappa}));
    }
};

inline double envelope_derivative_moment(double s, double y, double r, Kappa k) {
    const double z = zeta_of_r(r, k);
    if (s >= y * y) return std::pow(s, -z / 2.0) * std::pow(y, z);
    const double a_s = std::max(std::pow(s, -z / 2.0), 1.0);
    return a_s * std::pow(y, z);
}

inline double envelope_increment_moment(double s, double t, double r, double r_tilde,
                                        Kappa k) {
    const double q = q_of_r(r, k);
    const double z = zeta_of_r(r, k);
    const double qt = q_of_r(r_tilde, k);
    const double zt = zeta_of_r(r_tilde, k);
    const double theta = qt / q;
    const double a_s = std::max(std::pow(s, -z / 2.0), 1.0);
    const double first = std::pow(t - s, (q + z) / 2.0) * (a_s + std::pow(t, -z / 2.0));
    const double second =
        std::pow(t - s, 0.5 * (q + zt / theta)) * std::pow(t, -zt / (2.0 * theta));
    return first + second;
}

struct MomentRow {
    double a = 0.0;  // s
    double b = 0.0;  // y (derivative scan) or t (increment scan)
    double mean = 0.0;
    double std_error = 0.0;
    double median_means = 0.0;
    double envelope = 0.0;
    std::size_t flagged = 0;
    std::size_t n = 0;
    bool unreliable = false;
};

struct ExponentFit {
    double fixed_abscissa = 0.0;  // the s the fit was done at
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t points = 0;
};

struct MomentTable {
    std::string kind;
    ExperimentConfig config;
    std::vector<MomentRow> rows;
    std::vector<ExponentFit> fits;  // log-log slope vs y (resp. t-s) at fixed s
    double fitted_c = 0.0;          // geometric-mean ratio mean/envelope
    std::string second_column = "y";
    std::string notes;

    std::string to_csv() const {
        std::string out = "s," + second_column +
                          ",mean,std_error,median_of_means,envelope,flagged,n,unreliable\n";
        char buf[256];
        for (const MomentRow& row : rows) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%zu,%zu,%d\n",
                          row.a, row.b, row.mean, row.std_error, row.median_means,
                          row.envelope, row.flagged, row.n, row.unreliable ? 1 : 0);
            out += buf;
        }
        return out;
    }
};

namespace detail {

struct RowAccumulator {
    std::vector<double> values;  // per unflagged trace
    std::size_t flagged = 0;
};

inline void finalize_rows(MomentTable& table, std::vector<RowAccumulator>& accs,
                          std::size_t n_traces) {
    std::size_t total_flagged = 0;
    for (std::size_t i = 0; i < accs.size(); ++i) {
        MomentRow& row = table.rows[i];
        RowAccumulator& acc = accs[i];
        row.flagged = acc.flagged;
        row.n = acc.values.size();
        total_flagged += acc.flagged;
        row.unreliable = acc.flagged * 100 >= n_traces;
        if (!acc.values.empty()) {
            row.mean = mean(acc.values);
            row.std_error = acc.values.size() > 1 ? standard_error(acc.values) : 0.0;
            row.median_means = median_of_means(acc.values);
        }
    }
    if (total_flagged * 100 > n_traces * accs.size())
        throw std::runtime_error(
            "moment scan aborted: more than 1% of samples were flagged near a slit tip");

    double log_ratio_sum = 0.0;
    std::size_t used = 0;
    for (const MomentRow& row : table.rows) {
        if (row.unreliable || row.mean <= 0.0 || row.envelope <= 0.0) continue;
        log_ratio_sum += std::log(row.mean / row.envelope);
        ++used;
    }
    table.fitted_c = used ? std::exp(log_ratio_sum / static_cast<double>(used)) : 0.0;
}

// log-log fit of the row means against the second abscissa, grouped by s
inline void fit_by_group(MomentTable& table, bool against_gap) {
    std::map<double, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < table.rows.size(); ++i)
        groups[table.rows[i].a].push_back(i);
    for (const auto& [s, idxs] : groups) {
        if (idxs.size() < 3) continue;
        std::vector<double> xs, ys;
        for (std::size_t i : idxs) {
            const MomentRow& row = table.rows[i];
            if (row.mean <= 0.0) continue;
            const double x = against_gap ? row.b - row.a : row.b;
            if (!(x > 0.0)) continue;
            xs.push_back(std::log(x));
            ys.push_back(std::log(row.mean));
        }
        if (xs.size() < 3) continue;
        const LineFit lf = fit_line(xs, ys);
        table.fits.push_back(ExponentFit{s, lf.slope, lf.intercept, xs.size()});
    }
}

}  // namespace detail

// E |fhat'_s(i y)|^q over a grid of (s, y), with the derivative-moment
// envelope alongside and per-s log-log y-exponent fits.
inline MomentTable derivative_moment_scan(const ExperimentConfig& cfg) {
    const Kappa k{cfg.kappa};
    if (cfg.n_traces < 1) throw std::invalid_argument("n_traces must be >= 1");
    if (cfg.grid.empty()) throw std::invalid_argument("empty (s, y) grid");
    for (const auto& g : cfg.grid)
        if (!(g[0] > 0.0 && g[0] <= 1.0 && g[1] > 0.0 && g[1] <= 1.0))
            throw std::invalid_argument("grid points must satisfy s, y in (0, 1]");
    if (!interval_i(k).contains(cfg.r))
        throw std::invalid_argument("r outside the admissible interval for moment scans");

    const double q = q_of_r(cfg.r, k);
    double s_max = 0.0;
    for (const auto& g : cfg.grid) s_max = std::max(s_max, g[0]);
    const auto n_steps = static_cast<std::size_t>(std::llround(s_max / cfg.dt));

    MomentTable table;
    table.kind = "derivative_moment";
    table.config = cfg;
    table.second_column = "y";
    table.rows.resize(cfg.grid.size());
    for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
        table.rows[i].a = cfg.grid[i][0];
        table.rows[i].b = cfg.grid[i][1];
        table.rows[i].envelope =
            envelope_derivative_moment(cfg.grid[i][0], cfg.grid[i][1], cfg.r, k);
    }

    const std::size_t n = static_cast<std::size_t>(cfg.n_traces);
    // sample[i][row]: NaN marks a flagged draw
    std::vector<std::vector<double>> samples(n,
        std::vector<double>(cfg.grid.size(), 0.0));
    parallel_for(n, [&](std::size_t i) {
        const DrivingPath d = sample_driving(k, s_max, n_steps, cfg.seed, i);
        for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
            const auto idx = static_cast<std::size_t>(std::llround(cfg.grid[g][0] / cfg.dt));
            const DerivativeSample ds = fhat_log_derivative(d, idx, cfg.grid[g][1]);
            samples[i][g] = ds.flagged ? std::numeric_limits<double>::quiet_NaN()
                                       : std::exp(q * ds.log_abs);
        }
    }, cfg.threads);

    std::vector<detail::RowAccumulator> accs(cfg.grid.size());
    for (std::size_t i = 0; i < n; ++i) {  // ordered reduction
        for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
            if (std::isnan(samples[i][g]))
                ++accs[g].flagged;
            else
                accs[g].values.push_back(samples[i][g]);
        }
    }
    detail::finalize_rows(table, accs, n);
    detail::fit_by_group(table, /*against_gap=*/false);
    table.notes = "rows share traces; cross-row covariances ignored in std_error";
    return table;
}

// E |gamma(t) - gamma(s)|^q over a grid of (s, t), with the two-term
// increment envelope and per-s log-log (t-s)-exponent fits.
inline MomentTable increment_moment_scan(const ExperimentConfig& cfg) {
    const Kappa k{cfg.kappa};
    if (cfg.n_traces < 1) throw std::invalid_argument("n_traces must be >= 1");
    if (cfg.grid.empty()) throw std::invalid_argument("empty (s, t) grid");
    for (const auto& g : cfg.grid)
        if (!(0.0 < g[0] && g[0] <= g[1] && g[1] <= 1.0))
            throw std::invalid_argument("grid points must satisfy 0 < s <= t <= 1");
    if (!interval_i(k).contains(cfg.r))
        throw std::invalid_argument("r outside the admissible interval for moment scans");
    const double r_tilde = cfg.r_tilde_or_default();
    if (!(cfg.r < r_tilde && r_tilde < r_critical(k)))
        throw std::invalid_argument("r_tilde must lie strictly between r and r_c");

    const double q = q_of_r(cfg.r, k);
    const auto n_steps = static_cast<std::size_t>(std::llround(1.0 / cfg.dt));
    const double y_eval = std::sqrt(cfg.dt);

    // distinct evaluation indices
    std::vector<std::size_t> eval_idx;
    for (const auto& g : cfg.grid) {
        eval_idx.push_back(static_cast<std::size_t>(std::llround(g[0] / cfg.dt)));
        eval_idx.push_back(static_cast<std::size_t>(std::llround(g[1] / cfg.dt)));
    }
    std::sort(eval_idx.begin(), eval_idx.end());
    eval_idx.erase(std::unique(eval_idx.begin(), eval_idx.end()), eval_idx.end());

    MomentTable table;
    table.kind = "increment_moment";
    table.config = cfg;
    table.second_column = "t";
    table.rows.resize(cfg.grid.size());
    for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
        table.rows[i].a = cfg.grid[i][0];
        table.rows[i].b = cfg.grid[i][1];
        table.rows[i].envelope =
            envelope_increment_moment(cfg.grid[i][0], cfg.grid[i][1], cfg.r, r_tilde, k);
    }

    const std::size_t n = static_cast<std::size_t>(cfg.n_traces);
    std::vector<std::vector<double>> samples(n,
        std::vector<double>(cfg.grid.size(), 0.0));
    parallel_for(n, [&](std::size_t i) {
        const DrivingPath d = sample_driving(k, 1.0, n_steps, cfg.seed, i);
        std::vector<std::complex<double>> vals(eval_idx.size());
        std::vector<bool> tip(eval_idx.size(), false);
        for (std::size_t e = 0; e < eval_idx.size(); ++e) {
            FlowDiagnostics diag;
            vals[e] = fhat_eval(d, eval_idx[e], y_eval, &diag);
            tip[e] = diag.near_tip_flags > 0;
        }
        const auto find = [&](std::size_t idx) {
            return static_cast<std::size_t>(
                std::lower_bound(eval_idx.begin(), eval_idx.end(), idx) - eval_idx.begin());
        };
        for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
            const std::size_t is = find(static_cast<std::size_t>(std::llround(cfg.grid[g][0] / cfg.dt)));
            const std::size_t it = find(static_cast<std::size_t>(std::llround(cfg.grid[g][1] / cfg.dt)));
            if (tip[is] || tip[it]) {
                samples[i][g] = std::numeric_limits<double>::quiet_NaN();
            } else {
                samples[i][g] = std::pow(std::abs(vals[it] - vals[is]), q);
            }
        }
    }, cfg.threads);

    std::vector<detail::RowAccumulator> accs(cfg.grid.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
            if (std::isnan(samples[i][g]))
                ++accs[g].flagged;
            else
                accs[g].values.push_back(samples[i][g]);
        }
    }
    detail::finalize_rows(table, accs, n);
    detail::fit_by_group(table, /*against_gap=*/true);
    table.notes = "rows share traces; cross-row covariances ignored in std_error";
    return table;
}

struct BesovFinitenessReport {
    std::vector<double> values;  // per-trace ||gamma||^q_{W^{delta,q};[eps,1]}
    double mean_value = 0.0;
    double variance = 0.0;
    double first_half_mean = 0.0;
    double stability_rel_change = 0.0;  // |first-half mean - full mean| / full mean
    std::vector<std::pair<int, double>> refinement;  // (grid_n, mean) per requested mesh
    BesovParams params{0.0, 0.0};
    double epsilon = 0.0;
    bool out_of_window = false;
};

// empirical distribution of the Besov seminorm power over traces; the
// running mean must stabilize when (delta, q) sits inside the admissible
// window. With allow_out_of_window the scan doubles as the divergence
// demonstration for delta above the window.
inline BesovFinitenessReport besov_finiteness(const ExperimentConfig& cfg,
                                              BesovParams params, double epsilon,
                                              bool allow_out_of_window = false,
                                              std::vector<int> refinement_grids = {}) {
    const Kappa k{cfg.kappa};
    if (cfg.n_traces < 1) throw std::invalid_argument("n_traces must be >= 1");
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("epsilon must lie in [0, 1]");
    if (!params.valid())
        throw std::domain_error("Besov parameters require delta in (0,1) and q > 1");

    const DeltaWindow window = besov_window(cfg.r, k, BesovMode::besov);
    const bool inside = !window.empty() && params.delta < window.hi;
    const IntervalUnion admissible =
        epsilon > 0.0 ? interval_i(k) : admissible_besov(k);
    if (!allow_out_of_window) {
        if (!admissible.contains(cfg.r))
            throw std::invalid_argument("r = " + std::to_string(cfg.r) +
                                        " outside the admissible set " + admissible.str());
        if (!inside)
            throw std::invalid_argument(
                "delta = " + std::to_string(params.delta) +
                " violates the window upper bound (zeta+q)/(2q) = " +
                std::to_string(window.hi));
    }

    if (refinement_grids.empty()) refinement_grids = {cfg.grid_n};
    const auto n_steps = static_cast<std::size_t>(std::llround(1.0 / cfg.dt));
    for (int gn : refinement_grids)
        if (gn < 2 || n_steps % static_cast<std::size_t>(gn) != 0)
            throw std::invalid_argument("grid_n must divide the step count 1/dt");
    const std::size_t n = static_cast<std::size_t>(cfg.n_traces);

    BesovFinitenessReport rep;
    rep.params = params;
    rep.epsilon = epsilon;
    rep.out_of_window = !inside;

    std::vector<std::vector<double>> per_grid(refinement_grids.size(),
                                              std::vector<double>(n, 0.0));
    parallel_for(n, [&](std::size_t i) {
        const DrivingPath d = sample_driving(k, 1.0, n_steps, cfg.seed, i);
        for (std::size_t gi = 0; gi < refinement_grids.size(); ++gi) {
            const int gn = refinement_grids[gi];
            const std::size_t stride = n_steps / static_cast<std::size_t>(gn);
            const TracePath tr = trace_with_stride(d, stride);
            SampledPath path = SampledPath::from_trace(tr).window(epsilon, 1.0);
            if (path.size() < 2) {
                per_grid[gi][i] = 0.0;  // degenerate window
                continue;
            }
            const SeminormResult sem = besov_seminorm(path, params);
            per_grid[gi][i] = std::pow(sem.value, params.q);
        }
    }, cfg.threads);

    rep.values = per_grid.back();
    rep.mean_value = mean(rep.values);
    rep.variance = rep.values.size() > 1 ? sample_variance(rep.values) : 0.0;
    std::vector<double> first_half(rep.values.begin(),
                                   rep.values.begin() + rep.values.size() / 2);
    if (!first_half.empty() && rep.mean_value != 0.0) {
        rep.first_half_mean = mean(first_half);
        rep.stability_rel_change =
            std::fabs(rep.first_half_mean - rep.mean_value) / rep.mean_value;
    }
    for (std::size_t gi = 0; gi < refinement_grids.size(); ++gi)
        rep.refinement.emplace_back(refinement_grids[gi], mean(per_grid[gi]));
    return rep;
}

struct CriticalEstimate {
    double estimate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    bool flagged_non_monotone = false;
    std::vector<double> p_grid;       // abscissae scanned
    std::vector<double> mean_slope;   // mean dyadic-sum slope per abscissa
};

namespace detail {

// slope of log2 S(m) against m over the top fit_levels levels
inline double dyadic_slope(const std::vector<double>& sums, int fit_levels) {
    std::vector<double> xs, ys;
    const int max_level = static_cast<int>(sums.size());
    for (int m = std::max(1, max_level - fit_levels + 1); m <= max_level; ++m) {
        const double s = sums[static_cast<std::size_t>(m) - 1];
        if (!(s > 0.0)) continue;
        xs.push_back(static_cast<double>(m));
        ys.push_back(std::log2(s));
    }
    if (xs.size() < 2) return 0.0;
    return fit_line(xs, ys).slope;
}

// zero crossings of a nominally decreasing slope curve; an empty result
// means the curve never changed sign inside the scanned range
inline std::vector<double> slope_crossings(const std::vector<double>& ps,
                                           const std::vector<double>& slopes) {
    std::vector<double> crossings;
    for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
        const double s0 = slopes[i], s1 = slopes[i + 1];
        if (s0 >= 0.0 && s1 < 0.0)
            crossings.push_back(ps[i] + (ps[i + 1] - ps[i]) * s0 / (s0 - s1));
    }
    return crossings;
}

inline void locate_crossing(const std::vector<double>& ps, const std::vector<double>& slopes,
                            CriticalEstimate& est) {
    const std::vector<double> crossings = slope_crossings(ps, slopes);
    if (crossings.empty()) {
        // no sign change: clamp to the scanned range end with the right sign
        est.estimate = slopes.front() < 0.0 ? ps.front() : ps.back();
        est.flagged_non_monotone = true;
        return;
    }
    est.estimate = crossings.front();
    if (crossings.size() > 1) est.flagged_non_monotone = true;
}

}  // namespace detail

// Critical variation index: for each p near the theoretical target the
// level-slope of the dyadic variation sums is averaged over traces; the
// estimate is the zero crossing of slope(p), with a trace bootstrap CI.
inline CriticalEstimate critical_pvar_estimate(Kappa k, int n_traces, double dt,
                                               int max_level, std::uint64_t seed,
                                               int fit_levels = 7, std::size_t threads = 1) {
    if (n_traces < 50) throw std::invalid_argument("need at least 50 traces");
    const auto n_steps = static_cast<std::size_t>(std::llround(1.0 / dt));
    if ((std::size_t{1} << max_level) > n_steps)
        throw std::invalid_argument("max_level exceeds the path resolution");

    const double center = p_star(k);
    std::vector<double> ps;
    for (double p = center - 0.30; p <= center + 0.30 + 1e-12; p += 0.05)
        if (p > 1.0 + 1e-9) ps.push_back(p);

    const std::size_t n = static_cast<std::size_t>(n_traces);
    const std::size_t eval_stride = n_steps >> max_level;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i <= (std::size_t{1} << max_level); ++i)
        idx.push_back(i * eval_stride);

    std::vector<std::vector<double>> slopes(n, std::vector<double>(ps.size(), 0.0));
    parallel_for(n, [&](std::size_t i) {
        const DrivingPath d = sample_driving(k, 1.0, n_steps, seed, i);
        const TracePath tr = trace_at_indices(d, idx, std::sqrt(dt));
        const SampledPath path = SampledPath::from_trace(tr);
        for (std::size_t pi = 0; pi < ps.size(); ++pi) {
            const auto sums = dyadic_variation_sums(path, ps[pi], max_level);
            slopes[i][pi] = detail::dyadic_slope(sums, fit_levels);
        }
    }, threads);

    CriticalEstimate est;
    est.p_grid = ps;
    est.mean_slope.assign(ps.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t pi = 0; pi < ps.size(); ++pi) est.mean_slope[pi] += slopes[i][pi];
    for (double& s : est.mean_slope) s /= static_cast<double>(n);

    detail::locate_crossing(ps, est.mean_slope, est);

    // trace bootstrap on the crossing
    Philox gen(seed, 0xC1);
    std::vector<double> boots;
    std::vector<double> resampled(ps.size());
    for (int b = 0; b < 400; ++b) {
        std::fill(resampled.begin(), resampled.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t pick = gen.next_u64() % n;
            for (std::size_t pi = 0; pi < ps.size(); ++pi) resampled[pi] += slopes[pick][pi];
        }
        for (double& s : resampled) s /= static_cast<double>(n);
        CriticalEstimate tmp;
        detail::locate_crossing(ps, resampled, tmp);
        boots.push_back(tmp.estimate);
    }
    est.ci_lo = percentile(boots, 0.025);
    est.ci_hi = percentile(boots, 0.975);
    // a non-monotone mean curve widens the interval over all its crossings
    const std::vector<double> crossings = detail::slope_crossings(ps, est.mean_slope);
    if (crossings.size() > 1) {
        est.ci_lo = std::min(est.ci_lo, crossings.front());
        est.ci_hi = std::max(est.ci_hi, crossings.back());
    }
    return est;
}

// Naive modulus slope: log sup-increment against log gap over dyadic
// scales. Exact on paths with a clean scaling modulus; on SLE traces the
// sup statistic is preasymptotic at desk scale and lands well above the
// critical exponent, so the estimator below goes through the moments.
inline double sup_increment_slope(const SampledPath& path, double epsilon, int scale_lo,
                                  int scale_hi) {
    const std::size_t segs = path.size() - 1;
    if (!(scale_lo <= scale_hi) || (std::size_t{1} << scale_hi) > segs)
        throw std::invalid_argument("invalid dyadic scale range");
    const double h_unit = (path.t_end() - path.t_begin()) / static_cast<double>(segs);
    std::vector<double> xs, ys;
    for (int m = scale_lo; m <= scale_hi; ++m) {
        const std::size_t gap = segs >> m;
        double sup = 0.0;
        for (std::size_t a = 0; a + gap < path.size(); ++a) {
            if (path.times[a] < epsilon) continue;
            sup = std::max(sup, std::abs(path.points[a + gap] - path.points[a]));
        }
        if (sup > 0.0) {
            xs.push_back(std::log2(static_cast<double>(gap) * h_unit));
            ys.push_back(std::log2(sup));
        }
    }
    if (xs.size() < 2) return 0.0;
    return fit_line(xs, ys).slope;
}

// Critical Hoelder exponent on [epsilon, 1] through the increment moments:
// lambda(q) is fitted from E|gamma(t+h)-gamma(t)|^q over dyadic gaps h and
// the estimate maximizes (lambda(q) - 1)/q over moment orders q. Orders
// whose empirical moment is dominated by a single increment (top share
// above 10% at any fitted scale) are discarded as unreliable; that is what
// keeps the maximization inside the range where moments exist.
inline CriticalEstimate critical_hoelder_estimate(Kappa k, int n_traces, double epsilon,
                                                  std::uint64_t seed, double dt,
                                                  int eval_level = 12, int scale_lo = 4,
                                                  int scale_hi = 9,
                                                  std::size_t threads = 1) {
    if (n_traces < 1) throw std::invalid_argument("n_traces must be >= 1");
    if (!(epsilon >= 0.0 && epsilon < 1.0))
        throw std::invalid_argument("epsilon must lie in [0, 1)");
    const auto n_steps = static_cast<std::size_t>(std::llround(1.0 / dt));
    const std::size_t grid_pts = std::size_t{1} << eval_level;
    if (grid_pts > n_steps || n_steps % grid_pts != 0)
        throw std::invalid_argument("2^eval_level must divide the step count 1/dt");
    if (!(scale_lo <= scale_hi && scale_hi <= eval_level))
        throw std::invalid_argument("invalid dyadic scale range");

    std::vector<double> qs;
    for (double q = 0.5; q <= 4.001; q += 0.25) qs.push_back(q);
    const std::size_t n_scales = static_cast<std::size_t>(scale_hi - scale_lo + 1);
    const std::size_t stride = n_steps / grid_pts;
    std::vector<std::size_t> idx(grid_pts + 1);
    for (std::size_t i = 0; i <= grid_pts; ++i) idx[i] = i * stride;

    // per-trace moment sums and maxima, kept separate for the bootstrap
    const std::size_t n = static_cast<std::size_t>(n_traces);
    std::vector<std::vector<double>> sums(n), tops(n);
    std::vector<double> counts(n_scales, 0.0);
    parallel_for(n, [&](std::size_t i) {
        const DrivingPath d = sample_driving(k, 1.0, n_steps, seed, i);
        const TracePath tr = trace_at_indices(d, idx, std::sqrt(dt));
        sums[i].assign(qs.size() * n_scales, 0.0);
        tops[i].assign(qs.size() * n_scales, 0.0);
        for (int m = scale_lo; m <= scale_hi; ++m) {
            const std::size_t gap = grid_pts >> m;
            const std::size_t sc = static_cast<std::size_t>(m - scale_lo);
            double cnt = 0.0;
            for (std::size_t a = 0; a + gap < tr.points.size(); a += gap) {
                if (tr.times[a] < epsilon) continue;
                const double inc = std::abs(tr.points[a + gap] - tr.points[a]);
                if (!(inc > 0.0)) continue;
                const double li = std::log(inc);
                for (std::size_t qi = 0; qi < qs.size(); ++qi) {
                    const double w = std::exp(qs[qi] * li);
                    sums[i][qi * n_scales + sc] += w;
                    tops[i][qi * n_scales + sc] =
                        std::max(tops[i][qi * n_scales + sc], w);
                }
                cnt += 1.0;
            }
            if (i == 0) counts[sc] = cnt;
        }
    }, threads);

    const auto estimate_from = [&](const std::vector<std::size_t>& picks,
                                   std::vector<double>* curve) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t qi = 0; qi < qs.size(); ++qi) {
            std::vector<double> xs, ys;
            double top_share = 0.0;
            for (std::size_t sc = 0; sc < n_scales; ++sc) {
                double total = 0.0, top = 0.0;
                for (std::size_t pick : picks) {
                    total += sums[pick][qi * n_scales + sc];
                    top = std::max(top, tops[pick][qi * n_scales + sc]);
                }
                if (!(total > 0.0)) continue;
                top_share = std::max(top_share, top / total);
                xs.push_back(-static_cast<double>(scale_lo + static_cast<int>(sc)));
                ys.push_back(std::log2(total /
                                       (counts[sc] * static_cast<double>(picks.size()))));
            }
            if (xs.size() < 2) continue;
            const double alpha_q = (fit_line(xs, ys).slope - 1.0) / qs[qi];
            if (curve) curve->push_back(alpha_q);
            if (top_share <= 0.10 && alpha_q > best) best = alpha_q;
        }
        return best;
    };

    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    CriticalEstimate est;
    est.p_grid = qs;
    est.estimate = estimate_from(all, &est.mean_slope);

    Philox gen(seed ^ 0xA1FA, 0xB007);
    std::vector<double> boots;
    std::vector<std::size_t> picks(n);
    for (int b = 0; b < 400; ++b) {
        for (std::size_t i = 0; i < n; ++i) picks[i] = gen.next_u64() % n;
        boots.push_back(estimate_from(picks, nullptr));
    }
    est.ci_lo = percentile(boots, 0.025);
    est.ci_hi = percentile(boots, 0.975);
    return est;
}

}  // namespace slereg
