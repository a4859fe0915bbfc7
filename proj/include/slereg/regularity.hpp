#pragma once

// Discrete p-variation, alpha-Hoelder and Besov W^{delta,q} seminorms of
// sampled paths, the dyadic variation sums behind the critical-index
// estimator, and the variation/Besov embedding checker.
//
// p-variation is computed on the sample skeleton (partitions through the
// sample times only). That is the exact p-variation of the piecewise
// linear interpolant's vertex set and a lower bound for any continuous
// extension.

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "slereg/exponents.hpp"
#include "slereg/sampled_path.hpp"

namespace slereg {

enum class SeminormKind { pvar, hoelder, besov };

struct SeminormResult {
    double value = 0.0;
    SeminormKind kind = SeminormKind::pvar;
    double p = 0.0;      // pvar
    double alpha = 0.0;  // hoelder
    BesovParams besov{0.0, 0.0};
    double window_lo = 0.0;
    double window_hi = 0.0;
    std::size_t n_samples = 0;
    double mesh = 0.0;
    std::size_t excluded_cells = 0;   // besov: diagonal band
    double excluded_measure = 0.0;
    std::size_t subsample_stride = 1;  // hoelder: 1 = exact
};

namespace detail {

inline SeminormResult make_result(const SampledPath& path, SeminormKind kind) {
    SeminormResult res;
    res.kind = kind;
    res.window_lo = path.t_begin();
    res.window_hi = path.t_end();
    res.n_samples = path.size();
    res.mesh = path.mesh();
    return res;
}

}  // namespace detail

// sup over endpoint-containing sub-partitions of sum |increment|^p, to the
// power 1/p, by dynamic programming over predecessors.
inline SeminormResult p_variation(const SampledPath& path, double p) {
    if (!(p >= 1.0)) throw std::domain_error("p-variation requires p >= 1");
    const auto& x = path.points;
    const std::size_t n = x.size();
    std::vector<double> best(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
        double v = 0.0;
        for (std::size_t i = 0; i < j; ++i) {
            const double d = std::abs(x[j] - x[i]);
            if (d == 0.0) continue;  // predecessor chain already covers it
            const double cand = best[i] + std::pow(d, p);
            if (cand > v) v = cand;
        }
        best[j] = v;
    }
    SeminormResult res = detail::make_result(path, SeminormKind::pvar);
    res.p = p;
    res.value = std::pow(best[n - 1], 1.0 / p);
    return res;
}

// exhaustive oracle over all endpoint-containing subsets; n <= 20
inline SeminormResult p_variation_bruteforce(const SampledPath& path, double p) {
    if (!(p >= 1.0)) throw std::domain_error("p-variation requires p >= 1");
    const auto& x = path.points;
    const std::size_t n = x.size();
    if (n > 20) throw std::invalid_argument("brute-force p-variation limited to 20 samples");

    const std::size_t interior = n - 2;
    double best = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << interior); ++mask) {
        double sum = 0.0;
        std::size_t prev = 0;
        for (std::size_t b = 0; b < interior; ++b) {
            if (mask & (std::size_t{1} << b)) {
                const std::size_t cur = b + 1;
                sum += std::pow(std::abs(x[cur] - x[prev]), p);
                prev = cur;
            }
        }
        sum += std::pow(std::abs(x[n - 1] - x[prev]), p);
        if (sum > best) best = sum;
    }
    SeminormResult res = detail::make_result(path, SeminormKind::pvar);
    res.p = p;
    res.value = std::pow(best, 1.0 / p);
    return res;
}

// sup |x(t)-x(s)| / |t-s|^alpha over sample pairs; exact unless a stride
// is requested for very long paths
inline SeminormResult hoelder_norm(const SampledPath& path, double alpha,
                                   std::size_t stride = 1) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::domain_error("Hoelder exponent must lie in (0, 1]");
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    const auto& x = path.points;
    const auto& t = path.times;
    double best = 0.0;
    for (std::size_t i = 0; i < x.size(); i += stride) {
        for (std::size_t j = i + stride; j < x.size(); j += stride) {
            const double ratio = std::abs(x[j] - x[i]) / std::pow(t[j] - t[i], alpha);
            if (ratio > best) best = ratio;
        }
    }
    SeminormResult res = detail::make_result(path, SeminormKind::hoelder);
    res.alpha = alpha;
    res.subsample_stride = stride;
    res.value = best;
    return res;
}

// double-integral Besov seminorm on a uniform grid: one-point rule per
// off-diagonal cell pair, diagonal band excluded (its measure shrinks
// like the mesh and is reported in the diagnostics)
inline SeminormResult besov_seminorm(const SampledPath& path, BesovParams params) {
    if (!params.valid())
        throw std::domain_error("Besov parameters require delta in (0,1) and q > 1");
    if (!path.uniform_grid())
        throw std::invalid_argument(
            "Besov seminorm needs a uniform time grid; resample the path first");

    const auto& x = path.points;
    const std::size_t m = x.size() - 1;  // cells
    const double h = (path.t_end() - path.t_begin()) / static_cast<double>(m);
    const double expo = 1.0 + params.delta * params.q;

    double sum = 0.0;
    for (std::size_t d = 1; d < m; ++d) {
        const double kernel = std::pow(static_cast<double>(d) * h, -expo);
        double inc = 0.0;
        for (std::size_t i = 0; i + d < m; ++i)
            inc += std::pow(std::abs(x[i + d] - x[i]), params.q);
        sum += 2.0 * inc * kernel;  // (s,t) and (t,s)
    }
    sum *= h * h;

    SeminormResult res = detail::make_result(path, SeminormKind::besov);
    res.besov = params;
    res.excluded_cells = m;
    res.excluded_measure = static_cast<double>(m) * h * h;
    res.value = std::pow(sum, 1.0 / params.q);
    return res;
}

// S_p(m) = sum over level-m dyadic intervals of |increment|^p, m = 1..max_level
inline std::vector<double> dyadic_variation_sums(const SampledPath& path, double p,
                                                 int max_level) {
    if (!(p >= 1.0)) throw std::domain_error("dyadic sums require p >= 1");
    const std::size_t segs = path.size() - 1;
    const std::size_t need = std::size_t{1} << max_level;
    if (segs < need)
        throw std::invalid_argument("path too short for the requested dyadic level");
    if (segs % need != 0)
        throw std::invalid_argument("sample count minus one must be divisible by 2^max_level");

    std::vector<double> sums(static_cast<std::size_t>(max_level));
    for (int lvl = 1; lvl <= max_level; ++lvl) {
        const std::size_t pieces = std::size_t{1} << lvl;
        const std::size_t step = segs / pieces;
        double s = 0.0;
        for (std::size_t i = 0; i < pieces; ++i)
            s += std::pow(std::abs(path.points[(i + 1) * step] - path.points[i * step]), p);
        sums[static_cast<std::size_t>(lvl) - 1] = s;
    }
    return sums;
}

struct EmbeddingRow {
    double window_lo = 0.0;
    double window_hi = 0.0;
    double pvar = 0.0;
    double hoelder = 0.0;
    double besov = 0.0;
    double variation_ratio = 0.0;  // pvar / (|t-s|^alpha besov)
    double hoelder_ratio = 0.0;    // hoelder / besov
    bool vacuous = false;          // 0/0 on a constant window
    bool inconsistent = false;     // zero Besov with nonzero variation
};

struct EmbeddingReport {
    double p = 0.0;
    double alpha = 0.0;
    BesovParams params{0.0, 0.0};
    std::vector<EmbeddingRow> rows;
    double max_variation_ratio = 0.0;
    double max_hoelder_ratio = 0.0;
};

// per-window ratios for |x|_{p-var;[s,t]} <= C |t-s|^alpha |x|_{W^{delta,q};[s,t]}
// with p = 1/delta, alpha = delta - 1/q, plus the Hoelder variant
inline EmbeddingReport embedding_check(const SampledPath& path, BesovParams params,
                                       const std::vector<std::pair<double, double>>& windows) {
    if (!params.variation_usable())
        throw std::domain_error("embedding requires delta - 1/q > 0");
    EmbeddingReport rep;
    rep.params = params;
    rep.p = 1.0 / params.delta;
    rep.alpha = params.delta - 1.0 / params.q;

    for (const auto& [a, b] : windows) {
        SampledPath sub = path.window(a, b);
        EmbeddingRow row;
        row.window_lo = a;
        row.window_hi = b;
        if (sub.size() < 2) {
            row.vacuous = true;
            rep.rows.push_back(row);
            continue;
        }
        row.pvar = p_variation(sub, rep.p).value;
        row.hoelder = hoelder_norm(sub, rep.alpha).value;
        row.besov = besov_seminorm(sub, params).value;
        const double tiny = 1e-15;
        if (row.besov < tiny && row.pvar < tiny) {
            row.vacuous = true;
        } else if (row.besov < tiny) {
            row.inconsistent = true;
        } else {
            const double span = sub.t_end() - sub.t_begin();
            row.variation_ratio =
                row.pvar / (std::pow(span, rep.alpha) * row.besov);
            row.hoelder_ratio = row.hoelder / row.besov;
            rep.max_variation_ratio = std::max(rep.max_variation_ratio, row.variation_ratio);
            rep.max_hoelder_ratio = std::max(rep.max_hoelder_ratio, row.hoelder_ratio);
        }
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace slereg
