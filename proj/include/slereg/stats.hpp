#pragma once

// Small statistical helpers for the Monte Carlo experiments: moments with
// standard errors, median-of-means, two-sample Kolmogorov-Smirnov, least
// squares lines and a percentile bootstrap.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "slereg/rng.hpp"

namespace slereg {

inline double mean(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean of empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
    if (v.size() < 2) throw std::invalid_argument("variance needs two samples");
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

inline double standard_error(const std::vector<double>& v) {
    return std::sqrt(sample_variance(v) / static_cast<double>(v.size()));
}

// robustness cross-check for heavy-tailed moments
inline double median_of_means(const std::vector<double>& v, std::size_t blocks = 16) {
    if (v.size() < blocks) blocks = std::max<std::size_t>(1, v.size());
    std::vector<double> ms;
    ms.reserve(blocks);
    const std::size_t base = v.size() / blocks;
    std::size_t pos = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t len = base + (b < v.size() % blocks ? 1 : 0);
        double s = 0.0;
        for (std::size_t i = 0; i < len; ++i) s += v[pos + i];
        ms.push_back(s / static_cast<double>(len));
        pos += len;
    }
    std::sort(ms.begin(), ms.end());
    const std::size_t n = ms.size();
    return n % 2 ? ms[n / 2] : 0.5 * (ms[n / 2 - 1] + ms[n / 2]);
}

struct KsResult {
    double statistic;
    double threshold;
    bool reject;
};

// two-sample KS with the asymptotic critical value c(alpha) sqrt((n+m)/nm),
// c(alpha) = sqrt(-ln(alpha/2)/2)
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b,
                              double alpha = 0.01) {
    if (a.empty() || b.empty()) throw std::invalid_argument("KS needs nonempty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
    const double thr = c * std::sqrt((na + nb) / (na * nb));
    return KsResult{d, thr, d > thr};
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("line fit needs matching samples, at least two");
    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("degenerate abscissae in line fit");
    LineFit f;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

struct BootstrapInterval {
    double lo = 0.0;
    double hi = 0.0;
};

// percentile bootstrap for the mean of per-trace statistics; deterministic
// given the seed (counter-based resampling stream)
inline BootstrapInterval bootstrap_mean_ci(const std::vector<double>& v, double level,
                                           std::size_t n_boot, std::uint64_t seed) {
    if (v.empty()) throw std::invalid_argument("bootstrap of empty sample");
    Philox gen(seed, 0xB007);
    std::vector<double> stats(n_boot);
    for (std::size_t b = 0; b < n_boot; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            s += v[gen.next_u64() % v.size()];
        stats[b] = s / static_cast<double>(v.size());
    }
    std::sort(stats.begin(), stats.end());
    const double tail = (1.0 - level) / 2.0;
    const auto pick = [&](double frac) {
        const double pos = frac * static_cast<double>(n_boot - 1);
        const std::size_t idx = static_cast<std::size_t>(pos);
        return stats[std::min(idx, n_boot - 1)];
    };
    return BootstrapInterval{pick(tail), pick(1.0 - tail)};
}

inline double percentile(std::vector<double> v, double frac) {
    if (v.empty()) throw std::invalid_argument("percentile of empty sample");
    std::sort(v.begin(), v.end());
    const double pos = frac * static_cast<double>(v.size() - 1);
    const std::size_t idx = static_cast<std::size_t>(pos);
    if (idx + 1 >= v.size()) return v.back();
    const double w = pos - static_cast<double>(idx);
    return v[idx] * (1.0 - w) + v[idx + 1] * w;
}

}  // namespace slereg
