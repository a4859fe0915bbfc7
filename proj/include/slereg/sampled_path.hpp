#pragma once

// Planar path sampled at strictly increasing times; the unit all seminorm
// estimators operate on.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "slereg/loewner.hpp"

namespace slereg {

struct SampledPath {
    std::vector<double> times;
    std::vector<std::complex<double>> points;

    SampledPath() = default;
    SampledPath(std::vector<double> t, std::vector<std::complex<double>> p)
        : times(std::move(t)), points(std::move(p)) {
        validate();
    }

    static SampledPath from_trace(const TracePath& tr) {
        return SampledPath(tr.times, tr.points);
    }

    std::size_t size() const { return times.size(); }
    double t_begin() const { return times.front(); }
    double t_end() const { return times.back(); }

    // sub-path with times in [a, b]; may have fewer than 2 samples
    SampledPath window(double a, double b) const {
        SampledPath out;
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (times[i] >= a && times[i] <= b) {
                out.times.push_back(times[i]);
                out.points.push_back(points[i]);
            }
        }
        return out;
    }

    bool uniform_grid(double rel_tol = 1e-9) const {
        if (times.size() < 2) return true;
        const double h = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
        for (std::size_t i = 1; i < times.size(); ++i) {
            if (std::fabs(times[i] - times[i - 1] - h) > rel_tol * std::max(1.0, std::fabs(h)))
                return false;
        }
        return true;
    }

    double mesh() const {
        double m = 0.0;
        for (std::size_t i = 1; i < times.size(); ++i) m = std::max(m, times[i] - times[i - 1]);
        return m;
    }

private:
    void validate() const {
        if (times.size() != points.size())
            throw std::invalid_argument("times and points must have equal length");
        if (times.size() < 2) throw std::invalid_argument("need at least two samples");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1]))
                throw std::invalid_argument("times must be strictly increasing");
    }
};

}  // namespace slereg
