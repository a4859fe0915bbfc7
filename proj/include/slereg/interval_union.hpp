#pragma once

// Finite unions of open intervals of the real line, with +/-infinity
// allowed as sentinel endpoints. The convention (a,a) = empty applies
// everywhere; touching components such as (1,4) and (4,4.5) are kept
// separate because the shared endpoint is excluded.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace slereg {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool empty() const { return !(lo < hi); }
    bool contains(double x) const { return lo < x && x < hi; }
    double length() const { return empty() ? 0.0 : hi - lo; }
};

class IntervalUnion {
public:
    IntervalUnion() = default;

    explicit IntervalUnion(std::vector<Interval> parts) {
        for (const Interval& iv : parts)
            if (!iv.empty()) comps_.push_back(iv);
        std::sort(comps_.begin(), comps_.end(),
                  [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        // merge genuinely overlapping components; touching ones stay apart
        std::vector<Interval> merged;
        for (const Interval& iv : comps_) {
            if (!merged.empty() && iv.lo < merged.back().hi)
                merged.back().hi = std::max(merged.back().hi, iv.hi);
            else
                merged.push_back(iv);
        }
        comps_ = std::move(merged);
    }

    static IntervalUnion empty_set() { return IntervalUnion(); }

    static IntervalUnion single(double lo, double hi) {
        return IntervalUnion({Interval{lo, hi}});
    }

    static IntervalUnion full_line() {
        const double inf = std::numeric_limits<double>::infinity();
        return single(-inf, inf);
    }

    const std::vector<Interval>& components() const { return comps_; }
    bool is_empty() const { return comps_.empty(); }
    std::size_t size() const { return comps_.size(); }

    bool contains(double x) const {
        for (const Interval& iv : comps_)
            if (iv.contains(x)) return true;
        return false;
    }

    double inf() const {
        return comps_.empty() ? std::numeric_limits<double>::quiet_NaN() : comps_.front().lo;
    }
    double sup() const {
        return comps_.empty() ? std::numeric_limits<double>::quiet_NaN() : comps_.back().hi;
    }

    bool bounded() const {
        return comps_.empty() || (std::isfinite(inf()) && std::isfinite(sup()));
    }

    double measure() const {
        double m = 0.0;
        for (const Interval& iv : comps_) m += iv.length();
        return m;
    }

    IntervalUnion intersect(const IntervalUnion& other) const {
        std::vector<Interval> out;
        std::size_t i = 0, j = 0;
        while (i < comps_.size() && j < other.comps_.size()) {
            const Interval& a = comps_[i];
            const Interval& b = other.comps_[j];
            const double lo = std::max(a.lo, b.lo);
            const double hi = std::min(a.hi, b.hi);
            if (lo < hi) out.push_back(Interval{lo, hi});
            if (a.hi < b.hi)
                ++i;
            else
                ++j;
        }
        return IntervalUnion(std::move(out));
    }

    // endpoint-by-endpoint comparison
    bool approx_equal(const IntervalUnion& other, double tol) const {
        if (comps_.size() != other.comps_.size()) return false;
        for (std::size_t k = 0; k < comps_.size(); ++k) {
            if (!endpoint_close(comps_[k].lo, other.comps_[k].lo, tol)) return false;
            if (!endpoint_close(comps_[k].hi, other.comps_[k].hi, tol)) return false;
        }
        return true;
    }

    std::string str() const {
        if (comps_.empty()) return "{}";
        std::ostringstream os;
        for (std::size_t k = 0; k < comps_.size(); ++k) {
            if (k) os << " u ";
            os << "(" << comps_[k].lo << ", " << comps_[k].hi << ")";
        }
        return os.str();
    }

private:
    static bool endpoint_close(double a, double b, double tol) {
        if (std::isinf(a) || std::isinf(b)) return a == b;
        return std::fabs(a - b) <= tol;
    }

    std::vector<Interval> comps_;
};

}  // namespace slereg
