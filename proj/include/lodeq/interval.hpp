#pragma once

#include <algorithm>
#include <cmath>

namespace lodeq {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    double mid() const { return 0.5 * (lo + hi); }
    double length() const { return hi - lo; }
    bool contains(double t, double slack = 0.0) const { return t >= lo - slack && t <= hi + slack; }
    bool contains(const Interval& o, double rel = 1e-12) const {
        double s = rel * std::max({1.0, std::abs(lo), std::abs(hi)});
        return o.lo >= lo - s && o.hi <= hi + s;
    }
    bool valid() const { return std::isfinite(lo) && std::isfinite(hi) && lo < hi; }
    bool operator==(const Interval&) const = default;
};

} // namespace lodeq
