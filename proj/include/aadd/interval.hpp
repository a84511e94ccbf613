#pragma once

#include <algorithm>
#include <ostream>

namespace aadd {

// Closed real interval [lo, hi]. No outward rounding.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    constexpr double width() const { return hi - lo; }
    constexpr double mid() const { return 0.5 * (lo + hi); }
    constexpr double radius() const { return 0.5 * (hi - lo); }

    constexpr bool contains(double v, double slack = 0.0) const
    {
        return v >= lo - slack && v <= hi + slack;
    }
    constexpr bool contains(const Interval& o, double slack = 0.0) const
    {
        return o.lo >= lo - slack && o.hi <= hi + slack;
    }

    static constexpr Interval hull(const Interval& a, const Interval& b)
    {
        return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
    }

    friend constexpr bool operator==(const Interval&, const Interval&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const Interval& iv)
{
    return os << '[' << iv.lo << ", " << iv.hi << ']';
}

}  // namespace aadd
