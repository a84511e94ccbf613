#pragma once

// Extreme-value cross-check: numeric runs at corner assignments whose
// samples must all fall inside the symbolic hulls.

#include "aadd/sim/kernel.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace aadd::sim {

// Every combination of noise in {-1, +1} and free booleans in {true, false}.
inline std::vector<NumericDomain::Corner> enumerate_corners(const std::vector<std::string>& noise,
                                                            const std::vector<std::string>& bools)
{
    const std::size_t n = noise.size() + bools.size();
    if (n > 20) throw InvalidArgument("too many uncertainties for corner enumeration");
    std::vector<NumericDomain::Corner> out;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
        NumericDomain::Corner c;
        for (std::size_t i = 0; i < noise.size(); ++i) c.noise[noise[i]] = (m >> i) & 1 ? 1.0 : -1.0;
        for (std::size_t i = 0; i < bools.size(); ++i) c.bools[bools[i]] = ((m >> (noise.size() + i)) & 1) != 0;
        out.push_back(std::move(c));
    }
    return out;
}

inline std::string corner_label(const NumericDomain::Corner& c)
{
    std::string s;
    for (const auto& [k, v] : c.noise) s += (s.empty() ? "" : ",") + k + "=" + format_number(v);
    for (const auto& [k, v] : c.bools) s += (s.empty() ? "" : ",") + k + "=" + (v ? "true" : "false");
    return s;
}

struct Containment {
    std::size_t checked = 0;
    std::size_t outside = 0;
    std::string first;  // description of the first sample outside its hull

    bool ok() const { return outside == 0; }
};

// Both traces must come from the same schedule and horizon.
inline Containment check_containment(const Trace& symbolic, const Trace& numeric)
{
    if (symbolic.rows.size() != numeric.rows.size()) {
        throw InvalidArgument("traces differ in length; not the same network and horizon");
    }
    Containment c;
    for (std::size_t i = 0; i < symbolic.rows.size(); ++i) {
        const TraceRow& s = symbolic.rows[i];
        const TraceRow& n = numeric.rows[i];
        if (s.tag != n.tag || s.signal != n.signal) throw InvalidArgument("traces are not aligned");
        ++c.checked;
        const double v = n.obs.hull.lo;
        if (!s.obs.hull.contains(v, kSlack * (1.0 + std::abs(v)))) {
            if (c.outside++ == 0) {
                c.first = symbolic.signals[s.signal] + " at t=" + format_number(to_seconds(s.tag)) + ": " +
                          format_number(v) + " outside [" + format_number(s.obs.hull.lo) + ", " +
                          format_number(s.obs.hull.hi) + "]";
            }
        }
    }
    return c;
}

}  // namespace aadd::sim
