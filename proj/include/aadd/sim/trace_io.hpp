#pragma once

#include "aadd/sim/kernel.hpp"

#include <json.hpp>

#include <cstdio>
#include <ostream>
#include <string>

namespace aadd::sim {

inline std::string csv_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// time,signal,hull_lo,hull_hi,leaf_count
inline void write_csv(std::ostream& os, const Trace& t)
{
    os << "time,signal,hull_lo,hull_hi,leaf_count\n";
    for (const TraceRow* r : t.sorted()) {
        os << csv_number(to_seconds(r->tag)) << ',' << t.signals[r->signal] << ',' << csv_number(r->obs.hull.lo)
           << ',' << csv_number(r->obs.hull.hi) << ',' << r->obs.leaf_count << '\n';
    }
}

inline nlohmann::json to_json(const Trace& t)
{
    nlohmann::json signals = nlohmann::json::array();
    for (const auto& name : t.signals) {
        nlohmann::json samples = nlohmann::json::array();
        for (const TraceRow* r : t.series(name)) {
            nlohmann::json leaves = nlohmann::json::array();
            for (const auto& l : r->obs.leaves) {
                nlohmann::json lj{{"range", {l.range.lo, l.range.hi}}};
                if (!l.path.empty()) lj["path"] = l.path;
                leaves.push_back(std::move(lj));
            }
            samples.push_back({{"time", to_seconds(r->tag)},
                               {"hull", {r->obs.hull.lo, r->obs.hull.hi}},
                               {"leaf_count", r->obs.leaf_count},
                               {"leaves", std::move(leaves)}});
        }
        signals.push_back({{"name", name}, {"samples", std::move(samples)}});
    }
    return {{"hyperperiod", to_seconds(t.hyperperiod)}, {"horizon", to_seconds(t.horizon)}, {"signals", std::move(signals)}};
}

}  // namespace aadd::sim
