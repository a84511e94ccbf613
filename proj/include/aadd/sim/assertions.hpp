#pragma once

// Range assertions over a trace.

#include "aadd/sim/kernel.hpp"

#include <json.hpp>

#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace aadd::sim {

enum class Severity { Safety, Spec };
enum class Verdict { Pass, ViolatedPossibly, Violated };

inline const char* to_string(Severity s) { return s == Severity::Safety ? "safety" : "spec"; }
inline const char* to_string(Verdict v)
{
    switch (v) {
        case Verdict::Pass: return "PASS";
        case Verdict::ViolatedPossibly: return "VIOLATED-POSSIBLY";
        case Verdict::Violated: return "VIOLATED";
    }
    return "?";
}

struct Assertion {
    std::string name;
    std::string signal;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    Severity severity = Severity::Spec;
};

struct Finding {
    Tick tag = 0;
    Verdict verdict = Verdict::Pass;
    Interval hull;
    Interval witness_range;
    std::string witness;  // path condition of an offending leaf
};

struct AssertionResult {
    Assertion assertion;
    Verdict verdict = Verdict::Pass;  // worst over all tags
    std::vector<Finding> findings;    // non-passing tags only
    std::size_t checked = 0;

    const Finding* first() const { return findings.empty() ? nullptr : &findings.front(); }
};

struct AssertionReport {
    std::vector<AssertionResult> results;

    bool safety_ok() const
    {
        for (const auto& r : results) {
            if (r.assertion.severity == Severity::Safety && r.verdict != Verdict::Pass) return false;
        }
        return true;
    }
};

inline Verdict classify(const Observation& o, double lo, double hi, Finding* f)
{
    const Interval bounds{lo, hi};
    if (bounds.contains(o.hull, kSlack)) return Verdict::Pass;
    bool all_outside = !o.leaves.empty();
    const LeafInterval* offender = nullptr;
    for (const auto& l : o.leaves) {
        const bool outside = l.range.hi < lo - kSlack || l.range.lo > hi + kSlack;
        all_outside &= outside;
        if (!offender && !bounds.contains(l.range, kSlack)) offender = &l;
    }
    if (f && offender) {
        f->witness = offender->path;
        f->witness_range = offender->range;
    }
    return all_outside ? Verdict::Violated : Verdict::ViolatedPossibly;
}

inline AssertionReport check_assertions(const Trace& trace, const std::vector<Assertion>& assertions)
{
    AssertionReport rep;
    for (const auto& a : assertions) {
        if (!(a.lo < a.hi)) throw InvalidArgument("assertion '" + a.name + "' needs lo < hi");
        AssertionResult r;
        r.assertion = a;
        for (const TraceRow* row : trace.series(a.signal)) {
            ++r.checked;
            Finding f;
            f.tag = row->tag;
            f.hull = row->obs.hull;
            f.verdict = classify(row->obs, a.lo, a.hi, &f);
            if (f.verdict == Verdict::Pass) continue;
            if (f.verdict == Verdict::Violated || r.verdict == Verdict::Pass) r.verdict = f.verdict;
            r.findings.push_back(std::move(f));
        }
        rep.results.push_back(std::move(r));
    }
    return rep;
}

inline nlohmann::json bound_json(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

inline nlohmann::json to_json(const AssertionReport& rep)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rep.results) {
        nlohmann::json j{{"name", r.assertion.name},
                         {"signal", r.assertion.signal},
                         {"lo", bound_json(r.assertion.lo)},
                         {"hi", bound_json(r.assertion.hi)},
                         {"severity", to_string(r.assertion.severity)},
                         {"verdict", to_string(r.verdict)},
                         {"checked", r.checked},
                         {"violations", r.findings.size()}};
        if (const Finding* f = r.first()) {
            j["first"] = {{"time", to_seconds(f->tag)},
                          {"verdict", to_string(f->verdict)},
                          {"hull", {f->hull.lo, f->hull.hi}},
                          {"witness", f->witness},
                          {"witness_range", {f->witness_range.lo, f->witness_range.hi}}};
        }
        out.push_back(std::move(j));
    }
    return {{"assertions", std::move(out)}, {"safety_ok", rep.safety_ok()}};
}

inline void write_text(std::ostream& os, const AssertionReport& rep)
{
    for (const auto& r : rep.results) {
        const auto& a = r.assertion;
        os << a.name << " [" << to_string(a.severity) << "] " << a.signal << " in [" << format_number(a.lo) << ", "
           << format_number(a.hi) << "]: " << to_string(r.verdict);
        if (const Finding* f = r.first()) {
            os << " (" << r.findings.size() << " of " << r.checked << " samples; first at t="
               << format_number(to_seconds(f->tag)) << " s, hull [" << format_number(f->hull.lo) << ", "
               << format_number(f->hull.hi) << "])";
            if (!f->witness.empty()) os << "\n  witness: " << f->witness;
        }
        os << '\n';
    }
}

}  // namespace aadd::sim
