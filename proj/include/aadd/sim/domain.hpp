#pragma once

// Value domains for the simulation kernel. Process step functions are written
// once against this interface and run either symbolically (Aadd values) or
// numerically at one concrete assignment of the uncertainties.

#include "aadd/decision_diagram.hpp"

#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace aadd::sim {

struct LeafInterval {
    Interval range;
    std::string path;  // empty unless paths were requested
};

struct Observation {
    Interval hull;
    std::size_t leaf_count = 1;
    std::vector<LeafInterval> leaves;
};

class SymbolicDomain {
public:
    using Real = Aadd;
    using Bool = Aadd;
    using Value = Aadd;

    explicit SymbolicDomain(Context& ctx) : ctx_(ctx) {}

    Context& context() { return ctx_; }
    const Context& context() const { return ctx_; }

    Real constant(double c) const { return Aadd(c); }
    Bool boolean(bool b) const { return Aadd::boolean(b); }

    // One noise symbol per name; asking again for a name reuses its symbol.
    Real uncertain(const std::string& name, double center, double radius)
    {
        if (radius == 0.0) return Aadd(AffineForm::exact(center));
        auto it = symbols_.find(name);
        if (it == symbols_.end()) it = symbols_.emplace(name, allocate_noise_symbol()).first;
        return Aadd(AffineForm::from_parts(center, {{it->second, radius}}, 0.0));
    }

    Bool free_bool(const std::string& name)
    {
        free_bools_.insert(name);
        return ctx_.free_bool(name);
    }

    Bool lt(const Real& a, const Real& b) { return aadd::lt(ctx_, a, b); }
    Bool le(const Real& a, const Real& b) { return aadd::le(ctx_, a, b); }
    Bool gt(const Real& a, const Real& b) { return aadd::gt(ctx_, a, b); }
    Bool ge(const Real& a, const Real& b) { return aadd::ge(ctx_, a, b); }

    Aadd ite(const Bool& c, const Aadd& t, const Aadd& e) const { return aadd::ite(c, t, e); }
    Bool land(const Bool& a, const Bool& b) const { return a && b; }
    Bool lor(const Bool& a, const Bool& b) const { return a || b; }
    Bool lnot(const Bool& a) const { return !a; }

    const Value& value(const Aadd& v) const { return v; }
    const Real& as_real(const Value& v) const
    {
        if (!v.is_real()) throw LeafKindError("expected a real-valued signal");
        return v;
    }
    const Bool& as_bool(const Value& v) const
    {
        if (v.is_real()) throw LeafKindError("expected a boolean signal");
        return v;
    }
    bool is_real(const Value& v) const { return v.is_real(); }

    Value simplify(const Value& v) { return aadd::simplify(ctx_, v); }

    Observation observe(const Value& v, bool with_paths)
    {
        Observation o;
        const auto leaves = per_leaf_ranges(ctx_, v);
        o.hull = hull_of(leaves);
        o.leaf_count = v.leaf_count();
        if (with_paths) {
            for (const auto& l : leaves) o.leaves.push_back({l.range, path_to_string(ctx_, l.path)});
        } else {
            for (const auto& l : leaves) o.leaves.push_back({l.range, {}});
        }
        return o;
    }

    const std::map<std::string, NoiseSymbolId>& symbols() const { return symbols_; }
    const std::set<std::string>& free_bools() const { return free_bools_; }

private:
    Context& ctx_;
    std::map<std::string, NoiseSymbolId> symbols_;
    std::set<std::string> free_bools_;
};

// Plain doubles and bools at one assignment of the named uncertainties.
class NumericDomain {
public:
    using Real = double;
    using Bool = bool;
    using Value = std::variant<double, bool>;

    struct Corner {
        std::map<std::string, double> noise;  // each in [-1, 1]
        std::map<std::string, bool> bools;
    };

    NumericDomain() = default;
    explicit NumericDomain(Corner c) : corner_(std::move(c)) {}

    const Corner& corner() const { return corner_; }

    double constant(double c) const { return c; }
    bool boolean(bool b) const { return b; }

    double uncertain(const std::string& name, double center, double radius) const
    {
        if (radius == 0.0) return center;
        auto it = corner_.noise.find(name);
        if (it == corner_.noise.end()) throw MissingSymbol("no value for uncertainty '" + name + "'");
        return center + radius * it->second;
    }
    bool free_bool(const std::string& name) const
    {
        auto it = corner_.bools.find(name);
        if (it == corner_.bools.end()) throw MissingSymbol("no value for free boolean '" + name + "'");
        return it->second;
    }

    // Same form as the symbolic side: decide `a - b sense 0`.
    bool lt(double a, double b) const { return a - b < 0.0; }
    bool le(double a, double b) const { return a - b <= 0.0; }
    bool gt(double a, double b) const { return a - b > 0.0; }
    bool ge(double a, double b) const { return a - b >= 0.0; }

    double ite(bool c, double t, double e) const { return c ? t : e; }
    bool ite(bool c, bool t, bool e) const { return c ? t : e; }
    bool land(bool a, bool b) const { return a && b; }
    bool lor(bool a, bool b) const { return a || b; }
    bool lnot(bool a) const { return !a; }

    Value value(double v) const { return v; }
    Value value(bool v) const { return v; }
    double as_real(const Value& v) const
    {
        if (auto p = std::get_if<double>(&v)) return *p;
        throw LeafKindError("expected a real-valued signal");
    }
    bool as_bool(const Value& v) const
    {
        if (auto p = std::get_if<bool>(&v)) return *p;
        throw LeafKindError("expected a boolean signal");
    }
    bool is_real(const Value& v) const { return std::holds_alternative<double>(v); }

    Value simplify(const Value& v) const { return v; }

    Observation observe(const Value& v, bool) const
    {
        const double x = is_real(v) ? std::get<double>(v) : (std::get<bool>(v) ? 1.0 : 0.0);
        return {{x, x}, 1, {{{x, x}, {}}}};
    }

private:
    Corner corner_;
};

}  // namespace aadd::sim
