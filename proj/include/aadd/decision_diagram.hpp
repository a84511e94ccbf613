#pragma once

// Affine arithmetic decision diagrams: ordered binary decision diagrams over
// a shared table of conditions, with AffineForm or Boolean terminals.
//
// No unique table is kept (the diagrams are OBDDs, not canonical ROBDDs);
// `reduce` restores sharing on demand.

#include "aadd/affine_form.hpp"
#include "aadd/error.hpp"
#include "aadd/interval.hpp"
#include "aadd/lp.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

namespace aadd {

using ConditionIndex = std::uint32_t;
inline constexpr ConditionIndex kTerminal = std::numeric_limits<ConditionIndex>::max();

struct Condition {
    enum class Kind { FreeBool, Compare };

    Kind kind = Kind::FreeBool;
    std::string name;  // FreeBool
    AffineForm form;   // Compare: `form sense 0`
    Sense sense = Sense::LessEq;

    std::string to_string() const
    {
        if (kind == Kind::FreeBool) return name;
        return form.to_string() + ' ' + aadd::to_string(sense) + " 0";
    }
};

struct Literal {
    ConditionIndex index = 0;
    bool value = true;

    friend constexpr bool operator==(const Literal&, const Literal&) = default;
};
using Path = std::vector<Literal>;

class Context;

// Append-only, shared by every diagram built in one Context. Indices define
// the variable order.
class ConditionTable {
public:
    ConditionIndex add(Condition c)
    {
        std::lock_guard lock(mutex_);
        if (c.kind == Condition::Kind::FreeBool) {
            auto it = by_name_.find(c.name);
            if (it != by_name_.end()) return it->second;
        }
        const auto idx = static_cast<ConditionIndex>(conditions_.size());
        if (c.kind == Condition::Kind::FreeBool) by_name_.emplace(c.name, idx);
        conditions_.push_back(std::move(c));
        return idx;
    }

    const Condition& at(ConditionIndex i) const
    {
        std::lock_guard lock(mutex_);
        if (i >= conditions_.size()) throw InvalidArgument("unknown condition index " + std::to_string(i));
        return conditions_[i];
    }

    std::optional<ConditionIndex> find_free_bool(const std::string& name) const
    {
        std::lock_guard lock(mutex_);
        auto it = by_name_.find(name);
        if (it == by_name_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t size() const
    {
        std::lock_guard lock(mutex_);
        return conditions_.size();
    }

private:
    mutable std::mutex mutex_;
    std::deque<Condition> conditions_;  // deque: references stay valid on append
    std::map<std::string, ConditionIndex> by_name_;
};

// ---------------------------------------------------------------------------
// Nodes

using Leaf = std::variant<AffineForm, bool>;

struct Node {
    ConditionIndex index = kTerminal;
    std::shared_ptr<const Node> hi;  // condition true
    std::shared_ptr<const Node> lo;  // condition false
    Leaf leaf;

    bool terminal() const { return index == kTerminal; }
    bool is_real() const { return std::holds_alternative<AffineForm>(leaf); }
    const AffineForm& real() const
    {
        if (!terminal() || !is_real()) throw LeafKindError("node is not a real terminal");
        return std::get<AffineForm>(leaf);
    }
    bool boolean() const
    {
        if (!terminal() || is_real()) throw LeafKindError("node is not a boolean terminal");
        return std::get<bool>(leaf);
    }
};
using NodePtr = std::shared_ptr<const Node>;

namespace detail {

inline NodePtr new_leaf(Leaf v)
{
    auto n = std::make_shared<Node>();
    n->leaf = std::move(v);
    return n;
}

inline const NodePtr& true_leaf()
{
    static const NodePtr n = new_leaf(true);
    return n;
}
inline const NodePtr& false_leaf()
{
    static const NodePtr n = new_leaf(false);
    return n;
}
inline NodePtr bool_leaf(bool b) { return b ? true_leaf() : false_leaf(); }

// Boolean terminals are shared so that hi == lo collapses by pointer.
inline NodePtr make_leaf(Leaf v)
{
    if (auto b = std::get_if<bool>(&v)) return bool_leaf(*b);
    return new_leaf(std::move(v));
}

inline NodePtr make_node(ConditionIndex index, NodePtr hi, NodePtr lo)
{
    if (hi == lo) return hi;
    auto n = std::make_shared<Node>();
    n->index = index;
    n->hi = std::move(hi);
    n->lo = std::move(lo);
    n->leaf = false;
    return n;
}

struct PairHash {
    std::size_t operator()(const std::pair<const Node*, const Node*>& p) const noexcept
    {
        const auto a = reinterpret_cast<std::uintptr_t>(p.first);
        const auto b = reinterpret_cast<std::uintptr_t>(p.second);
        return std::hash<std::uintptr_t>{}(a * 0x9E3779B97F4A7C15ull ^ b);
    }
};

// Distinct nodes in depth-first, true-edge-first order.
inline void collect(const NodePtr& n, std::unordered_set<const Node*>& seen, std::vector<const Node*>& out)
{
    if (!seen.insert(n.get()).second) return;
    out.push_back(n.get());
    if (!n->terminal()) {
        collect(n->hi, seen, out);
        collect(n->lo, seen, out);
    }
}

}  // namespace detail

class Aadd {
public:
    Aadd() : root_(detail::make_leaf(AffineForm{})) {}
    template <class T>
        requires(std::is_arithmetic_v<T> && !std::is_same_v<T, bool>)
    Aadd(T c) : root_(detail::make_leaf(AffineForm::exact(static_cast<double>(c))))
    {
    }
    Aadd(const AffineForm& f) : root_(detail::make_leaf(f)) {}
    explicit Aadd(NodePtr root) : root_(std::move(root))
    {
        if (!root_) throw InvalidArgument("null diagram root");
    }

    static Aadd real(const AffineForm& f) { return Aadd(f); }
    static Aadd boolean(bool b) { return Aadd(detail::bool_leaf(b)); }
    static Aadd uncertain(double center, double radius) { return Aadd(AffineForm::uncertain(center, radius)); }
    // Decision on condition `index`: true on its true edge.
    static Aadd condition(ConditionIndex index)
    {
        return Aadd(detail::make_node(index, detail::true_leaf(), detail::false_leaf()));
    }

    const NodePtr& root() const { return root_; }
    bool is_terminal() const { return root_->terminal(); }

    bool is_real() const { return first_leaf()->is_real(); }
    bool is_bool() const { return !is_real(); }

    const AffineForm& as_real() const { return root_->real(); }
    bool as_bool() const { return root_->boolean(); }

    std::size_t node_count() const { return nodes().size(); }
    std::size_t leaf_count() const
    {
        std::size_t n = 0;
        for (const Node* p : nodes()) n += p->terminal();
        return n;
    }

    // Distinct nodes, depth-first.
    std::vector<const Node*> nodes() const
    {
        std::unordered_set<const Node*> seen;
        std::vector<const Node*> out;
        detail::collect(root_, seen, out);
        return out;
    }

    // Index strictly increases along every edge; all terminals of one kind.
    bool is_ordered() const
    {
        const auto all = nodes();
        std::optional<bool> real;
        for (const Node* n : all) {
            if (n->terminal()) {
                if (real && *real != n->is_real()) return false;
                real = n->is_real();
                continue;
            }
            if (!n->hi || !n->lo) return false;
            for (const Node* c : {n->hi.get(), n->lo.get()}) {
                if (!c->terminal() && c->index <= n->index) return false;
            }
        }
        return true;
    }

    // Same structure (pointer-identical graph).
    bool same(const Aadd& o) const { return root_ == o.root_; }

private:
    const Node* first_leaf() const
    {
        const Node* n = root_.get();
        while (!n->terminal()) n = n->hi.get();
        return n;
    }

    NodePtr root_;
};

// ---------------------------------------------------------------------------
// Context: condition table, LP access, statistics.

struct DiagramStats {
    std::atomic<std::size_t> lp_calls{0};
    std::atomic<std::size_t> conditions_created{0};
    std::atomic<std::size_t> feasibility_cache_hits{0};
};

class Context {
public:
    Context() = default;
    Context(const Context&) = delete;
    Context& operator=(const Context&) = delete;

    ConditionTable& conditions() { return table_; }
    const ConditionTable& conditions() const { return table_; }
    const Condition& condition(ConditionIndex i) const { return table_.at(i); }

    DiagramStats& stats() { return stats_; }
    const DiagramStats& stats() const { return stats_; }

    // LP instances are written here when set (the CLI's --dump-lp).
    void set_lp_dump(std::ostream* os) { dump_ = os; }

    Aadd free_bool(const std::string& name)
    {
        Condition c;
        c.kind = Condition::Kind::FreeBool;
        c.name = name;
        return Aadd::condition(table_.add(std::move(c)));
    }

    ConditionIndex add_compare(const AffineForm& form, Sense sense)
    {
        Condition c;
        c.kind = Condition::Kind::Compare;
        c.form = form;
        c.sense = sense;
        stats_.conditions_created.fetch_add(1, std::memory_order_relaxed);
        return table_.add(std::move(c));
    }

    std::vector<LinearConstraint> constraints(const Path& path) const
    {
        std::vector<LinearConstraint> out;
        for (const Literal& l : path) {
            const Condition& c = table_.at(l.index);
            if (c.kind == Condition::Kind::Compare) out.push_back({c.form, c.sense, l.value});
        }
        return out;
    }

    // Closed feasibility of a path condition; cached by literal set.
    bool feasible(const Path& path)
    {
        std::vector<std::uint64_t> key;
        for (const Literal& l : path) {
            if (table_.at(l.index).kind == Condition::Kind::Compare) {
                key.push_back((std::uint64_t{l.index} << 1) | std::uint64_t{l.value});
            }
        }
        if (key.empty()) return true;
        std::sort(key.begin(), key.end());
        {
            std::lock_guard lock(cache_mutex_);
            auto it = feasible_cache_.find(key);
            if (it != feasible_cache_.end()) {
                stats_.feasibility_cache_hits.fetch_add(1, std::memory_order_relaxed);
                return it->second;
            }
        }
        const bool r = constraints_feasible(constraints(path), options());
        std::lock_guard lock(cache_mutex_);
        feasible_cache_.emplace(std::move(key), r);
        return r;
    }

    BoundsResult tighten(const AffineForm& f, const Path& path)
    {
        const auto cs = constraints(path);
        if (cs.empty()) return {BoundsResult::Status::Feasible, f.range(), true};
        return aadd::tighten(f, cs, options());
    }

    TightenOptions options()
    {
        TightenOptions o;
        // Closed feasibility: regions that shrink to a boundary point stay
        // alive, which keeps numeric runs that hit a threshold exactly inside.
        o.strict_emptiness = false;
        o.dump = dump_;
        o.lp_calls = &stats_.lp_calls;
        return o;
    }

private:
    ConditionTable table_;
    DiagramStats stats_;
    std::ostream* dump_ = nullptr;
    std::mutex cache_mutex_;
    std::map<std::vector<std::uint64_t>, bool> feasible_cache_;
};

// ---------------------------------------------------------------------------
// Apply

namespace detail {

template <class Op>
NodePtr apply_rec(const NodePtr& x, const NodePtr& y, Op& op,
                  std::unordered_map<std::pair<const Node*, const Node*>, NodePtr, PairHash>& memo)
{
    if (x->terminal() && y->terminal()) return make_leaf(op(x->leaf, y->leaf));
    const auto key = std::make_pair(x.get(), y.get());
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const ConditionIndex top = std::min(x->index, y->index);
    const NodePtr& xh = x->index == top ? x->hi : x;
    const NodePtr& xl = x->index == top ? x->lo : x;
    const NodePtr& yh = y->index == top ? y->hi : y;
    const NodePtr& yl = y->index == top ? y->lo : y;
    NodePtr hi = apply_rec(xh, yh, op, memo);
    NodePtr lo = apply_rec(xl, yl, op, memo);
    NodePtr r = make_node(top, std::move(hi), std::move(lo));
    memo.emplace(key, r);
    return r;
}

template <class F>
NodePtr map_rec(const NodePtr& x, F& f, std::unordered_map<const Node*, NodePtr>& memo)
{
    if (auto it = memo.find(x.get()); it != memo.end()) return it->second;
    NodePtr r = x->terminal() ? f(x) : make_node(x->index, map_rec(x->hi, f, memo), map_rec(x->lo, f, memo));
    memo.emplace(x.get(), r);
    return r;
}

inline const AffineForm& real_of(const Leaf& l)
{
    if (auto p = std::get_if<AffineForm>(&l)) return *p;
    throw LeafKindError("expected a real-valued diagram, got a boolean one");
}
inline bool bool_of(const Leaf& l)
{
    if (auto p = std::get_if<bool>(&l)) return *p;
    throw LeafKindError("expected a boolean diagram, got a real-valued one");
}

}  // namespace detail

// Leafwise binary operation; op maps (Leaf, Leaf) -> Leaf.
template <class Op>
Aadd apply_binary(const Aadd& x, const Aadd& y, Op op)
{
    std::unordered_map<std::pair<const Node*, const Node*>, NodePtr, detail::PairHash> memo;
    return Aadd(detail::apply_rec(x.root(), y.root(), op, memo));
}

// Leafwise unary map; f maps a terminal NodePtr to a replacement subdiagram.
template <class F>
Aadd map_terminals(const Aadd& x, F f)
{
    std::unordered_map<const Node*, NodePtr> memo;
    return Aadd(detail::map_rec(x.root(), f, memo));
}

template <class F>
Aadd map_real(const Aadd& x, F f)
{
    return map_terminals(x, [&](const NodePtr& n) { return detail::make_leaf(f(detail::real_of(n->leaf))); });
}

template <class F>
Aadd apply_real(const Aadd& x, const Aadd& y, F f)
{
    return apply_binary(x, y, [&](const Leaf& a, const Leaf& b) -> Leaf {
        return f(detail::real_of(a), detail::real_of(b));
    });
}

inline Aadd operator+(const Aadd& x, const Aadd& y) { return apply_real(x, y, [](auto& a, auto& b) { return add(a, b); }); }
inline Aadd operator-(const Aadd& x, const Aadd& y) { return apply_real(x, y, [](auto& a, auto& b) { return sub(a, b); }); }
inline Aadd operator*(const Aadd& x, const Aadd& y) { return apply_real(x, y, [](auto& a, auto& b) { return mul(a, b); }); }
inline Aadd operator/(const Aadd& x, const Aadd& y) { return apply_real(x, y, [](auto& a, auto& b) { return div(a, b); }); }
inline Aadd operator-(const Aadd& x) { return map_real(x, [](const AffineForm& a) { return -a; }); }
inline Aadd scale(double c, const Aadd& x) { return map_real(x, [c](const AffineForm& a) { return scale(c, a); }); }
inline Aadd operator*(double c, const Aadd& x) { return scale(c, x); }
inline Aadd operator*(const Aadd& x, double c) { return scale(c, x); }

inline Aadd operator&&(const Aadd& x, const Aadd& y)
{
    return apply_binary(x, y, [](const Leaf& a, const Leaf& b) -> Leaf { return detail::bool_of(a) && detail::bool_of(b); });
}
inline Aadd operator||(const Aadd& x, const Aadd& y)
{
    return apply_binary(x, y, [](const Leaf& a, const Leaf& b) -> Leaf { return detail::bool_of(a) || detail::bool_of(b); });
}
inline Aadd operator!(const Aadd& x)
{
    return map_terminals(x, [](const NodePtr& n) { return detail::bool_leaf(!detail::bool_of(n->leaf)); });
}
inline Aadd logical_xor(const Aadd& x, const Aadd& y)
{
    return apply_binary(x, y, [](const Leaf& a, const Leaf& b) -> Leaf { return detail::bool_of(a) != detail::bool_of(b); });
}
inline Aadd logical_and(const Aadd& x, const Aadd& y) { return x && y; }
inline Aadd logical_or(const Aadd& x, const Aadd& y) { return x || y; }
inline Aadd logical_not(const Aadd& x) { return !x; }

// ---------------------------------------------------------------------------
// ite: Shannon merge of t and e under a Boolean diagram.

namespace detail {

struct TripleHash {
    std::size_t operator()(const std::array<const Node*, 3>& k) const noexcept
    {
        std::size_t h = 0;
        for (const Node* p : k) h = h * 0x9E3779B97F4A7C15ull ^ std::hash<const void*>{}(p);
        return h;
    }
};

inline NodePtr ite_rec(const NodePtr& c, const NodePtr& t, const NodePtr& e,
                       std::unordered_map<std::array<const Node*, 3>, NodePtr, TripleHash>& memo)
{
    if (c->terminal()) return bool_of(c->leaf) ? t : e;
    if (t == e) return t;
    const std::array<const Node*, 3> key{c.get(), t.get(), e.get()};
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const ConditionIndex top = std::min({c->index, t->index, e->index});
    auto hi_of = [top](const NodePtr& n) -> const NodePtr& { return n->index == top ? n->hi : n; };
    auto lo_of = [top](const NodePtr& n) -> const NodePtr& { return n->index == top ? n->lo : n; };
    NodePtr hi = ite_rec(hi_of(c), hi_of(t), hi_of(e), memo);
    NodePtr lo = ite_rec(lo_of(c), lo_of(t), lo_of(e), memo);
    NodePtr r = make_node(top, std::move(hi), std::move(lo));
    memo.emplace(key, r);
    return r;
}

inline bool leaf_kind_real(const Aadd& x) { return x.is_real(); }

}  // namespace detail

inline Aadd ite(const Aadd& cond, const Aadd& t, const Aadd& e)
{
    if (t.is_real() != e.is_real()) throw LeafKindError("ite: branches have different leaf kinds");
    if (cond.is_real()) throw LeafKindError("ite: condition must be boolean");
    std::unordered_map<std::array<const Node*, 3>, NodePtr, detail::TripleHash> memo;
    return Aadd(detail::ite_rec(cond.root(), t.root(), e.root(), memo));
}

// ---------------------------------------------------------------------------
// Paths

// Visits every root-to-terminal path (true edge first).
template <class F>
void for_each_path(const Aadd& x, F&& f)
{
    Path path;
    std::function<void(const NodePtr&)> rec = [&](const NodePtr& n) {
        if (n->terminal()) {
            f(static_cast<const Path&>(path), n);
            return;
        }
        path.push_back({n->index, true});
        rec(n->hi);
        path.back().value = false;
        rec(n->lo);
        path.pop_back();
    };
    rec(x.root());
}

// ---------------------------------------------------------------------------
// Relational operators

enum class Tri { False, True, Unknown };

// Three-valued decision of `x sense 0` from a (tightened) range of x.
inline Tri decide(Interval r, Sense s)
{
    switch (s) {
        case Sense::Less:
            if (r.hi < 0.0) return Tri::True;
            if (r.lo >= 0.0) return Tri::False;
            break;
        case Sense::LessEq:
            if (r.hi <= 0.0) return Tri::True;
            if (r.lo > 0.0) return Tri::False;
            break;
        case Sense::Greater:
            if (r.lo > 0.0) return Tri::True;
            if (r.hi <= 0.0) return Tri::False;
            break;
        case Sense::GreaterEq:
            if (r.lo >= 0.0) return Tri::True;
            if (r.hi < 0.0) return Tri::False;
            break;
        case Sense::Equal:
            if (r.lo == 0.0 && r.hi == 0.0) return Tri::True;
            if (r.hi < 0.0 || r.lo > 0.0) return Tri::False;
            break;
    }
    return Tri::Unknown;
}

// Range used for decisions: uncertain values get the global rounding slack so
// that threshold ties at corner assignments stay undecided.
inline Interval decision_range(const AffineForm& f, Interval r)
{
    if (f.is_constant() && f.err() == 0.0) return r;
    const double s = kSlack * (1.0 + std::abs(f.center()) + f.total_radius());
    return {r.lo - s, r.hi + s};
}

// `x sense 0` as a Boolean diagram.
inline Aadd compare(Context& ctx, const Aadd& x, Sense sense)
{
    const auto all = x.nodes();
    std::unordered_map<const Node*, NodePtr> result;
    std::vector<const Node*> pending;
    for (const Node* n : all) {
        if (!n->terminal()) continue;
        const AffineForm& f = detail::real_of(n->leaf);
        const Tri d = decide(decision_range(f, f.range()), sense);
        if (d == Tri::Unknown) {
            pending.push_back(n);
        } else {
            result.emplace(n, detail::bool_leaf(d == Tri::True));
        }
    }

    if (!pending.empty()) {
        enum : unsigned { kTrue = 1, kFalse = 2, kUnknown = 4 };
        std::unordered_map<const Node*, unsigned> seen;
        for (const Node* n : pending) seen.emplace(n, 0u);

        // Only descend into subgraphs that reach a pending leaf.
        std::unordered_map<const Node*, bool> reaches;
        std::function<bool(const Node*)> reach = [&](const Node* n) -> bool {
            if (auto it = reaches.find(n); it != reaches.end()) return it->second;
            const bool r = n->terminal() ? seen.count(n) > 0 : (reach(n->hi.get()) | reach(n->lo.get()));
            reaches.emplace(n, r);
            return r;
        };

        Path path;
        std::function<void(const Node*)> walk = [&](const Node* n) {
            if (!reach(n)) return;
            if (n->terminal()) {
                unsigned& flags = seen[n];
                if (flags & kUnknown) return;
                const AffineForm& f = std::get<AffineForm>(n->leaf);
                const BoundsResult b = ctx.tighten(f, path);
                if (!b.feasible()) return;
                switch (decide(decision_range(f, b.range), sense)) {
                    case Tri::True: flags |= kTrue; break;
                    case Tri::False: flags |= kFalse; break;
                    case Tri::Unknown: flags |= kUnknown; break;
                }
                return;
            }
            path.push_back({n->index, true});
            walk(n->hi.get());
            path.back().value = false;
            walk(n->lo.get());
            path.pop_back();
        };
        walk(x.root().get());

        for (const Node* n : pending) {
            const unsigned flags = seen[n];
            if (flags == kTrue || flags == kFalse) {
                result.emplace(n, detail::bool_leaf(flags == kTrue));
            } else if (flags == 0) {
                result.emplace(n, detail::false_leaf());  // unreachable leaf
            } else {
                const ConditionIndex c = ctx.add_compare(std::get<AffineForm>(n->leaf), sense);
                result.emplace(n, Aadd::condition(c).root());
            }
        }
    }

    return map_terminals(x, [&](const NodePtr& n) { return result.at(n.get()); });
}

inline Aadd compare(Context& ctx, const Aadd& x, const Aadd& y, Sense sense) { return compare(ctx, x - y, sense); }
inline Aadd lt(Context& ctx, const Aadd& x, const Aadd& y) { return compare(ctx, x - y, Sense::Less); }
inline Aadd le(Context& ctx, const Aadd& x, const Aadd& y) { return compare(ctx, x - y, Sense::LessEq); }
inline Aadd gt(Context& ctx, const Aadd& x, const Aadd& y) { return compare(ctx, x - y, Sense::Greater); }
inline Aadd ge(Context& ctx, const Aadd& x, const Aadd& y) { return compare(ctx, x - y, Sense::GreaterEq); }
inline Aadd eq(Context& ctx, const Aadd& x, const Aadd& y) { return compare(ctx, x - y, Sense::Equal); }

// ---------------------------------------------------------------------------
// Reduction

// Merges terminals equal within 1e-9, shares isomorphic internal nodes and
// drops tests whose children coincide. Purely structural.
inline Aadd reduce(const Aadd& x, double tol = kSlack)
{
    const auto all = x.nodes();
    std::unordered_map<const Node*, NodePtr> repl;

    // Terminals: sort by center and compare neighbours within tolerance.
    std::vector<const Node*> reals;
    for (const Node* n : all) {
        if (!n->terminal()) continue;
        if (n->is_real()) {
            reals.push_back(n);
        } else {
            repl.emplace(n, detail::bool_leaf(std::get<bool>(n->leaf)));
        }
    }
    std::stable_sort(reals.begin(), reals.end(), [](const Node* a, const Node* b) {
        return std::get<AffineForm>(a->leaf).center() < std::get<AffineForm>(b->leaf).center();
    });
    std::unordered_map<const Node*, NodePtr> owner;  // representative node -> shared ptr
    for (std::size_t i = 0; i < reals.size(); ++i) {
        if (repl.count(reals[i])) continue;
        const AffineForm& fi = std::get<AffineForm>(reals[i]->leaf);
        NodePtr rep = detail::make_leaf(fi);
        repl.emplace(reals[i], rep);
        for (std::size_t j = i + 1; j < reals.size(); ++j) {
            const AffineForm& fj = std::get<AffineForm>(reals[j]->leaf);
            if (fj.center() - fi.center() > tol) break;
            if (!repl.count(reals[j]) && fi.equal_within(fj, tol)) repl.emplace(reals[j], rep);
        }
    }

    struct Key {
        ConditionIndex index;
        const Node* hi;
        const Node* lo;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept
        {
            return detail::PairHash{}({k.hi, k.lo}) ^ (std::size_t{k.index} * 0x85EBCA6Bull);
        }
    };
    std::unordered_map<Key, NodePtr, KeyHash> unique;
    std::function<NodePtr(const NodePtr&)> rec = [&](const NodePtr& n) -> NodePtr {
        if (auto it = repl.find(n.get()); it != repl.end()) return it->second;
        NodePtr hi = rec(n->hi);
        NodePtr lo = rec(n->lo);
        NodePtr r;
        if (hi == lo) {
            r = hi;
        } else {
            const Key k{n->index, hi.get(), lo.get()};
            auto it = unique.find(k);
            if (it != unique.end()) {
                r = it->second;
            } else {
                r = detail::make_node(n->index, hi, lo);
                unique.emplace(k, r);
            }
        }
        repl.emplace(n.get(), r);
        return r;
    };
    return Aadd(rec(x.root()));
}

// Removes branches whose path condition is infeasible (closed relaxation).
// Unfolds shared subgraphs; follow with reduce to restore sharing.
inline Aadd prune(Context& ctx, const Aadd& x)
{
    Path path;
    std::function<NodePtr(const NodePtr&)> rec = [&](const NodePtr& n) -> NodePtr {
        if (n->terminal()) return n;
        bool t_ok = true;
        bool f_ok = true;
        if (ctx.condition(n->index).kind == Condition::Kind::Compare) {
            path.push_back({n->index, true});
            t_ok = ctx.feasible(path);
            path.back().value = false;
            f_ok = ctx.feasible(path);
            path.pop_back();
        }
        if (t_ok && !f_ok) {
            path.push_back({n->index, true});
            NodePtr r = rec(n->hi);
            path.pop_back();
            return r;
        }
        if (f_ok && !t_ok) {
            path.push_back({n->index, false});
            NodePtr r = rec(n->lo);
            path.pop_back();
            return r;
        }
        path.push_back({n->index, true});
        NodePtr hi = rec(n->hi);
        path.back().value = false;
        NodePtr lo = rec(n->lo);
        path.pop_back();
        if (hi == n->hi && lo == n->lo) return n;
        return detail::make_node(n->index, std::move(hi), std::move(lo));
    };
    return Aadd(rec(x.root()));
}

inline Aadd simplify(Context& ctx, const Aadd& x) { return reduce(prune(ctx, x)); }

// ---------------------------------------------------------------------------
// Concrete evaluation

struct Assignment {
    NoiseAssignment noise;
    std::map<std::string, bool> bools;
};

inline bool condition_value(const Context& ctx, ConditionIndex i, const Assignment& a)
{
    const Condition& c = ctx.condition(i);
    if (c.kind == Condition::Kind::FreeBool) {
        auto it = a.bools.find(c.name);
        if (it == a.bools.end()) throw MissingSymbol("no value for free boolean '" + c.name + "'");
        return it->second;
    }
    return holds(c.form.evaluate(a.noise), c.sense);
}

inline const Node& select_leaf(const Context& ctx, const Aadd& x, const Assignment& a)
{
    const Node* n = x.root().get();
    while (!n->terminal()) n = condition_value(ctx, n->index, a) ? n->hi.get() : n->lo.get();
    return *n;
}

// err is taken as 0, both in conditions and in the selected leaf.
inline double evaluate_real(const Context& ctx, const Aadd& x, const Assignment& a)
{
    return detail::real_of(select_leaf(ctx, x, a).leaf).evaluate(a.noise);
}
inline bool evaluate_bool(const Context& ctx, const Aadd& x, const Assignment& a)
{
    return detail::bool_of(select_leaf(ctx, x, a).leaf);
}
inline std::variant<double, bool> evaluate(const Context& ctx, const Aadd& x, const Assignment& a)
{
    const Node& n = select_leaf(ctx, x, a);
    if (n.is_real()) return std::get<AffineForm>(n.leaf).evaluate(a.noise);
    return std::get<bool>(n.leaf);
}

// ---------------------------------------------------------------------------
// Ranges

struct LeafRange {
    Path path;
    Interval range;  // booleans map to [0,0] / [1,1]
    bool tightened = true;
    const Node* leaf = nullptr;
};

// One entry per feasible root-to-terminal path.
inline std::vector<LeafRange> per_leaf_ranges(Context& ctx, const Aadd& x)
{
    std::vector<LeafRange> out;
    for_each_path(x, [&](const Path& p, const NodePtr& n) {
        if (n->is_real()) {
            const BoundsResult b = ctx.tighten(std::get<AffineForm>(n->leaf), p);
            if (b.feasible()) out.push_back({p, b.range, b.tightened, n.get()});
        } else if (ctx.feasible(p)) {
            const double v = std::get<bool>(n->leaf) ? 1.0 : 0.0;
            out.push_back({p, {v, v}, true, n.get()});
        }
    });
    return out;
}

inline Interval hull_of(const std::vector<LeafRange>& leaves)
{
    if (leaves.empty()) throw InconsistencyError("every path of the diagram is infeasible");
    Interval h = leaves.front().range;
    for (const auto& l : leaves) h = Interval::hull(h, l.range);
    return h;
}

inline Interval overall_range(Context& ctx, const Aadd& x) { return hull_of(per_leaf_ranges(ctx, x)); }

inline std::string path_to_string(const Context& ctx, const Path& p)
{
    std::string s;
    for (const Literal& l : p) {
        if (!s.empty()) s += " & ";
        const Condition& c = ctx.condition(l.index);
        s += l.value ? "(" + c.to_string() + ")" : "!(" + c.to_string() + ")";
    }
    return s.empty() ? "true" : s;
}

// ---------------------------------------------------------------------------
// Dumps

inline nlohmann::json condition_to_json(const Context& ctx, ConditionIndex i)
{
    const Condition& c = ctx.condition(i);
    if (c.kind == Condition::Kind::FreeBool) return {{"index", i}, {"kind", "free_bool"}, {"name", c.name}};
    return {{"index", i}, {"kind", "compare"}, {"form", c.form}, {"sense", to_string(c.sense)}};
}

// {"root": id, "nodes": [...], "conditions": [...]}; node ids are DFS order.
inline nlohmann::json to_json(const Context& ctx, const Aadd& x)
{
    const auto all = x.nodes();
    std::unordered_map<const Node*, std::size_t> id;
    for (std::size_t i = 0; i < all.size(); ++i) id.emplace(all[i], i);
    nlohmann::json nodes = nlohmann::json::array();
    std::vector<ConditionIndex> used;
    for (const Node* n : all) {
        if (n->terminal()) {
            if (n->is_real()) {
                nodes.push_back({{"id", id[n]}, {"leaf", std::get<AffineForm>(n->leaf)}});
            } else {
                nodes.push_back({{"id", id[n]}, {"leaf", std::get<bool>(n->leaf)}});
            }
        } else {
            nodes.push_back({{"id", id[n]}, {"index", n->index}, {"hi", id[n->hi.get()]}, {"lo", id[n->lo.get()]}});
            used.push_back(n->index);
        }
    }
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    nlohmann::json conds = nlohmann::json::array();
    for (ConditionIndex i : used) conds.push_back(condition_to_json(ctx, i));
    return {{"root", 0}, {"nodes", std::move(nodes)}, {"conditions", std::move(conds)}};
}

inline std::string to_dot(const Context& ctx, const Aadd& x)
{
    const auto all = x.nodes();
    std::unordered_map<const Node*, std::size_t> id;
    for (std::size_t i = 0; i < all.size(); ++i) id.emplace(all[i], i);
    std::ostringstream os;
    os << "digraph aadd {\n";
    for (const Node* n : all) {
        os << "  n" << id[n];
        if (n->terminal()) {
            const std::string label = n->is_real() ? std::get<AffineForm>(n->leaf).to_string()
                                                   : (std::get<bool>(n->leaf) ? "true" : "false");
            os << " [shape=box,label=\"" << label << "\"];\n";
        } else {
            os << " [label=\"c" << n->index << ": " << ctx.condition(n->index).to_string() << "\"];\n";
            os << "  n" << id[n] << " -> n" << id[n->hi.get()] << ";\n";
            os << "  n" << id[n] << " -> n" << id[n->lo.get()] << " [style=dashed];\n";
        }
    }
    os << "}\n";
    return os.str();
}

}  // namespace aadd
