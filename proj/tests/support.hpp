#pragma once

// Random generators and independent oracles shared by the unit, property and
// acceptance tests.

#include "aadd/decision_diagram.hpp"
#include "aadd/lp.hpp"

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace testsupport {

using namespace aadd;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(gen_); }
    // Multiples of 1/den in [lo, hi]: all arithmetic on these stays exact.
    double dyadic(int lo, int hi, int den) { return integer(lo * den, hi * den) / static_cast<double>(den); }
    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

inline std::vector<NoiseSymbolId> fresh_symbols(std::size_t n)
{
    std::vector<NoiseSymbolId> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back(allocate_noise_symbol());
    return ids;
}

inline AffineForm random_form(Rng& r, const std::vector<NoiseSymbolId>& ids, double err_prob = 0.0)
{
    std::vector<AffineForm::Term> terms;
    for (auto id : ids) {
        if (r.coin(0.7)) terms.push_back({id, r.uniform(-2.0, 2.0)});
    }
    const double err = r.coin(err_prob) ? r.uniform(0.0, 0.5) : 0.0;
    return AffineForm::from_parts(r.uniform(-3.0, 3.0), std::move(terms), err);
}

inline NoiseAssignment random_assignment(Rng& r, const std::vector<NoiseSymbolId>& ids, bool dyadic = false)
{
    NoiseAssignment a;
    for (auto id : ids) a[id] = dyadic ? r.dyadic(-1, 1, 8) : (r.coin(0.2) ? (r.coin() ? 1.0 : -1.0) : r.uniform(-1, 1));
    return a;
}

// ---------------------------------------------------------------------------
// Straight-line programs with if/else, run symbolically and concretely.

enum class Op { Add, Sub, Scale, Shift, Mul };

struct Assign {
    int dst = 0;
    Op op = Op::Add;
    int a = 0;
    int b = 0;
    double c = 0.0;
};
struct If;
using Stmt = std::variant<Assign, std::shared_ptr<If>>;
struct If {
    int var = 0;
    Sense sense = Sense::Less;
    double c = 0.0;
    std::vector<Stmt> then_block;
    std::vector<Stmt> else_block;
};

struct Program {
    int vars = 0;
    std::vector<AffineForm> init;  // one per variable
    std::vector<Stmt> body;
    int output = 0;
    bool nonlinear = false;
};

struct ProgramShape {
    int max_depth = 6;
    int max_symbols = 5;
    int max_branches = 4;
    int vars = 4;
    bool nonlinear = false;
};

class ProgramGen {
public:
    ProgramGen(Rng& r, ProgramShape s) : r_(r), s_(s) {}

    Program make(std::vector<NoiseSymbolId>& ids)
    {
        Program p;
        p.vars = s_.vars;
        p.nonlinear = s_.nonlinear;
        ids = fresh_symbols(static_cast<std::size_t>(r_.integer(1, s_.max_symbols)));
        for (int v = 0; v < p.vars; ++v) {
            std::vector<AffineForm::Term> terms;
            for (auto id : ids) {
                if (r_.coin(0.6)) terms.push_back({id, r_.dyadic(-2, 2, 2)});
            }
            p.init.push_back(AffineForm::from_parts(r_.dyadic(-3, 3, 2), std::move(terms), 0.0));
        }
        tainted_.assign(static_cast<std::size_t>(p.vars), false);
        branch_dsts_.clear();
        nominal_.clear();
        for (const auto& f : p.init) nominal_.push_back(f.center());
        branches_ = r_.integer(1, s_.max_branches);
        p.body = block(1, r_.integer(3, 7));
        // prefer a variable written under a branch
        p.output = branch_dsts_.empty() || r_.coin(0.2)
                       ? r_.integer(0, p.vars - 1)
                       : branch_dsts_[static_cast<std::size_t>(r_.integer(0, static_cast<int>(branch_dsts_.size()) - 1))];
        return p;
    }

private:
    std::vector<Stmt> block(int depth, int len)
    {
        std::vector<Stmt> out;
        for (int i = 0; i < len; ++i) {
            if (branches_ > 0 && depth < s_.max_depth && r_.coin(0.5)) {
                --branches_;
                auto f = std::make_shared<If>();
                f->var = clean_var();
                if (f->var < 0) {
                    ++branches_;
                    out.push_back(assign());
                    continue;
                }
                f->sense = static_cast<Sense>(r_.integer(0, 4));
                // threshold near the value at the all-zero assignment, so most conditions stay undecided
                f->c = std::round(nominal_[static_cast<std::size_t>(f->var)] * 4.0) / 4.0 + r_.dyadic(-1, 1, 4);
                const bool taken = holds(nominal_[static_cast<std::size_t>(f->var)] - f->c, f->sense);
                const auto saved = tainted_;
                const auto nominal = nominal_;
                f->then_block = block(depth + 1, r_.integer(1, 3));
                auto after_then = tainted_;
                auto nominal_then = nominal_;
                tainted_ = saved;
                nominal_ = nominal;
                f->else_block = block(depth + 1, r_.integer(1, 3));
                if (taken) nominal_ = nominal_then;
                for (std::size_t v = 0; v < tainted_.size(); ++v) tainted_[v] = tainted_[v] || after_then[v];
                out.push_back(std::move(f));
            } else {
                const Assign a = assign();
                if (depth > 1) branch_dsts_.push_back(a.dst);
                out.push_back(a);
            }
        }
        return out;
    }

    int clean_var()
    {
        std::vector<int> ok;
        for (std::size_t v = 0; v < tainted_.size(); ++v) {
            if (!tainted_[v]) ok.push_back(static_cast<int>(v));
        }
        if (ok.empty()) return -1;
        return ok[static_cast<std::size_t>(r_.integer(0, static_cast<int>(ok.size()) - 1))];
    }

    Assign assign()
    {
        const int n = static_cast<int>(tainted_.size());
        Assign a;
        a.dst = r_.integer(0, n - 1);
        a.a = r_.integer(0, n - 1);
        a.b = r_.integer(0, n - 1);
        const int k = r_.integer(0, s_.nonlinear ? 4 : 3);
        a.op = static_cast<Op>(k);
        static constexpr double kScales[] = {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0};
        a.c = a.op == Op::Scale ? kScales[r_.integer(0, 6)] : r_.dyadic(-2, 2, 2);
        // Multiplication results never feed a condition (err is 0 there).
        bool t = tainted_[static_cast<std::size_t>(a.a)];
        if (a.op == Op::Add || a.op == Op::Sub || a.op == Op::Mul) t = t || tainted_[static_cast<std::size_t>(a.b)];
        if (a.op == Op::Mul) t = true;
        tainted_[static_cast<std::size_t>(a.dst)] = t;
        const double x = nominal_[static_cast<std::size_t>(a.a)], y = nominal_[static_cast<std::size_t>(a.b)];
        double v = 0.0;
        switch (a.op) {
            case Op::Add: v = x + y; break;
            case Op::Sub: v = x - y; break;
            case Op::Scale: v = a.c * x; break;
            case Op::Shift: v = x + a.c; break;
            case Op::Mul: v = x * y; break;
        }
        nominal_[static_cast<std::size_t>(a.dst)] = v;
        return a;
    }

    Rng& r_;
    ProgramShape s_;
    std::vector<bool> tainted_;
    std::vector<int> branch_dsts_;
    std::vector<double> nominal_;
    int branches_ = 0;
};

template <class T, class Cmp, class Ite>
void execute(const std::vector<Stmt>& body, std::vector<T>& env, Cmp&& cmp, Ite&& ite)
{
    for (const Stmt& s : body) {
        if (const Assign* a = std::get_if<Assign>(&s)) {
            const T& x = env[static_cast<std::size_t>(a->a)];
            const T& y = env[static_cast<std::size_t>(a->b)];
            T r;
            switch (a->op) {
                case Op::Add: r = x + y; break;
                case Op::Sub: r = x - y; break;
                case Op::Scale: r = a->c * x; break;
                case Op::Shift: r = x + T(a->c); break;
                case Op::Mul: r = x * y; break;
            }
            env[static_cast<std::size_t>(a->dst)] = r;
        } else {
            const If& f = *std::get<std::shared_ptr<If>>(s);
            const auto cond = cmp(env[static_cast<std::size_t>(f.var)] - T(f.c), f.sense);
            std::vector<T> then_env = env;
            std::vector<T> else_env = env;
            execute(f.then_block, then_env, cmp, ite);
            execute(f.else_block, else_env, cmp, ite);
            for (std::size_t v = 0; v < env.size(); ++v) env[v] = ite(cond, then_env[v], else_env[v]);
        }
    }
}

inline Aadd run_symbolic(Context& ctx, const Program& p)
{
    std::vector<Aadd> env;
    for (const auto& f : p.init) env.emplace_back(f);
    execute(
        p.body, env, [&](const Aadd& x, Sense s) { return compare(ctx, x, s); },
        [](const Aadd& c, const Aadd& t, const Aadd& e) { return ite(c, t, e); });
    return env[static_cast<std::size_t>(p.output)];
}

inline double run_concrete(const Program& p, const NoiseAssignment& a)
{
    std::vector<double> env;
    for (const auto& f : p.init) env.push_back(f.evaluate(a));
    // Concrete semantics: follow only the taken branch.
    struct Exec {
        static void run(const std::vector<Stmt>& body, std::vector<double>& env)
        {
            for (const Stmt& s : body) {
                if (const Assign* a = std::get_if<Assign>(&s)) {
                    const double x = env[static_cast<std::size_t>(a->a)];
                    const double y = env[static_cast<std::size_t>(a->b)];
                    double r = 0.0;
                    switch (a->op) {
                        case Op::Add: r = x + y; break;
                        case Op::Sub: r = x - y; break;
                        case Op::Scale: r = a->c * x; break;
                        case Op::Shift: r = x + a->c; break;
                        case Op::Mul: r = x * y; break;
                    }
                    env[static_cast<std::size_t>(a->dst)] = r;
                } else {
                    const If& f = *std::get<std::shared_ptr<If>>(s);
                    if (holds(env[static_cast<std::size_t>(f.var)] - f.c, f.sense)) {
                        run(f.then_block, env);
                    } else {
                        run(f.else_block, env);
                    }
                }
            }
        }
    };
    Exec::run(p.body, env);
    return env[static_cast<std::size_t>(p.output)];
}

inline std::size_t count_branches(const std::vector<Stmt>& body)
{
    std::size_t n = 0;
    for (const Stmt& s : body) {
        if (auto f = std::get_if<std::shared_ptr<If>>(&s)) {
            n += 1 + count_branches((*f)->then_block) + count_branches((*f)->else_block);
        }
    }
    return n;
}

// ---------------------------------------------------------------------------
// LP systems

struct LpCase {
    std::vector<NoiseSymbolId> ids;
    AffineForm objective;
    std::vector<LinearConstraint> constraints;
};

inline LinearConstraint random_constraint(Rng& r, const std::vector<NoiseSymbolId>& ids, double err_prob = 0.2)
{
    std::vector<AffineForm::Term> terms;
    for (auto id : ids) {
        if (r.coin(0.7)) terms.push_back({id, r.uniform(-1.0, 1.0)});
    }
    if (terms.empty()) terms.push_back({ids.front(), 1.0});
    const double err = r.coin(err_prob) ? r.uniform(0.0, 0.2) : 0.0;
    LinearConstraint c;
    c.form = AffineForm::from_parts(r.uniform(-0.6, 0.6), std::move(terms), err);
    c.sense = static_cast<Sense>(r.integer(0, 3));  // no equalities: sampling cannot hit them
    c.polarity = r.coin();
    return c;
}

inline LpCase random_lp(Rng& r, int max_vars = 5, int max_constraints = 6)
{
    LpCase c;
    c.ids = fresh_symbols(static_cast<std::size_t>(r.integer(1, max_vars)));
    c.objective = random_form(r, c.ids, 0.2);
    const int m = r.integer(0, max_constraints);
    for (int i = 0; i < m; ++i) c.constraints.push_back(random_constraint(r, c.ids));
    return c;
}

// Closed, effective sense of a constraint after polarity.
inline bool satisfied_closed(const LinearConstraint& c, double v, double tol = 0.0)
{
    Sense s = c.sense;
    if (!c.polarity) {
        switch (s) {
            case Sense::Less: s = Sense::GreaterEq; break;
            case Sense::LessEq: s = Sense::Greater; break;
            case Sense::Greater: s = Sense::LessEq; break;
            case Sense::GreaterEq: s = Sense::Less; break;
            case Sense::Equal: return true;
        }
    }
    switch (s) {
        case Sense::Less:
        case Sense::LessEq: return v <= tol;
        case Sense::Greater:
        case Sense::GreaterEq: return v >= -tol;
        case Sense::Equal: return std::abs(v) <= tol;
    }
    return false;
}

// Value of a constraint form at a sampled point; err gets its own draw.
inline double sample_value(Rng& r, const AffineForm& f, const NoiseAssignment& a)
{
    return f.evaluate(a) + f.err() * r.uniform(-1.0, 1.0);
}

// Exact closed-range bounds for err-free two-variable systems by vertex
// enumeration: intersect every pair of boundary lines, keep feasible points.
inline std::optional<Interval> vertex_oracle(const LpCase& c)
{
    if (c.ids.size() != 2) return std::nullopt;
    struct Line {
        double a, b, rhs;  // a*x + b*y = rhs
    };
    std::vector<Line> lines{{1, 0, 1}, {1, 0, -1}, {0, 1, 1}, {0, 1, -1}};
    for (const auto& k : c.constraints) {
        if (k.form.err() != 0.0) return std::nullopt;
        lines.push_back({k.form.coefficient(c.ids[0]), k.form.coefficient(c.ids[1]), -k.form.center()});
    }
    std::optional<Interval> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
            const double det = lines[i].a * lines[j].b - lines[i].b * lines[j].a;
            if (std::abs(det) < 1e-12) continue;
            const double x = (lines[i].rhs * lines[j].b - lines[i].b * lines[j].rhs) / det;
            const double y = (lines[i].a * lines[j].rhs - lines[i].rhs * lines[j].a) / det;
            if (std::abs(x) > 1 + 1e-9 || std::abs(y) > 1 + 1e-9) continue;
            const NoiseAssignment a{{c.ids[0], x}, {c.ids[1], y}};
            bool ok = true;
            for (const auto& k : c.constraints) ok = ok && satisfied_closed(k, k.form.evaluate(a), 1e-9);
            if (!ok) continue;
            const double v = c.objective.evaluate(a);
            out = out ? Interval::hull(*out, {v, v}) : Interval{v, v};
        }
    }
    if (out) {
        out->lo -= c.objective.err();
        out->hi += c.objective.err();
    }
    return out;
}

}  // namespace testsupport
