#pragma once

// Range tightening of an affine form under the linear constraints collected
// along a decision-diagram path. Backed by a small dense two-phase simplex
// (Bland's rule, so it terminates on degenerate problems).

#include "aadd/affine_form.hpp"
#include "aadd/interval.hpp"

#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace aadd {

enum class Sense { Less, LessEq, Greater, GreaterEq, Equal };

inline const char* to_string(Sense s)
{
    switch (s) {
        case Sense::Less: return "<";
        case Sense::LessEq: return "<=";
        case Sense::Greater: return ">";
        case Sense::GreaterEq: return ">=";
        case Sense::Equal: return "==";
    }
    return "?";
}

inline bool holds(double v, Sense s)
{
    switch (s) {
        case Sense::Less: return v < 0.0;
        case Sense::LessEq: return v <= 0.0;
        case Sense::Greater: return v > 0.0;
        case Sense::GreaterEq: return v >= 0.0;
        case Sense::Equal: return v == 0.0;
    }
    return false;
}

// `form sense 0` when polarity is true, its negation otherwise.
struct LinearConstraint {
    AffineForm form;
    Sense sense = Sense::LessEq;
    bool polarity = true;
};

struct BoundsResult {
    enum class Status { Feasible, Infeasible };

    Status status = Status::Feasible;
    Interval range;
    // False when the solver failed and `range` is the plain unconstrained range.
    bool tightened = true;

    bool feasible() const { return status == Status::Feasible; }
};

struct TightenOptions {
    // Report Infeasible when only the open parts of strict inequalities are
    // empty (e.g. {x > 0, x <= 0}). When false, emptiness is judged on the
    // closed relaxation with a small tolerance.
    bool strict_emptiness = true;
    std::ostream* dump = nullptr;
    std::atomic<std::size_t>* lp_calls = nullptr;
};

namespace lp {

enum class RowKind { LessEq, GreaterEq, Equal };

struct Row {
    std::vector<double> coeffs;
    RowKind kind = RowKind::LessEq;
    double rhs = 0.0;
    bool strict = false;
};

struct Problem {
    std::vector<Interval> bounds;  // one per variable, finite
    std::vector<Row> rows;
    std::vector<std::string> names;  // optional, for dumps
};

inline void dump(std::ostream& os, const Problem& p, std::span<const double> objective)
{
    auto name = [&](std::size_t j) { return j < p.names.size() ? p.names[j] : "v" + std::to_string(j); };
    os << "LP vars=" << p.bounds.size() << " rows=" << p.rows.size() << '\n';
    os << "  objective:";
    for (std::size_t j = 0; j < objective.size(); ++j) os << ' ' << format_number(objective[j]) << '*' << name(j);
    os << '\n';
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        const Row& r = p.rows[i];
        os << "  r" << i << ':';
        for (std::size_t j = 0; j < r.coeffs.size(); ++j) {
            if (r.coeffs[j] != 0.0) os << ' ' << format_number(r.coeffs[j]) << '*' << name(j);
        }
        const char* op = r.kind == RowKind::Equal ? "==" : r.kind == RowKind::LessEq ? (r.strict ? "<" : "<=")
                                                                                        : (r.strict ? ">" : ">=");
        os << ' ' << op << ' ' << format_number(r.rhs) << '\n';
    }
    for (std::size_t j = 0; j < p.bounds.size(); ++j) {
        os << "  " << name(j) << " in " << p.bounds[j] << '\n';
    }
}

// Dense tableau over shifted variables u = v - lo in [0, hi - lo].
class Simplex {
public:
    enum class Status { Optimal, Infeasible, Failed };

    explicit Simplex(const Problem& p) : n_(p.bounds.size()), lower_(n_)
    {
        for (std::size_t j = 0; j < n_; ++j) lower_[j] = p.bounds[j].lo;

        struct Pending {
            std::vector<double> a;
            RowKind kind;
            double rhs;
        };
        std::vector<Pending> pending;
        for (const Row& r : p.rows) {
            double scale = 0.0;
            double rhs = r.rhs;
            for (std::size_t j = 0; j < n_; ++j) {
                scale = std::max(scale, std::abs(r.coeffs[j]));
                rhs -= r.coeffs[j] * lower_[j];
            }
            if (scale == 0.0) {
                // 0 op rhs
                const bool ok = r.kind == RowKind::LessEq    ? 0.0 <= rhs + kFeasTol
                                : r.kind == RowKind::GreaterEq ? 0.0 >= rhs - kFeasTol
                                                               : std::abs(rhs) <= kFeasTol;
                if (!ok) trivially_infeasible_ = true;
                continue;
            }
            Pending q{std::vector<double>(n_), r.kind, rhs / scale};
            for (std::size_t j = 0; j < n_; ++j) q.a[j] = r.coeffs[j] / scale;
            pending.push_back(std::move(q));
        }
        for (std::size_t j = 0; j < n_; ++j) {
            Pending q{std::vector<double>(n_), RowKind::LessEq, p.bounds[j].hi - p.bounds[j].lo};
            q.a[j] = 1.0;
            pending.push_back(std::move(q));
        }
        if (trivially_infeasible_) {
            status_ = Status::Infeasible;
            return;
        }

        m_ = pending.size();
        std::size_t slacks = 0;
        for (const auto& q : pending) slacks += q.kind != RowKind::Equal;
        // Flip rows with negative rhs; rows whose slack ends up with -1 (or
        // equalities) need an artificial.
        std::vector<int> slack_sign(m_, 0);
        std::size_t artificials = 0;
        for (std::size_t i = 0; i < m_; ++i) {
            auto& q = pending[i];
            int s = q.kind == RowKind::LessEq ? 1 : q.kind == RowKind::GreaterEq ? -1 : 0;
            if (q.rhs < 0.0) {
                for (double& v : q.a) v = -v;
                q.rhs = -q.rhs;
                s = -s;
            }
            slack_sign[i] = s;
            if (s != 1) ++artificials;
        }
        first_slack_ = n_;
        first_art_ = n_ + slacks;
        cols_ = first_art_ + artificials;
        tab_.assign(m_ * cols_, 0.0);
        rhs_.assign(m_, 0.0);
        basis_.assign(m_, 0);

        std::size_t next_slack = first_slack_;
        std::size_t next_art = first_art_;
        for (std::size_t i = 0; i < m_; ++i) {
            const auto& q = pending[i];
            for (std::size_t j = 0; j < n_; ++j) at(i, j) = q.a[j];
            rhs_[i] = q.rhs;
            if (q.kind != RowKind::Equal) {
                at(i, next_slack) = slack_sign[i];
                if (slack_sign[i] == 1) basis_[i] = next_slack;
                ++next_slack;
            }
            if (slack_sign[i] != 1) {
                at(i, next_art) = 1.0;
                basis_[i] = next_art++;
            }
        }

        if (artificials > 0) {
            std::vector<double> cost(cols_, 0.0);
            for (std::size_t j = first_art_; j < cols_; ++j) cost[j] = 1.0;
            const Status s = run(cost, cols_);
            if (s == Status::Failed) {
                status_ = Status::Failed;
                return;
            }
            double infeas = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                if (basis_[i] >= first_art_) infeas += rhs_[i];
            }
            if (infeas > kFeasTol) {
                status_ = Status::Infeasible;
                return;
            }
            drive_out_artificials();
        }
        status_ = Status::Optimal;
    }

    Status status() const { return status_; }
    bool feasible() const { return status_ == Status::Optimal; }

    // Minimizes objective . v over the feasible set (continuing from the
    // current basis). Returns nullopt on solver failure.
    std::optional<double> minimize(std::span<const double> objective)
    {
        if (status_ != Status::Optimal) return std::nullopt;
        std::vector<double> cost(cols_, 0.0);
        double offset = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            cost[j] = objective[j];
            offset += objective[j] * lower_[j];
        }
        if (run(cost, first_art_) != Status::Optimal) return std::nullopt;
        double value = offset;
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_) value += cost[basis_[i]] * rhs_[i];
        }
        return value;
    }

    // Current basic solution in original coordinates.
    std::vector<double> point() const
    {
        std::vector<double> x(lower_);
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_) x[basis_[i]] += rhs_[i];
        }
        return x;
    }

private:
    static constexpr double kPivotTol = 1e-9;
    static constexpr double kCostTol = 1e-10;
    static constexpr double kFeasTol = 1e-9;
    static constexpr std::size_t kMaxIterations = 20000;

    double& at(std::size_t i, std::size_t j) { return tab_[i * cols_ + j]; }
    double at(std::size_t i, std::size_t j) const { return tab_[i * cols_ + j]; }

    void pivot(std::size_t r, std::size_t c)
    {
        const double pv = at(r, c);
        for (std::size_t j = 0; j < cols_; ++j) at(r, j) /= pv;
        rhs_[r] /= pv;
        at(r, c) = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            const double f = at(i, c);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < cols_; ++j) at(i, j) -= f * at(r, j);
            at(i, c) = 0.0;
            rhs_[i] -= f * rhs_[r];
            if (std::abs(rhs_[i]) < 1e-13) rhs_[i] = 0.0;
        }
        basis_[r] = c;
    }

    // Bland's rule: lowest-index improving column, ties in the ratio test
    // broken by lowest basic index.
    Status run(const std::vector<double>& cost, std::size_t usable_cols)
    {
        std::vector<char> is_basic(cols_, 0);
        for (std::size_t iter = 0; iter < kMaxIterations; ++iter) {
            std::fill(is_basic.begin(), is_basic.end(), 0);
            for (std::size_t b : basis_) is_basic[b] = 1;
            std::size_t enter = cols_;
            for (std::size_t j = 0; j < usable_cols; ++j) {
                if (is_basic[j]) continue;
                double d = cost[j];
                for (std::size_t i = 0; i < m_; ++i) d -= cost[basis_[i]] * at(i, j);
                if (d < -kCostTol) {
                    enter = j;
                    break;
                }
            }
            if (enter == cols_) return Status::Optimal;
            std::size_t leave = m_;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m_; ++i) {
                const double a = at(i, enter);
                if (a <= kPivotTol) continue;
                const double ratio = rhs_[i] / a;
                if (ratio < best - 1e-12 || (ratio <= best + 1e-12 && leave < m_ && basis_[i] < basis_[leave])) {
                    if (ratio < best) best = ratio;
                    leave = i;
                }
            }
            if (leave == m_) return Status::Failed;  // unbounded cannot happen with finite bounds
            pivot(leave, enter);
        }
        return Status::Failed;
    }

    void drive_out_artificials()
    {
        for (std::size_t i = 0; i < m_;) {
            if (basis_[i] < first_art_) {
                ++i;
                continue;
            }
            std::size_t c = first_art_;
            for (std::size_t j = 0; j < first_art_; ++j) {
                if (std::abs(at(i, j)) > kPivotTol) {
                    c = j;
                    break;
                }
            }
            if (c < first_art_) {
                pivot(i, c);
                ++i;
            } else {
                // Redundant row.
                tab_.erase(tab_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                           tab_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
                rhs_.erase(rhs_.begin() + static_cast<std::ptrdiff_t>(i));
                basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
                --m_;
            }
        }
    }

    std::size_t n_ = 0;
    std::size_t m_ = 0;
    std::size_t cols_ = 0;
    std::size_t first_slack_ = 0;
    std::size_t first_art_ = 0;
    std::vector<double> lower_;
    std::vector<double> tab_;
    std::vector<double> rhs_;
    std::vector<std::size_t> basis_;
    bool trivially_infeasible_ = false;
    Status status_ = Status::Failed;
};

// Maps noise symbols and per-constraint err pseudo-variables to LP columns.
struct Encoding {
    Problem problem;
    std::vector<NoiseSymbolId> symbols;  // column -> symbol for the first symbols.size() columns
    std::vector<std::size_t> strict_rows;

    std::size_t column(NoiseSymbolId id) const
    {
        auto it = std::lower_bound(symbols.begin(), symbols.end(), id);
        return static_cast<std::size_t>(it - symbols.begin());
    }
};

inline Encoding encode(const AffineForm* objective, std::span<const LinearConstraint> constraints)
{
    Encoding enc;
    if (objective) {
        for (const auto& t : objective->terms()) enc.symbols.push_back(t.id);
    }
    std::size_t err_vars = 0;
    for (const auto& c : constraints) {
        for (const auto& t : c.form.terms()) enc.symbols.push_back(t.id);
        if (c.form.err() > 0.0) ++err_vars;
    }
    std::sort(enc.symbols.begin(), enc.symbols.end());
    enc.symbols.erase(std::unique(enc.symbols.begin(), enc.symbols.end()), enc.symbols.end());

    const std::size_t n = enc.symbols.size() + err_vars;
    enc.problem.bounds.assign(n, Interval{-1.0, 1.0});
    for (auto id : enc.symbols) enc.problem.names.push_back("e" + std::to_string(id.value));
    std::size_t next_err = enc.symbols.size();

    auto add_row = [&](const AffineForm& f, std::size_t err_col, RowKind kind, bool strict) {
        Row r;
        r.coeffs.assign(n, 0.0);
        for (const auto& t : f.terms()) r.coeffs[enc.column(t.id)] = t.coeff;
        if (err_col < n) r.coeffs[err_col] = f.err();
        r.kind = kind;
        r.rhs = -f.center();
        r.strict = strict;
        if (strict) enc.strict_rows.push_back(enc.problem.rows.size());
        enc.problem.rows.push_back(std::move(r));
    };

    for (const auto& c : constraints) {
        std::size_t err_col = n;
        if (c.form.err() > 0.0) {
            err_col = next_err++;
            enc.problem.names.push_back("err" + std::to_string(err_col - enc.symbols.size()));
        }
        Sense s = c.sense;
        if (!c.polarity) {
            switch (s) {
                case Sense::Less: s = Sense::GreaterEq; break;
                case Sense::LessEq: s = Sense::Greater; break;
                case Sense::Greater: s = Sense::LessEq; break;
                case Sense::GreaterEq: s = Sense::Less; break;
                case Sense::Equal: continue;  // x != 0 is not convex; no row
            }
        }
        switch (s) {
            case Sense::Less: add_row(c.form, err_col, RowKind::LessEq, true); break;
            case Sense::LessEq: add_row(c.form, err_col, RowKind::LessEq, false); break;
            case Sense::Greater: add_row(c.form, err_col, RowKind::GreaterEq, true); break;
            case Sense::GreaterEq: add_row(c.form, err_col, RowKind::GreaterEq, false); break;
            case Sense::Equal: add_row(c.form, err_col, RowKind::Equal, false); break;
        }
    }
    return enc;
}

inline bool strictly_satisfied(const Problem& p, std::span<const std::size_t> strict_rows, std::span<const double> x)
{
    for (std::size_t i : strict_rows) {
        const Row& r = p.rows[i];
        double lhs = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) lhs += r.coeffs[j] * x[j];
        const double margin = r.kind == RowKind::LessEq ? r.rhs - lhs : lhs - r.rhs;
        if (!(margin > 1e-12)) return false;
    }
    return true;
}

// True when the open set described by the strict rows (intersected with the
// closed rows) is empty: maximize t with every strict row holding with margin t.
inline bool strict_part_empty(const Problem& p, std::span<const std::size_t> strict_rows)
{
    Problem q = p;
    const std::size_t t = q.bounds.size();
    q.bounds.push_back({0.0, 1.0});
    for (auto& r : q.rows) r.coeffs.push_back(0.0);
    for (std::size_t i : strict_rows) {
        q.rows[i].coeffs[t] = q.rows[i].kind == RowKind::LessEq ? 1.0 : -1.0;
    }
    Simplex s(q);
    if (!s.feasible()) return true;
    std::vector<double> objective(q.bounds.size(), 0.0);
    objective[t] = -1.0;
    const auto v = s.minimize(objective);
    if (!v) return false;  // undecided: keep the path
    return -*v <= 1e-12;
}

}  // namespace lp

// Feasibility of a conjunction of path constraints over the noise box.
inline bool constraints_feasible(std::span<const LinearConstraint> constraints, const TightenOptions& opt = {})
{
    if (constraints.empty()) return true;
    if (opt.lp_calls) opt.lp_calls->fetch_add(1, std::memory_order_relaxed);
    lp::Encoding enc = lp::encode(nullptr, constraints);
    if (enc.problem.rows.empty()) return true;
    if (opt.dump) {
        std::vector<double> none(enc.problem.bounds.size(), 0.0);
        lp::dump(*opt.dump, enc.problem, none);
    }
    lp::Simplex s(enc.problem);
    if (s.status() == lp::Simplex::Status::Infeasible) return false;
    if (s.status() == lp::Simplex::Status::Failed) return true;
    if (opt.strict_emptiness && !enc.strict_rows.empty() &&
        !lp::strictly_satisfied(enc.problem, enc.strict_rows, s.point())) {
        return !lp::strict_part_empty(enc.problem, enc.strict_rows);
    }
    return true;
}

// Bounds of `objective` over e_i in [-1, 1] subject to `constraints` (closed
// relaxations). The result always lies inside objective.range().
inline BoundsResult tighten(const AffineForm& objective, std::span<const LinearConstraint> constraints,
                            const TightenOptions& opt = {})
{
    const Interval unconstrained = objective.range();
    if (constraints.empty()) return {BoundsResult::Status::Feasible, unconstrained, true};
    if (opt.lp_calls) opt.lp_calls->fetch_add(1, std::memory_order_relaxed);

    lp::Encoding enc = lp::encode(&objective, constraints);
    if (enc.problem.rows.empty()) return {BoundsResult::Status::Feasible, unconstrained, true};

    std::vector<double> cost(enc.problem.bounds.size(), 0.0);
    for (const auto& t : objective.terms()) cost[enc.column(t.id)] = t.coeff;
    if (opt.dump) lp::dump(*opt.dump, enc.problem, cost);

    lp::Simplex s(enc.problem);
    if (s.status() == lp::Simplex::Status::Infeasible) return {BoundsResult::Status::Infeasible, {}, true};
    if (s.status() == lp::Simplex::Status::Failed) return {BoundsResult::Status::Feasible, unconstrained, false};

    std::vector<double> centroid = s.point();
    const auto lo = s.minimize(cost);
    if (!lo) return {BoundsResult::Status::Feasible, unconstrained, false};
    std::vector<double> p_lo = s.point();
    for (double& c : cost) c = -c;
    const auto hi = s.minimize(cost);
    if (!hi) return {BoundsResult::Status::Feasible, unconstrained, false};

    if (opt.strict_emptiness && !enc.strict_rows.empty()) {
        std::vector<double> p_hi = s.point();
        for (std::size_t j = 0; j < centroid.size(); ++j) centroid[j] = (centroid[j] + p_lo[j] + p_hi[j]) / 3.0;
        if (!lp::strictly_satisfied(enc.problem, enc.strict_rows, centroid) &&
            lp::strict_part_empty(enc.problem, enc.strict_rows)) {
            return {BoundsResult::Status::Infeasible, {}, true};
        }
    }

    const double c = objective.center();
    const double e = objective.err();
    Interval r{c + *lo - e, c - *hi + e};
    r.lo = std::clamp(r.lo, unconstrained.lo, unconstrained.hi);
    r.hi = std::clamp(r.hi, unconstrained.lo, unconstrained.hi);
    if (r.lo > r.hi) r.lo = r.hi = 0.5 * (r.lo + r.hi);
    return {BoundsResult::Status::Feasible, r, true};
}

}  // namespace aadd
