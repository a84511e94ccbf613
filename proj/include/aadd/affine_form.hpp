#pragma once

// Affine arithmetic forms: x0 + sum_i x_i * e_i with e_i in [-1, 1], plus one
// non-negative radius `err` that absorbs every approximation error produced by
// non-linear operations (all such errors are treated as uncorrelated).

#include "aadd/error.hpp"
#include "aadd/interval.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace aadd {

// Identifier of one basic continuous uncertainty.
struct NoiseSymbolId {
    std::uint32_t value = 0;

    friend constexpr auto operator<=>(NoiseSymbolId, NoiseSymbolId) = default;
};

namespace detail {
inline std::atomic<std::uint32_t>& symbol_counter()
{
    static std::atomic<std::uint32_t> next{1};
    return next;
}
}  // namespace detail

// Ids are process-wide, monotone and never reused.
inline NoiseSymbolId allocate_noise_symbol()
{
    return NoiseSymbolId{detail::symbol_counter().fetch_add(1, std::memory_order_relaxed)};
}

// Coefficients smaller than this are moved into err.
inline constexpr double kCoefficientCutoff = 1e-12;

// Global comparison slack used by the tests and by rounding-robust decisions.
inline constexpr double kSlack = 1e-9;

using NoiseAssignment = std::map<NoiseSymbolId, double>;

inline std::string format_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

class AffineForm {
public:
    struct Term {
        NoiseSymbolId id;
        double coeff = 0.0;

        friend constexpr bool operator==(const Term&, const Term&) = default;
    };

    AffineForm() = default;

    static AffineForm exact(double c)
    {
        require_finite(c, "constant");
        AffineForm r;
        r.center_ = c;
        return r;
    }

    // center + radius * e_new for a freshly allocated noise symbol.
    static AffineForm uncertain(double center, double radius)
    {
        require_finite(center, "center");
        require_finite(radius, "radius");
        if (radius < 0.0) {
            throw InvalidArgument("uncertain: negative radius " + format_number(radius));
        }
        AffineForm r;
        r.center_ = center;
        if (radius > 0.0) {
            r.terms_.push_back({allocate_noise_symbol(), radius});
        }
        return r;
    }

    // Same as uncertain() but bound to an existing symbol.
    static AffineForm with_symbol(double center, double coeff, NoiseSymbolId id)
    {
        return from_parts(center, {{id, coeff}}, 0.0);
    }

    // Builds a normalized form from arbitrary (unsorted, possibly duplicate) terms.
    static AffineForm from_parts(double center, std::vector<Term> terms, double err)
    {
        require_finite(center, "center");
        require_finite(err, "err");
        if (err < 0.0) {
            throw InvalidArgument("affine form: negative err");
        }
        std::sort(terms.begin(), terms.end(),
                  [](const Term& a, const Term& b) { return a.id < b.id; });
        AffineForm r;
        r.center_ = center;
        r.err_ = err;
        for (const Term& t : terms) {
            require_finite(t.coeff, "coefficient");
            if (!r.terms_.empty() && r.terms_.back().id == t.id) {
                r.terms_.back().coeff += t.coeff;
            } else {
                r.terms_.push_back(t);
            }
        }
        r.normalize();
        return r;
    }

    double center() const { return center_; }
    double err() const { return err_; }
    std::span<const Term> terms() const { return terms_; }

    double coefficient(NoiseSymbolId id) const
    {
        auto it = std::lower_bound(terms_.begin(), terms_.end(), id,
                                   [](const Term& t, NoiseSymbolId v) { return t.id < v; });
        return (it != terms_.end() && it->id == id) ? it->coeff : 0.0;
    }

    // Sum of |x_i|, excluding err.
    double deviation_radius() const
    {
        double s = 0.0;
        for (const Term& t : terms_) s += std::abs(t.coeff);
        return s;
    }

    double total_radius() const { return deviation_radius() + err_; }

    bool is_constant() const { return terms_.empty() && err_ == 0.0; }
    bool has_terms() const { return !terms_.empty(); }

    Interval range() const
    {
        const double r = total_radius();
        return {center_ - r, center_ + r};
    }

    // Value of the affine part under `a`; err is taken as 0.
    double evaluate(const NoiseAssignment& a) const
    {
        double v = center_;
        for (const Term& t : terms_) {
            auto it = a.find(t.id);
            if (it == a.end()) {
                throw MissingSymbol("no value for noise symbol e" + std::to_string(t.id.value));
            }
            v += t.coeff * it->second;
        }
        return v;
    }

    // Componentwise equality within `tol`.
    bool equal_within(const AffineForm& o, double tol) const
    {
        if (std::abs(center_ - o.center_) > tol || std::abs(err_ - o.err_) > tol) return false;
        auto i = terms_.begin();
        auto j = o.terms_.begin();
        while (i != terms_.end() || j != o.terms_.end()) {
            if (j == o.terms_.end() || (i != terms_.end() && i->id < j->id)) {
                if (std::abs(i->coeff) > tol) return false;
                ++i;
            } else if (i == terms_.end() || j->id < i->id) {
                if (std::abs(j->coeff) > tol) return false;
                ++j;
            } else {
                if (std::abs(i->coeff - j->coeff) > tol) return false;
                ++i;
                ++j;
            }
        }
        return true;
    }

    friend bool operator==(const AffineForm&, const AffineForm&) = default;

    // c(x + y) computed termwise; errs add in magnitude.
    friend AffineForm linear_combination(double a, const AffineForm& x, double b, const AffineForm& y)
    {
        AffineForm r;
        r.center_ = a * x.center_ + b * y.center_;
        r.err_ = std::abs(a) * x.err_ + std::abs(b) * y.err_;
        r.terms_.reserve(x.terms_.size() + y.terms_.size());
        auto i = x.terms_.begin();
        auto j = y.terms_.begin();
        while (i != x.terms_.end() || j != y.terms_.end()) {
            if (j == y.terms_.end() || (i != x.terms_.end() && i->id < j->id)) {
                r.terms_.push_back({i->id, a * i->coeff});
                ++i;
            } else if (i == x.terms_.end() || j->id < i->id) {
                r.terms_.push_back({j->id, b * j->coeff});
                ++j;
            } else {
                r.terms_.push_back({i->id, a * i->coeff + b * j->coeff});
                ++i;
                ++j;
            }
        }
        r.normalize();
        return r;
    }

    std::string to_string() const
    {
        std::string s = format_number(center_);
        for (const Term& t : terms_) {
            s += t.coeff < 0.0 ? " - " : " + ";
            s += format_number(std::abs(t.coeff));
            s += "*e" + std::to_string(t.id.value);
        }
        if (err_ > 0.0) s += " ± " + format_number(err_);
        return s;
    }

private:
    static void require_finite(double v, const char* what)
    {
        if (!std::isfinite(v)) {
            throw InvalidArgument(std::string("affine form: non-finite ") + what);
        }
    }

    void normalize()
    {
        auto out = terms_.begin();
        for (const Term& t : terms_) {
            if (t.coeff == 0.0) continue;
            if (std::abs(t.coeff) < kCoefficientCutoff) {
                err_ += std::abs(t.coeff);
                continue;
            }
            *out++ = t;
        }
        terms_.erase(out, terms_.end());
        if (!std::isfinite(center_) || !std::isfinite(err_)) {
            throw InvalidArgument("affine form: result is not finite");
        }
    }

    double center_ = 0.0;
    std::vector<Term> terms_;
    double err_ = 0.0;

    friend AffineForm mul(const AffineForm&, const AffineForm&);
};

inline AffineForm add(const AffineForm& x, const AffineForm& y) { return linear_combination(1.0, x, 1.0, y); }
inline AffineForm sub(const AffineForm& x, const AffineForm& y) { return linear_combination(1.0, x, -1.0, y); }
inline AffineForm scale(double c, const AffineForm& x) { return linear_combination(c, x, 0.0, AffineForm{}); }
inline AffineForm shift(const AffineForm& x, double c) { return add(x, AffineForm::exact(c)); }

// Bound of the purely quadratic part (sum x_i e_i) * (sum y_j e_j).
// Squares e_i^2 live in [0, 1], so diagonal terms are one-sided.
inline Interval quadratic_remainder(const AffineForm& x, const AffineForm& y)
{
    std::vector<NoiseSymbolId> ids;
    for (const auto& t : x.terms()) ids.push_back(t.id);
    for (const auto& t : y.terms()) ids.push_back(t.id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    std::vector<double> xs(ids.size()), ys(ids.size());
    for (std::size_t k = 0; k < ids.size(); ++k) {
        xs[k] = x.coefficient(ids[k]);
        ys[k] = y.coefficient(ids[k]);
    }
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const double p = xs[i] * ys[i];
        lo += std::min(0.0, p);
        hi += std::max(0.0, p);
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
            const double q = std::abs(xs[i] * ys[j] + xs[j] * ys[i]);
            lo -= q;
            hi += q;
        }
    }
    return {lo, hi};
}

// Affine part x0*y0 + sum (x0 y_i + y0 x_i) e_i; the quadratic remainder's
// midpoint goes to the center and its radius (plus err cross terms) to err.
inline AffineForm mul(const AffineForm& x, const AffineForm& y)
{
    const Interval q = quadratic_remainder(x, y);
    AffineForm r = linear_combination(y.center(), x, x.center(), y);
    const double ex = x.err();
    const double ey = y.err();
    // linear_combination scaled the errs by |y0| and |x0| already.
    const double extra = x.deviation_radius() * ey + y.deviation_radius() * ex + ex * ey;
    r.center_ = x.center() * y.center() + q.mid();
    r.err_ += q.radius() + extra;
    r.normalize();
    return r;
}

// ---------------------------------------------------------------------------
// Non-linear unary functions.

enum class ApproxMode { MinRange, Chebyshev };

// Descriptor of a function that is monotone and convex or concave on every
// interval of its domain.
struct UnaryFunction {
    const char* name;
    double (*value)(double);
    double (*derivative)(double);
    // Point u in (lo, hi) with derivative(u) == slope.
    double (*derivative_inverse)(double slope, Interval on);
    bool (*in_domain)(Interval);
};

inline const UnaryFunction& reciprocal_fn()
{
    static const UnaryFunction f{
        "reciprocal",
        [](double v) { return 1.0 / v; },
        [](double v) { return -1.0 / (v * v); },
        [](double slope, Interval on) {
            const double u = std::sqrt(-1.0 / slope);
            return on.lo > 0.0 ? u : -u;
        },
        [](Interval r) { return r.lo > 0.0 || r.hi < 0.0; },
    };
    return f;
}

inline const UnaryFunction& sqrt_fn()
{
    static const UnaryFunction f{
        "sqrt",
        [](double v) { return std::sqrt(v); },
        [](double v) { return 0.5 / std::sqrt(v); },
        [](double slope, Interval) { return 1.0 / (4.0 * slope * slope); },
        [](Interval r) { return r.lo >= 0.0; },
    };
    return f;
}

inline const UnaryFunction& exp_fn()
{
    static const UnaryFunction f{
        "exp",
        [](double v) { return std::exp(v); },
        [](double v) { return std::exp(v); },
        [](double slope, Interval) { return std::log(slope); },
        [](Interval) { return true; },
    };
    return f;
}

inline AffineForm approx_unary(const UnaryFunction& f, const AffineForm& x, ApproxMode mode)
{
    const Interval r = x.range();
    if (!f.in_domain(r)) {
        throw DomainError(std::string(f.name) + ": range [" + format_number(r.lo) + ", " +
                          format_number(r.hi) + "] outside domain");
    }
    const double a = r.lo;
    const double b = r.hi;
    const double fa = f.value(a);
    const double fb = f.value(b);
    if (b - a <= 1e-15 * std::max(1.0, std::abs(a))) {
        return AffineForm::from_parts(0.5 * (fa + fb), {}, 0.5 * std::abs(fb - fa));
    }

    double slope = 0.0;
    double g_lo_end = 0.0;  // intercept values of f - slope*x at the two extremes
    double g_hi_end = 0.0;
    if (mode == ApproxMode::MinRange) {
        // Slope of the endpoint with the smaller |f'| keeps f - slope*x monotone,
        // so the result's range is exactly [min f, max f].
        const double da = f.derivative(a);
        const double db = f.derivative(b);
        slope = std::abs(da) <= std::abs(db) ? da : db;
        g_lo_end = fa - slope * a;
        g_hi_end = fb - slope * b;
    } else {
        slope = (fb - fa) / (b - a);
        const double u = std::clamp(f.derivative_inverse(slope, r), a, b);
        g_lo_end = fa - slope * a;
        g_hi_end = f.value(u) - slope * u;
    }
    const double zeta = 0.5 * (g_lo_end + g_hi_end);
    const double delta = 0.5 * std::abs(g_lo_end - g_hi_end);
    const AffineForm scaled = scale(slope, x);
    return AffineForm::from_parts(scaled.center() + zeta,
                                  {scaled.terms().begin(), scaled.terms().end()},
                                  scaled.err() + delta);
}

inline AffineForm reciprocal(const AffineForm& x, ApproxMode m = ApproxMode::Chebyshev)
{
    return approx_unary(reciprocal_fn(), x, m);
}
inline AffineForm sqrt(const AffineForm& x, ApproxMode m = ApproxMode::Chebyshev)
{
    return approx_unary(sqrt_fn(), x, m);
}
inline AffineForm exp(const AffineForm& x, ApproxMode m = ApproxMode::Chebyshev)
{
    return approx_unary(exp_fn(), x, m);
}
inline AffineForm div(const AffineForm& x, const AffineForm& y) { return mul(x, reciprocal(y)); }

inline AffineForm operator+(const AffineForm& x, const AffineForm& y) { return add(x, y); }
inline AffineForm operator-(const AffineForm& x, const AffineForm& y) { return sub(x, y); }
inline AffineForm operator-(const AffineForm& x) { return scale(-1.0, x); }
inline AffineForm operator*(const AffineForm& x, const AffineForm& y) { return mul(x, y); }
inline AffineForm operator/(const AffineForm& x, const AffineForm& y) { return div(x, y); }
inline AffineForm operator*(double c, const AffineForm& x) { return scale(c, x); }
inline AffineForm operator*(const AffineForm& x, double c) { return scale(c, x); }
inline AffineForm operator+(const AffineForm& x, double c) { return shift(x, c); }
inline AffineForm operator+(double c, const AffineForm& x) { return shift(x, c); }
inline AffineForm operator-(const AffineForm& x, double c) { return shift(x, -c); }
inline AffineForm operator-(double c, const AffineForm& x) { return shift(-x, c); }

// ---------------------------------------------------------------------------
// JSON: {"center": c, "terms": [[id, coeff], ...], "err": e}

inline void to_json(nlohmann::json& j, const AffineForm& x)
{
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : x.terms()) terms.push_back({t.id.value, t.coeff});
    j = nlohmann::json{{"center", x.center()}, {"terms", std::move(terms)}, {"err", x.err()}};
}

inline void from_json(const nlohmann::json& j, AffineForm& x)
{
    std::vector<AffineForm::Term> terms;
    for (const auto& t : j.at("terms")) {
        const auto id = t.at(0).get<std::uint32_t>();
        if (id == 0) throw InvalidArgument("affine form: noise symbol id must be positive");
        terms.push_back({NoiseSymbolId{id}, t.at(1).get<double>()});
    }
    x = AffineForm::from_parts(j.at("center").get<double>(), std::move(terms), j.at("err").get<double>());
}

}  // namespace aadd

template <>
struct std::hash<aadd::NoiseSymbolId> {
    std::size_t operator()(aadd::NoiseSymbolId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
