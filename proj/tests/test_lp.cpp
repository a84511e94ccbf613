#include "aadd/lp.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace aadd;
using testsupport::Rng;

namespace {

AffineForm sym(NoiseSymbolId id, double c = 0.0, double k = 1.0) { return AffineForm::from_parts(c, {{id, k}}, 0.0); }

}  // namespace

TEST(Tighten, StrictConditionUsesClosedRelaxation)
{
    const auto e1 = allocate_noise_symbol();
    const std::vector<LinearConstraint> cs{{sym(e1), Sense::Greater, true}};
    const auto r = tighten(sym(e1, 13), cs);
    ASSERT_TRUE(r.feasible());
    EXPECT_NEAR(r.range.lo, 13.0, 1e-9);
    EXPECT_NEAR(r.range.hi, 14.0, 1e-9);
    EXPECT_TRUE(r.tightened);
}

TEST(Tighten, NoConstraintsGivesPlainRange)
{
    const auto e2 = allocate_noise_symbol();
    const auto r = tighten(sym(e2, 3), {});
    ASSERT_TRUE(r.feasible());
    EXPECT_EQ(r.range, (Interval{2, 4}));
}

TEST(Tighten, ContradictoryPathIsInfeasible)
{
    const auto e1 = allocate_noise_symbol();
    const std::vector<LinearConstraint> cs{{sym(e1), Sense::Greater, true}, {sym(e1), Sense::LessEq, true}};
    EXPECT_FALSE(tighten(sym(e1), cs).feasible());
    EXPECT_FALSE(constraints_feasible(cs));

    // Closed feasibility keeps the single boundary point.
    TightenOptions closed;
    closed.strict_emptiness = false;
    const auto r = tighten(sym(e1), cs, closed);
    ASSERT_TRUE(r.feasible());
    EXPECT_NEAR(r.range.lo, 0.0, 1e-9);
    EXPECT_NEAR(r.range.hi, 0.0, 1e-9);
}

TEST(Tighten, ClosedInfeasibleRegardlessOfStrictness)
{
    const auto e1 = allocate_noise_symbol();
    const std::vector<LinearConstraint> cs{{sym(e1, -0.5), Sense::GreaterEq, true}, {sym(e1, 0.5), Sense::LessEq, true}};
    EXPECT_FALSE(tighten(sym(e1), cs).feasible());
    TightenOptions closed;
    closed.strict_emptiness = false;
    EXPECT_FALSE(tighten(sym(e1), cs, closed).feasible());
}

TEST(Tighten, NegatedPolarity)
{
    const auto e1 = allocate_noise_symbol();
    // not (e1 - 0.5 > 0)  =>  e1 <= 0.5
    const std::vector<LinearConstraint> cs{{sym(e1, -0.5), Sense::Greater, false}};
    const auto r = tighten(sym(e1), cs);
    ASSERT_TRUE(r.feasible());
    EXPECT_NEAR(r.range.lo, -1.0, 1e-9);
    EXPECT_NEAR(r.range.hi, 0.5, 1e-9);
}

TEST(Tighten, ConstraintErrIsABoxVariable)
{
    const auto e1 = allocate_noise_symbol();
    // e1 - 0.5 +- 0.2 >= 0 admits e1 >= 0.3
    const auto f = AffineForm::from_parts(-0.5, {{e1, 1.0}}, 0.2);
    const auto r = tighten(sym(e1), std::vector<LinearConstraint>{{f, Sense::GreaterEq, true}});
    ASSERT_TRUE(r.feasible());
    EXPECT_NEAR(r.range.lo, 0.3, 1e-9);
    EXPECT_NEAR(r.range.hi, 1.0, 1e-9);
}

TEST(Tighten, ObjectiveErrAddedOutside)
{
    const auto e1 = allocate_noise_symbol();
    const auto obj = AffineForm::from_parts(0, {{e1, 1.0}}, 0.25);
    const auto r = tighten(obj, std::vector<LinearConstraint>{{sym(e1), Sense::GreaterEq, true}});
    EXPECT_NEAR(r.range.lo, -0.25, 1e-9);
    EXPECT_NEAR(r.range.hi, 1.25, 1e-9);
}

TEST(Tighten, Equality)
{
    const auto e1 = allocate_noise_symbol();
    const auto e2 = allocate_noise_symbol();
    const auto sum = AffineForm::from_parts(0, {{e1, 1}, {e2, 1}}, 0);
    const auto diff = AffineForm::from_parts(0, {{e1, 1}, {e2, -1}}, 0);
    const std::vector<LinearConstraint> eq{{sum, Sense::Equal, true}};
    auto r = tighten(sum, eq);
    EXPECT_NEAR(r.range.lo, 0, 1e-9);
    EXPECT_NEAR(r.range.hi, 0, 1e-9);
    r = tighten(diff, eq);
    EXPECT_NEAR(r.range.lo, -2, 1e-9);
    EXPECT_NEAR(r.range.hi, 2, 1e-9);
    // x != 0 adds nothing.
    r = tighten(sum, std::vector<LinearConstraint>{{sum, Sense::Equal, false}});
    EXPECT_EQ(r.range, (Interval{-2, 2}));
}

TEST(Tighten, DumpWritesTableau)
{
    const auto e1 = allocate_noise_symbol();
    std::ostringstream os;
    TightenOptions opt;
    opt.dump = &os;
    tighten(sym(e1), std::vector<LinearConstraint>{{sym(e1, -0.25), Sense::Less, true}}, opt);
    EXPECT_NE(os.str().find("LP vars=1 rows=1"), std::string::npos);
    EXPECT_NE(os.str().find("<"), std::string::npos);
}

TEST(Tighten, CountsCalls)
{
    const auto e1 = allocate_noise_symbol();
    std::atomic<std::size_t> calls{0};
    TightenOptions opt;
    opt.lp_calls = &calls;
    tighten(sym(e1), std::vector<LinearConstraint>{{sym(e1), Sense::Less, true}}, opt);
    EXPECT_EQ(calls.load(), 1u);
}

TEST(Simplex, DegenerateProblemTerminates)
{
    // Many redundant constraints through the same vertex.
    lp::Problem p;
    p.bounds = {{-1, 1}, {-1, 1}};
    for (int k = 1; k <= 8; ++k) p.rows.push_back({{1.0 * k, 1.0 * k}, lp::RowKind::LessEq, 0.0, false});
    p.rows.push_back({{1, -1}, lp::RowKind::Equal, 0.0, false});
    lp::Simplex s(p);
    ASSERT_TRUE(s.feasible());
    const std::vector<double> c{-1, -1};
    const auto v = s.minimize(c);
    ASSERT_TRUE(v.has_value());
    EXPECT_NEAR(*v, 0.0, 1e-9);
}

// Rejection-sampled feasible points always lie inside the tightened range.
TEST(TightenProperty, SoundAgainstRejectionSampling)
{
    Rng rng(31337);
    for (int trial = 0; trial < 400; ++trial) {
        const auto c = testsupport::random_lp(rng);
        const auto r = tighten(c.objective, c.constraints);
        const Interval plain = c.objective.range();
        if (r.feasible()) {
            EXPECT_TRUE(plain.contains(r.range)) << r.range << " vs " << plain;
        }
        for (int s = 0; s < 2000; ++s) {
            const auto a = testsupport::random_assignment(rng, c.ids);
            bool ok = true;
            for (const auto& k : c.constraints) ok = ok && testsupport::satisfied_closed(k, testsupport::sample_value(rng, k.form, a));
            if (!ok) continue;
            ASSERT_TRUE(r.feasible()) << "sampled a feasible point of an 'infeasible' system";
            const double v = c.objective.evaluate(a) + c.objective.err() * rng.uniform(-1, 1);
            EXPECT_TRUE(r.range.contains(v, 1e-9)) << v << " outside " << r.range;
        }
    }
}

TEST(TightenProperty, AddingConstraintsNeverWidens)
{
    Rng rng(4242);
    for (int trial = 0; trial < 500; ++trial) {
        auto c = testsupport::random_lp(rng, 5, 5);
        const auto before = tighten(c.objective, c.constraints);
        c.constraints.push_back(testsupport::random_constraint(rng, c.ids));
        const auto after = tighten(c.objective, c.constraints);
        if (!before.feasible()) {
            EXPECT_FALSE(after.feasible());
            continue;
        }
        if (after.feasible()) {
            EXPECT_TRUE(before.range.contains(after.range, 1e-9));
        }
    }
}

TEST(TightenProperty, OptimalAgainstVertexEnumeration)
{
    Rng rng(77);
    TightenOptions closed;
    closed.strict_emptiness = false;
    int compared = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        testsupport::LpCase c;
        c.ids = testsupport::fresh_symbols(2);
        c.objective = testsupport::random_form(rng, c.ids, 0.3);
        const int m = rng.integer(0, 6);
        for (int i = 0; i < m; ++i) c.constraints.push_back(testsupport::random_constraint(rng, c.ids, 0.0));
        const auto oracle = testsupport::vertex_oracle(c);
        const auto r = tighten(c.objective, c.constraints, closed);
        if (!oracle) {
            EXPECT_FALSE(r.feasible());
            continue;
        }
        ASSERT_TRUE(r.feasible());
        EXPECT_NEAR(r.range.lo, oracle->lo, 1e-7);
        EXPECT_NEAR(r.range.hi, oracle->hi, 1e-7);
        ++compared;
    }
    EXPECT_GT(compared, 500);
}
