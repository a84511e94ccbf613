#pragma once

// The two small worked examples used throughout the tests.

#include "aadd/decision_diagram.hpp"

namespace aadd::scenarios {

// a = 1 + 2 e1, b = 2 - 2 e1 + e2
struct AafExample {
    NoiseSymbolId e1;
    NoiseSymbolId e2;
    AffineForm a;
    AffineForm b;
};

inline AafExample aaf_example()
{
    AafExample x;
    x.e1 = allocate_noise_symbol();
    x.e2 = allocate_noise_symbol();
    x.a = AffineForm::from_parts(1.0, {{x.e1, 2.0}}, 0.0);
    x.b = AffineForm::from_parts(2.0, {{x.e1, -2.0}, {x.e2, 1.0}}, 0.0);
    return x;
}

// b = 3 + e1; if (b > 3) b += 10; else b -= 10;
struct BranchExample {
    NoiseSymbolId e1;
    Aadd b;
    Aadd cond;
    Aadd result;
};

inline BranchExample branch_example(Context& ctx)
{
    BranchExample x;
    x.e1 = allocate_noise_symbol();
    x.b = Aadd(AffineForm::from_parts(3.0, {{x.e1, 1.0}}, 0.0));
    x.cond = gt(ctx, x.b, 3.0);
    x.result = ite(x.cond, x.b + 10.0, x.b - 10.0);
    return x;
}

}  // namespace aadd::scenarios
