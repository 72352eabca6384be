#include "generators.hpp"

#include "lodeq/numeric.hpp"
#include "lodeq/symmetry.hpp"

#include <gtest/gtest.h>

using namespace lodeq;

namespace {

const Expression t = Expression::t();

LinearODE ode3(Expression a0, Expression a1, Interval I) { return LinearODE({a0, a1, Expression(0)}, Expression(0), I); }

bool exactly(const VectorFieldLin& a, const VectorFieldLin& b) { return a.tau == b.tau && a.xi1 == b.xi1 && a.xi0 == b.xi0; }

VectorFieldLin scaled(Rational c, const VectorFieldLin& a) {
    return VectorFieldLin{Expression(c) * a.tau, Expression(c) * a.xi1, Expression(c) * a.xi0};
}

VectorFieldLin add(const VectorFieldLin& a, const VectorFieldLin& b) { return VectorFieldLin{a.tau + b.tau, a.xi1 + b.xi1, a.xi0 + b.xi0}; }

VectorFieldLin random_field(std::mt19937_64& rng) {
    return VectorFieldLin{lodeq::testing::random_polynomial(rng, 2), lodeq::testing::random_polynomial(rng, 2),
                          sin(lodeq::testing::random_polynomial(rng, 1))};
}

// Determining-condition oracle for R(tau) on x''' + a0 x = 0 with tau quadratic: the defect is
// (3 tau' a0 + tau a0') x after the x^{(r)} elimination (the tau''' x' term vanishes).
double direct_r_defect(const Expression& tau, const Expression& a0, double s) {
    return std::abs(evaluate(Expression(3) * differentiate(tau) * a0 + tau * differentiate(a0), s));
}

} // namespace

TEST(Symmetry, SL2BracketsAreExact) {
    for (int r = 2; r <= 6; ++r) {
        SL2Realization s = SL2Realization::make(r);
        EXPECT_TRUE(exactly(lie_bracket(s.P, s.D), s.P));
        EXPECT_TRUE(exactly(lie_bracket(s.P, s.K), scaled(2, s.D)));
        EXPECT_TRUE(exactly(lie_bracket(s.D, s.K), s.K));
    }
    // [R(1), R(t^2)] = R(2t) and [x dx, phi dx] = -phi dx.
    EXPECT_TRUE(exactly(lie_bracket(R_field(4, Expression(1)), R_field(4, pow(t, 2))), R_field(4, Expression(2) * t)));
    VectorFieldLin scale{Expression(0), Expression(1), Expression(0)};
    VectorFieldLin phi{Expression(0), Expression(0), exp(t)};
    EXPECT_TRUE(exactly(lie_bracket(scale, phi), VectorFieldLin{Expression(0), Expression(0), -exp(t)}));
}

TEST(Symmetry, BracketLawsOnRandomFields) {
    std::mt19937_64 rng(4);
    Interval I{1, 2};
    for (int trial = 0; trial < 10; ++trial) {
        VectorFieldLin a = random_field(rng), b = random_field(rng), c = random_field(rng);
        EXPECT_TRUE(same_field(lie_bracket(a, b), scaled(-1, lie_bracket(b, a)), I));
        VectorFieldLin jacobi = add(add(lie_bracket(a, lie_bracket(b, c)), lie_bracket(b, lie_bracket(c, a))),
                                    lie_bracket(c, lie_bracket(a, b)));
        EXPECT_TRUE(same_field(jacobi, VectorFieldLin{}, I));
        // R(tau) commutator law at the prolongation level.
        int r = 3 + trial % 3;
        Expression t1 = lodeq::testing::random_polynomial(rng, 3);
        Expression t2 = lodeq::testing::random_polynomial(rng, 3);
        VectorFieldLin br = lie_bracket(R_field(r, t1), R_field(r, t2));
        VectorFieldLin law = R_field(r, t1 * differentiate(t2) - t2 * differentiate(t1));
        EXPECT_TRUE(same_field(br, law, I));
        LinearODE ode = lodeq::testing::random_ode(rng, r, 2, I);
        InvarianceDefect d1 = invariance_defect(br, ode);
        InvarianceDefect d2 = invariance_defect(law, ode);
        for (int j = 0; j < r; ++j)
            EXPECT_TRUE(equiv_numeric(d1.rho[j], d2.rho[j], I, 20, 1e-9));
    }
}

TEST(Symmetry, ProlongationExamples) {
    Interval I{1, 2};
    VectorFieldLin scale{Expression(0), Expression(1), Expression(0)};
    std::mt19937_64 rng(6);
    for (int r = 2; r <= 5; ++r)
        EXPECT_LT(invariance_residual(scale, lodeq::testing::random_ode(rng, r, 2, I)), 1e-12);
    SL2Realization s = SL2Realization::make(3);
    LinearODE tx = ode3(t, Expression(0), I);
    EXPECT_GT(prolong_residual(s.P, tx, 1.5), 0.5);
    LinearODE zero = ode3(Expression(0), Expression(0), I);
    for (double t0 : {1.0, 1.5, 2.0}) {
        EXPECT_EQ(prolong_residual(s.K, zero, t0), 0.0);
        EXPECT_EQ(prolong_residual(s.D, zero, t0), 0.0);
    }
    // Oracle: the defect of R(tau) on x''' + t x = 0 computed by hand.
    for (const Expression& tau : {Expression(1), t, pow(t, 2)}) {
        InvarianceDefect d = invariance_defect(R_field(3, tau), tx);
        for (double p : {1.0, 1.3, 2.0}) {
            EXPECT_NEAR(std::abs(evaluate(d.rho[0], p)), direct_r_defect(tau, t, p), 1e-12);
            EXPECT_NEAR(evaluate(d.rho[1], p), 0.0, 1e-12);
            EXPECT_NEAR(evaluate(d.rho[2], p), 0.0, 1e-12);
        }
    }
}

TEST(Symmetry, SolutionSuperpositionGenerators) {
    std::mt19937_64 rng(7);
    Interval I{1, 2};
    for (int trial = 0; trial < 6; ++trial) {
        int r = 2 + trial % 4;
        LinearODE ode = lodeq::testing::random_ode(rng, r, 2, I);
        for (int i = 0; i < r; ++i) {
            std::vector<double> init(static_cast<std::size_t>(r), 0.0);
            init[static_cast<std::size_t>(i)] = 1;
            IVPSolution phi = solve_ivp(ode, 1.5, init);
            EXPECT_LT(invariance_residual(VectorFieldLin{Expression(0), Expression(0), phi.x()}, ode), 1e-7);
        }
        // A non-solution is not a symmetry.
        EXPECT_GT(invariance_residual(VectorFieldLin{Expression(0), Expression(0), exp(t)}, ode), 1e-3);
    }
}

TEST(Symmetry, CanonicalFamilies) {
    Interval I{1, 2};
    LinearODE e = canonical_family(FamilyKind::Euler, 3, {Rational(5)}, I);
    EXPECT_TRUE(e.coeff(0) == Expression(5) * pow(t, -3));
    LinearODE p = canonical_family(FamilyKind::Projective, 4, {Rational(2), Rational(3)}, Interval{-1, 1});
    Expression w = Expression(1) + pow(t, 2);
    EXPECT_TRUE(equiv_numeric(p.coeff(1), Expression(3) * pow(w, -3), Interval{-1, 1}));
    EXPECT_TRUE(equiv_numeric(p.coeff(0), (Expression(2) - Expression(9) * t) * pow(w, -4), Interval{-1, 1}));
    LinearODE c = canonical_family(FamilyKind::Constant, 3, {Rational(0)}, I);
    EXPECT_TRUE(c.coeff(0).is_zero());
    EXPECT_THROW(canonical_family(FamilyKind::Euler, 3, {Rational(1)}, Interval{-1, 1}), InvalidArgument);
}

TEST(Symmetry, FamilyWitnessConstants) {
    // Euler: t~ = ln t, X1 = 1/t gives constant coefficients with a~_1 = -1.
    LinearODE e = canonical_family(FamilyKind::Euler, 3, {Rational(5)}, Interval{1, 2});
    LinearODE eo = apply_to_ode(PointTransformation(log(t), pow(t, -1), Expression(0), Interval{1, 2}), e);
    EXPECT_TRUE(equiv_numeric(eo.coeff(1), Expression(-1), eo.interval(), 50, 1e-12));
    EXPECT_TRUE(equiv_numeric(eo.coeff(0), Expression(5), eo.interval(), 50, 1e-12));
    // Projective: t~ = atan t, X1 = 1/(1+t^2) gives a~_1 = 4.
    LinearODE p = canonical_family(FamilyKind::Projective, 3, {Rational(2)}, Interval{-1, 1});
    Expression w = Expression(1) + pow(t, 2);
    LinearODE po = apply_to_ode(PointTransformation(atan(t), pow(w, -1), Expression(0), Interval{-1, 1}), p);
    EXPECT_TRUE(equiv_numeric(po.coeff(1), Expression(4), po.interval(), 50, 1e-12));
    EXPECT_TRUE(equiv_numeric(po.coeff(0), Expression(2), po.interval(), 50, 1e-12));
}

TEST(Symmetry, ClassificationOfFixtures) {
    Interval I{1, 2};
    SymmetryClassification z = classify_dimension(ode3(Expression(0), Expression(0), I));
    EXPECT_EQ(z.dimension, 7);
    EXPECT_EQ(z.label, CaseLabel::Elementary);
    EXPECT_EQ(z.confidence, Confidence::Exact);

    SymmetryClassification c = classify_dimension(ode3(Expression(1), Expression(0), I));
    EXPECT_EQ(c.dimension, 5);
    EXPECT_EQ(c.label, CaseLabel::ConstantEquivalent);
    EXPECT_EQ(c.pattern, "constant");

    SymmetryClassification e = classify_dimension(canonical_family(FamilyKind::Euler, 3, {Rational(5)}, I));
    EXPECT_EQ(e.dimension, 5);
    EXPECT_EQ(e.pattern, "euler");
    ASSERT_TRUE(e.witness.has_value());
    EXPECT_TRUE(equiv_numeric(e.witness->T(), log(t), I));

    SymmetryClassification p = classify_dimension(canonical_family(FamilyKind::Projective, 3, {Rational(2)}, I));
    EXPECT_EQ(p.dimension, 5);
    EXPECT_EQ(p.pattern, "projective");
    ASSERT_TRUE(p.witness.has_value());
    EXPECT_TRUE(equiv_numeric(p.witness->T(), atan(t), I));

    SymmetryClassification g = classify_dimension(ode3(t, Expression(0), I));
    EXPECT_EQ(g.dimension, 4);
    EXPECT_EQ(g.label, CaseLabel::Generic);

    // x''' - x' = 0 is the image of x''' = 0 under t~ = ln t.
    EXPECT_EQ(classify_dimension(ode3(Expression(0), Expression(-1), I)).dimension, 7);
    EXPECT_EQ(classify_dimension(LinearODE({Expression(3), Expression(1)}, Expression(0), I)).dimension, 8);
    // Inhomogeneous equations are classified through their homogeneous part.
    EXPECT_EQ(classify_dimension(LinearODE({Expression(1), Expression(0), Expression(0)}, sin(t), I)).dimension, 5);
}

TEST(Symmetry, WitnessesReachCanonicalRepresentatives) {
    Interval I{1, 2};
    std::mt19937_64 rng(10);
    std::vector<LinearODE> fixtures = {ode3(Expression(1), Expression(0), I), canonical_family(FamilyKind::Euler, 3, {Rational(5)}, I),
                                       ode3(Expression(0), Expression(0), I)};
    for (const auto& f : fixtures)
        for (int k = 0; k < 3; ++k) {
            LinearODE g = apply_to_ode(lodeq::testing::random_transformation(rng, I, false), f);
            SymmetryClassification c = classify_dimension(g);
            ASSERT_TRUE(c.witness.has_value()) << c.pattern;
            LinearODE image = apply_to_ode(*c.witness, g.restricted(c.witness->source()));
            for (int m = 0; m < 3; ++m) {
                double spread = sup_norm(differentiate(image.coeff(m)), image.interval());
                EXPECT_LT(spread, 1e-5) << c.pattern << " coefficient " << m;
            }
        }
}

TEST(Symmetry, ClassificationInvariantUnderEquivalence) {
    Interval I{1, 2};
    std::mt19937_64 rng(11);
    std::vector<std::pair<LinearODE, int>> fixtures = {
        {ode3(Expression(0), Expression(0), I), 7},
        {ode3(Expression(1), Expression(0), I), 5},
        {ode3(t, Expression(0), I), 4},
        {LinearODE({Expression(1), Expression(0), Expression(-2), Expression(0)}, Expression(0), I), 6},
    };
    for (const auto& [f, dim] : fixtures)
        for (int k = 0; k < 3; ++k) {
            LinearODE g = apply_to_ode(lodeq::testing::random_transformation(rng, I), f);
            EXPECT_EQ(classify_dimension(g).dimension, dim);
        }
}
