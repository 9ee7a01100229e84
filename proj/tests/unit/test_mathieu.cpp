#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ptrap/error.hpp"
#include "ptrap/mathieu.hpp"

using namespace ptrap;

namespace {

const OperatingPoint kOp = OperatingPoint::at_hz(-5.3, 700.0, 500e3);

}  // namespace

TEST(ContinuedFraction, MatchesFloquetOracle) {
    const double points[][2] = {{0.0, 0.1},     {0.0, 0.3},    {0.0, 0.7},     {0.0, 0.9},   {0.02818, 0.3562},
                                {-0.00687, 0.453}, {0.2, 0.5}, {-0.05, 0.6},   {0.1, 0.0},   {0.3, 0.2}};
    for (const auto& p : points) {
        const double want = oracle::floquet_beta(p[0], p[1]);
        ASSERT_GT(want, 0.0);
        EXPECT_NEAR(beta_continued_fraction({p[0], p[1], Axis::z}), want, 1e-8) << "a=" << p[0] << " q=" << p[1];
    }
}

TEST(ContinuedFraction, KnownValues) {
    EXPECT_NEAR(beta_continued_fraction({0.0, 0.3, Axis::z}), 0.2160591349, 1e-9);
    EXPECT_NEAR(beta_continued_fraction({0.0, 0.7, Axis::z}), 0.5630661610, 1e-9);
    EXPECT_NEAR(beta_continued_fraction({0.09, 0.0, Axis::z}), 0.3, 1e-12);
}

TEST(ContinuedFraction, EvenInQ) {
    EXPECT_DOUBLE_EQ(beta_continued_fraction({0.01, 0.4, Axis::x}), beta_continued_fraction({0.01, -0.4, Axis::x}));
}

TEST(ContinuedFraction, UnstablePointsThrow) {
    EXPECT_THROW(beta_continued_fraction({0.0, 0.95, Axis::z}), InstabilityError);
    EXPECT_THROW(beta_continued_fraction({-0.2, 0.1, Axis::z}), InstabilityError);
    EXPECT_THROW(beta_continued_fraction({-0.01, 0.0, Axis::z}), InstabilityError);
    const SecularResult r = analyze({0.0, 0.95, Axis::z}, kOp);
    EXPECT_FALSE(r.stable);
}

TEST(Approximation, GapGrowsWithQ) {
    // sqrt(a + q^2/2) stays within 1% only up to q ~ 0.22 at a = 0
    double previous = 0.0;
    for (double q = 0.02; q < 0.9; q += 0.02) {
        const MathieuParams p{0.0, q, Axis::z};
        const double cf = beta_continued_fraction(p), approx = beta_approx(p);
        EXPECT_GE(cf, approx) << q;
        const double gap = cf / approx - 1.0;
        EXPECT_GT(gap, previous) << q;
        previous = gap;
        if (q <= 0.2) EXPECT_LT(gap, 0.01) << q;
    }
    const MathieuParams p{0.0, 0.7, Axis::z};
    EXPECT_GT(std::abs(beta_approx(p) / beta_continued_fraction(p) - 1.0), 0.02);
    EXPECT_NEAR(beta_approx({0.0, 0.2, Axis::z}), std::sqrt(0.02), 1e-15);
    EXPECT_NEAR(beta_approx({-0.00687, 0.453, Axis::z}), 0.309, 5e-4);
    EXPECT_THROW(beta_approx({-0.1, 0.2, Axis::z}), InstabilityError);
}

TEST(Approximation, SmallQLimit) {
    const MathieuParams p{0.0, 1e-3, Axis::z};
    EXPECT_NEAR(beta_continued_fraction(p) / beta_approx(p), 1.0, 1e-4);
}

TEST(SecularFrequency, Scaling) {
    EXPECT_DOUBLE_EQ(secular_frequency(0.2, kOp), 50e3);
    EXPECT_THROW(secular_frequency(1.2, kOp), InstabilityError);
    EXPECT_THROW(secular_frequency(0.0, kOp), InstabilityError);
}

TEST(IdealAq, MatchesEquationOfMotion) {
    const IonSpecies ion = IonSpecies::europium151();
    const TrapGeometry g = make_paper_trap();
    const double qm = ion.specific_charge();
    for (Axis axis : kAllAxes) {
        const double c = axis == Axis::z ? -1.0 : 0.5;
        const auto [a, q] = oracle::mathieu_from_curvature(qm, g.r0, kOp.drive_angular_frequency, kOp.u_dc, kOp.v_rf, c);
        const MathieuParams p = ideal_aq(ion, g, kOp, axis);
        EXPECT_NEAR(p.a, a, 1e-12 * std::abs(a));
        EXPECT_NEAR(p.q, q, 1e-12 * std::abs(q));
        EXPECT_EQ(p.axis, axis);
    }
    const MathieuParams z = ideal_aq(ion, g, kOp, Axis::z);
    const MathieuParams x = ideal_aq(ion, g, kOp, Axis::x);
    EXPECT_NEAR(x.a, -0.5 * z.a, 1e-15);
    EXPECT_NEAR(x.q, -0.5 * z.q, 1e-15);
}

TEST(PerturbedAq, IdealCoefficientsReduceToIdeal) {
    const IonSpecies ion = IonSpecies::europium153();
    const TrapGeometry g = make_paper_trap();
    for (Axis axis : kAllAxes) {
        const MathieuParams p = perturbed_aq(ion, g, kOp, ideal_coefficients(), axis);
        const MathieuParams i = ideal_aq(ion, g, kOp, axis);
        EXPECT_EQ(p.a, i.a);
        EXPECT_EQ(p.q, i.q);
    }
}

TEST(PerturbedAq, MatchesEquationOfMotion) {
    const IonSpecies ion = IonSpecies::europium151();
    const TrapGeometry g = make_paper_trap();
    const MultipoleCoefficients c = paper_table_coefficients();
    for (Axis axis : kAllAxes) {
        const auto [a, q] = oracle::mathieu_from_curvature(ion.specific_charge(), g.r0, kOp.drive_angular_frequency,
                                                           kOp.u_dc, kOp.v_rf, c.quadratic(axis));
        const MathieuParams p = perturbed_aq(ion, g, kOp, c, axis);
        EXPECT_NEAR(p.a, a, 1e-12 * std::abs(a));
        EXPECT_NEAR(p.q, q, 1e-12 * std::abs(q));
    }
}

TEST(PerturbedAq, ReferenceRadialFrequencies) {
    const IonSpecies ion = IonSpecies::europium151();
    const TrapGeometry g = make_paper_trap();
    const MultipoleCoefficients c = paper_table_coefficients();
    const SecularResult x = analyze(perturbed_aq(ion, g, kOp, c, Axis::x), kOp);
    const SecularResult y = analyze(perturbed_aq(ion, g, kOp, c, Axis::y), kOp);
    ASSERT_TRUE(x.stable && y.stable);
    EXPECT_NEAR(x.secular_frequency, 53.5e3, 0.03 * 53.5e3);
    EXPECT_NEAR(y.secular_frequency, 41.73e3, 0.03 * 41.73e3);
    // independent Floquet evaluation of the same (a, q)
    const MathieuParams px = perturbed_aq(ion, g, kOp, c, Axis::x);
    EXPECT_NEAR(x.beta, oracle::floquet_beta(px.a, px.q), 1e-8);
}
