#include "usc/calculus.hpp"
#include "usc/polynomial.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace usc;

TEST(Polynomial, EvaluatesAndDifferentiates) {
    const Polynomial p({1.0, -2.0, 0.0, 3.0});  // 1 - 2x + 3x^3
    EXPECT_DOUBLE_EQ(p(2.0), 1.0 - 4.0 + 24.0);
    EXPECT_DOUBLE_EQ(p.derivative()(2.0), -2.0 + 36.0);
    EXPECT_DOUBLE_EQ(p.derivative(3)(0.3), 18.0);
    EXPECT_EQ(p.derivative(4).degree(), -1);
    EXPECT_EQ(p.degree(), 3);
}

TEST(Polynomial, AffineCompositionMatchesPointwise) {
    const Polynomial p({0.5, 1.0, -1.5, 0.25, 2.0});
    const auto q = p.compose_affine(0.3, -0.7);
    for (double t : {-1.0, -0.2, 0.4, 1.0}) EXPECT_NEAR(q(t), p(0.3 - 0.7 * t), 1e-12);
    const Polynomial inner({0.1, 0.0, 0.5});
    const auto c = p.compose(inner);
    for (double t : {-1.0, 0.3, 0.9}) EXPECT_NEAR(c(t), p(inner(t)), 1e-12);
}

TEST(RootIsolation, FindsSimpleRootsToTolerance) {
    const Polynomial p({-2.0, 0.0, 1.0});
    const auto roots = isolate_roots(p, -2.0, 2.0);
    ASSERT_TRUE(roots.has_value());
    ASSERT_EQ(roots->size(), 2u);
    for (const auto& iv : *roots) EXPECT_LE(iv.width(), 1e-9);
    EXPECT_TRUE((*roots)[0].contains(-std::sqrt(2.0)));
    EXPECT_TRUE((*roots)[1].contains(std::sqrt(2.0)));
}

TEST(RootIsolation, MatchesProductOfLinearFactors) {
    // Independent oracle: roots planted as factors.
    const std::vector<double> planted = {-0.9, -0.31, 0.05, 0.47, 0.8};
    Polynomial p({1.0});
    for (double r : planted) p = p * Polynomial({-r, 1.0});
    const auto roots = isolate_roots(p, -1.0, 1.0);
    ASSERT_EQ(roots->size(), planted.size());
    for (std::size_t i = 0; i < planted.size(); ++i) {
        const auto& iv = (*roots)[i];
        EXPECT_LE(iv.lo, planted[i] + 1e-12);
        EXPECT_GE(iv.hi, planted[i] - 1e-12);
    }
}

TEST(RootIsolation, EndpointAndDoubleRoots) {
    const Polynomial p({0.0, 1.0});  // root at the endpoint 0
    const auto a = isolate_roots(p, 0.0, 1.0);
    ASSERT_EQ(a->size(), 1u);
    EXPECT_EQ((*a)[0].lo, 0.0);
    const Polynomial sq = Polynomial({-0.25, 1.0}) * Polynomial({-0.25, 1.0});
    const auto b = isolate_roots(sq, -1.0, 1.0);
    ASSERT_EQ(b->size(), 1u);
    EXPECT_TRUE((*b)[0].contains(0.25));
    EXPECT_FALSE(isolate_roots(Polynomial({0.0}), -1.0, 1.0).has_value());
}

TEST(RootIsolation, IsDeterministic) {
    const auto ps = random_test_polynomials(20, 6, 4);
    for (const auto& p : ps) {
        const auto a = isolate_roots(p, -1.0, 1.0);
        const auto b = isolate_roots(p, -1.0, 1.0);
        if (!a) continue;
        ASSERT_EQ(a->size(), b->size());
        for (std::size_t i = 0; i < a->size(); ++i) {
            EXPECT_EQ((*a)[i].lo, (*b)[i].lo);
            EXPECT_EQ((*a)[i].hi, (*b)[i].hi);
        }
    }
}

TEST(BandIntervals, CoverTheTrueSetAndSnapOutward) {
    const Polynomial p({0.0, 0.0, 1.0});
    const auto band = band_intervals(p, 0.25, 1.0, -2.0, 2.0);
    ASSERT_EQ(band.size(), 2u);
    EXPECT_LE(band[0].lo, -1.0);
    EXPECT_GE(band[0].hi, -0.5);
    EXPECT_NEAR(band[0].lo, -1.0, 1e-9);
    EXPECT_NEAR(band[1].hi, 1.0, 1e-9);
    // Every sampled point of the true set is covered.
    for (int i = 0; i <= 4000; ++i) {
        const double t = -2.0 + 4.0 * i / 4000.0;
        if (p(t) > 0.25 && p(t) < 1.0) {
            bool hit = false;
            for (const auto& iv : band) hit |= iv.contains(t);
            EXPECT_TRUE(hit) << t;
        }
    }
}

TEST(BandIntervals, ResolvesBandsFarBelowCoefficientScale) {
    // |p|^2 of an expanded curve image: the band edge sits at 5e-9 while the
    // coefficients are 1e-2; rounding noise in the odd coefficients.
    const Polynomial p({2.4e-34, -3.3e-18, 0.0113064, 4.4e-18, 4.3e-34});
    const double level = 3e-19;
    RootOptions opt;
    opt.abs_tol = 0.0;
    opt.rel_tol = 1e-13;
    const auto bands = band_intervals(p, -1.0, level, -1.0, 1.0, opt);
    ASSERT_EQ(bands.size(), 1u);
    const double edge = std::sqrt(level / 0.0113064);
    EXPECT_NEAR(bands[0].hi, edge, 1e-3 * edge);
    EXPECT_NEAR(bands[0].lo, -edge, 1e-3 * edge);
}

TEST(BandIntervals, ConstantPolynomialIsAllOrNothing) {
    EXPECT_EQ(band_intervals(Polynomial({0.5}), 0.25, 1.0, -1.0, 1.0).size(), 1u);
    EXPECT_TRUE(band_intervals(Polynomial({3.0}), 0.25, 1.0, -1.0, 1.0).empty());
}

TEST(BandIntervals, CountStaysWithinCrossingBound) {
    // A degree-2k polynomial crosses two levels at most 4k times: <= 2k + 1 intervals.
    for (const auto& p : random_test_polynomials(200, 4, 9)) {
        const auto band = band_intervals(p, -0.2, 0.3, -1.0, 1.0);
        EXPECT_LE(static_cast<int>(band.size()), std::max(1, p.degree() + 1));
    }
}

TEST(VecPolynomial, SupAndInfNorms) {
    const VecPolynomial c({Vec::Zero(2), Vec::Unit(2, 0), Vec::Unit(2, 1)});  // (t, t^2)
    EXPECT_NEAR(c.derivative().sup_norm(-1.0, 1.0), std::sqrt(5.0), 1e-12);
    EXPECT_NEAR(c.derivative().inf_norm(-1.0, 1.0), 1.0, 1e-12);
    EXPECT_NEAR(c.derivative(2).sup_norm(-1.0, 1.0), 2.0, 1e-12);
    const auto s = c.compose_affine(0.5, 0.25);
    EXPECT_NEAR((s(0.4) - c(0.6)).norm(), 0.0, 1e-14);
}

TEST(Calculus, ConstantFunctionHoldsWithMargin) {
    CalculusConstants c = default_constants(2, 0.5);
    const auto rep = calculus_inequality_suite({Polynomial({3.0}), Polynomial({-1.0})}, c);
    EXPECT_TRUE(rep.all_hold());
    EXPECT_LT(rep.interpolation.minimal_constant, c.c_k);
    EXPECT_EQ(rep.taylor.minimal_constant, 0.0);
}

TEST(Calculus, MonomialOfDegreeRHasExactTaylorExpansion) {
    for (int r = 1; r <= 3; ++r) {
        CalculusConstants c = default_constants(r, 1.0);
        const auto rep = calculus_inequality_suite({Polynomial::monomial(r)}, c, 5);
        EXPECT_TRUE(rep.taylor.holds());
        EXPECT_EQ(rep.taylor.minimal_constant, 0.0);
    }
}

TEST(Calculus, InterpolationConstantMatchesMarkovExtremal) {
    // Degree-r Chebyshev polynomials have no Hölder term and attain
    // sup|T_r^{(r)}| = 2^{r-1} r!, so the minimal constant is at least that.
    for (int r = 1; r <= 3; ++r) {
        CalculusReport rep;
        calibrate_constants(r, 0.5, 0, 1000, 2.0, 6, &rep);
        double markov = std::pow(2.0, r - 1);
        for (int k = 2; k <= r; ++k) markov *= k;
        EXPECT_GE(rep.interpolation.minimal_constant, markov - 1e-9);
    }
}

TEST(Calculus, CalibratedConstantsHoldOnFreshInstances) {
    const auto c = calibrate_constants(2, 0.5, 0);
    const auto fresh = random_test_polynomials(1000, 6, 77);
    const auto rep = calculus_inequality_suite(fresh, c, 77);
    EXPECT_TRUE(rep.interpolation.holds());
    EXPECT_TRUE(rep.taylor.holds());
    EXPECT_TRUE(rep.composition.holds());
    EXPECT_TRUE(rep.product.holds());
    EXPECT_EQ(rep.interpolation.instances, 1000u);
}

TEST(Calculus, ViolationNamesFunctionAndMinimalConstant) {
    CalculusConstants tight = default_constants(1, 1.0);
    tight.c_k = 0.5;
    const auto rep = calculus_inequality_suite({Polynomial({0.0, 1.0})}, tight);
    ASSERT_FALSE(rep.interpolation.holds());
    EXPECT_EQ(rep.interpolation.violations[0].function, "poly#0 deg 1");
    EXPECT_NEAR(rep.interpolation.violations[0].ratio, 1.0, 1e-12);
}

TEST(Calculus, CalibrationStableAcrossSeeds) {
    const auto a = calibrate_constants(2, 0.5, 1);
    const auto b = calibrate_constants(2, 0.5, 2);
    EXPECT_NEAR(a.c_k / b.c_k, 1.0, 0.05);
    EXPECT_NEAR(a.c_b / b.c_b, 1.0, 0.05);
    EXPECT_NEAR(a.c_l / b.c_l, 1.0, 0.05);
}

TEST(Calculus, PrefactorAgreesWithItsLogarithm) {
    const auto c = default_constants(1, 1.0);
    EXPECT_NEAR(std::log(c.c_r_alpha()), c.log_c_r_alpha(), 1e-9);
    EXPECT_EQ(c.bezout(), 1);
    EXPECT_EQ(default_constants(3, 1.0).bezout(), 5);
}
