#include "usc/reparam.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace usc;

namespace {

const CalculusConstants& constants_r1() {
    static const auto c = default_constants(1, 1.0);
    return c;
}
const CalculusConstants& constants_r2() {
    static const auto c = default_constants(2, 1.0);
    return c;
}

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

Vec cat_unstable() {
    Eigen::SelfAdjointEigenSolver<Mat> es(maps::cat_matrix());
    return es.eigenvectors().col(1);
}

ParamCurve quadratic_curve(double speed, Regularity reg) {
    return ParamCurve::polynomial(PhaseSpace::torus(2), v2(0.3, 0.6),
                                  VecPolynomial({Vec::Zero(2), v2(speed, 0.3 * speed), v2(0.0, 0.05 * speed)}), reg,
                                  "quadratic");
}

}  // namespace

TEST(AffineMap, CompositionMultipliesContractions) {
    const AffineMap outer{0.25, 0.5}, inner{-0.4, 0.125};
    const auto c = outer.compose(inner);
    EXPECT_EQ(c.b, outer.b * inner.b);
    for (double t : {-1.0, 0.3, 1.0}) EXPECT_DOUBLE_EQ(c(t), outer(inner(t)));
    EXPECT_TRUE(c.valid());
    EXPECT_FALSE((AffineMap{0.8, 0.5}).valid());
}

TEST(ParamCurve, DerivativesMatchDividedDifferences) {
    const auto c = quadratic_curve(0.01, {2, 1.0});
    const double h = 1e-5;
    for (double t : {-0.7, 0.0, 0.55}) {
        const Vec dd = (c.displacement(t + h) - c.displacement(t - h)) / (2 * h);
        EXPECT_LT((dd - c.derivative(t)).norm(), 1e-8);
    }
}

TEST(ParamCurve, RejectsDiscontinuousPieces) {
    const auto s = PhaseSpace::torus(2);
    std::vector<CurvePiece> pieces{{-1.0, 0.0, VecPolynomial({Vec::Zero(2), v2(1, 0)})},
                                   {0.0, 1.0, VecPolynomial({v2(0.1, 0), v2(1, 0)})}};
    EXPECT_THROW(ParamCurve(s, v2(0.5, 0.5), pieces, {}), DomainError);
    pieces[1].displacement = VecPolynomial({Vec::Zero(2), v2(1, 0)});
    EXPECT_NO_THROW(ParamCurve(s, v2(0.5, 0.5), pieces, {}));
}

TEST(ParamCurve, ReparametrizationMatchesPointwise) {
    const auto c = quadratic_curve(0.02, {2, 1.0});
    const AffineMap th{0.2, 0.3};
    const auto d = c.reparametrized(th);
    for (double s : {-1.0, 0.1, 1.0}) {
        EXPECT_LT((d.displacement(s) - c.displacement(th(s))).norm(), 1e-15);
        EXPECT_LT((d.derivative(s) - th.b * c.derivative(th(s))).norm(), 1e-15);
    }
}

TEST(CheckBounded, StraightSegmentIsStronglyBounded) {
    const double eps = 1e-3;
    const auto c = ParamCurve::segment(PhaseSpace::torus(2), v2(0.2, 0.2), v2(0.6 * eps, 0.8 * eps));
    const auto cert = check_bounded(c, eps);
    EXPECT_EQ(cert.verdict, BoundedVerdict::strongly_bounded);
    EXPECT_NEAR(cert.first, eps, 1e-15);
    EXPECT_EQ(cert.holder, 0.0);
    EXPECT_EQ(check_bounded(c, eps / 2).verdict, BoundedVerdict::bounded);
}

TEST(CheckBounded, ParabolaIsNotBounded) {
    const auto c = ParamCurve::polynomial(PhaseSpace::box(v2(-5, -5), v2(5, 5)), Vec::Zero(2),
                                          VecPolynomial({Vec::Zero(2), v2(1, 0), v2(0, 1)}), {1, 1.0});
    const auto cert = check_bounded(c);
    EXPECT_NEAR(cert.first, std::sqrt(5.0), 1e-12);
    EXPECT_NEAR(cert.holder, 2.0, 1e-12);
    EXPECT_EQ(cert.verdict, BoundedVerdict::neither);
}

TEST(CheckBounded, VerdictIsScaleInvariant) {
    for (double speed : {1e-6, 1e-3, 0.1}) {
        const auto a = check_bounded(quadratic_curve(speed, {2, 0.5}));
        const auto b = check_bounded(quadratic_curve(speed, {1, 1.0}));
        EXPECT_EQ(a.verdict, BoundedVerdict::bounded);
        EXPECT_EQ(b.verdict, check_bounded(quadratic_curve(1.0, {1, 1.0})).verdict);
        EXPECT_NEAR(a.ratio(), check_bounded(quadratic_curve(1.0, {2, 0.5})).ratio(), 1e-9);
    }
}

TEST(CheckBounded, ComposedGridAgreesWithExactForLinearMaps) {
    // The cat map is linear: cat o segment is again a segment with speed |A v|.
    const auto seg = ParamCurve::segment(PhaseSpace::torus(2), v2(0.1, 0.4), v2(1e-3, 0));
    const auto cert = check_bounded_composed({maps::cat_map(), 1}, seg, {});
    EXPECT_NEAR(cert.first, (maps::cat_matrix() * v2(1e-3, 0)).norm(), 1e-15);
    EXPECT_LT(cert.holder, 1e-12);
    EXPECT_EQ(cert.verdict, BoundedVerdict::bounded);
}

TEST(Reparam, ConformalLinearMapCoversEverything) {
    Mat a = 2.0 * Mat::Identity(2, 2);
    const auto g = maps::affine_trig("double_scale", a, Vec::Zero(2), {}, {}, 2.0);
    const double eps = 1e-3;
    const auto seg = ParamCurve::segment(PhaseSpace::torus(2), v2(0.3, 0.3), v2(0.0, eps));
    const MapPower gp{g, 1};
    const int chi = static_cast<int>(std::ceil(std::log(2.0)));
    const auto fam = reparametrize_step(gp, seg, chi, chi, eps, constants_r1());
    EXPECT_EQ(static_cast<int>(fam.blocks.size()), fam.base_count);
    for (const auto& b : fam.blocks) {
        EXPECT_EQ(b.band.lo, -1.0);
        EXPECT_EQ(b.band.hi, 1.0);
    }
    EXPECT_TRUE(fam.all_bounded());
    const auto cov = check_coverage(gp, seg, fam, 1000, 3);
    EXPECT_EQ(cov.sampled, 1000u);
    EXPECT_EQ(cov.misses, 0u);
}

TEST(Reparam, CatMapCountMatchesTheFormula) {
    const double eps = 1e-3;
    const auto seg = ParamCurve::segment(PhaseSpace::torus(2), v2(0.21, 0.37), eps * cat_unstable());
    const MapPower gp{maps::cat_map(), 1};
    const double lam = (3.0 + std::sqrt(5.0)) / 2.0;
    const int chi = static_cast<int>(std::ceil(std::log(lam)));
    const auto fam = reparametrize_step(gp, seg, chi, chi, eps, constants_r1());
    // Independent count: b = (3 C_B e^10)^{-1/alpha}, alpha = 1.
    const auto& c = constants_r1();
    const double b = 1.0 / (3.0 * c.c_b * std::exp(10.0));
    const double base = std::ceil(1.0 / b) + 1.0;
    const double parts = std::ceil(std::pow(1000.0 * std::exp(5.0) * c.c_k, 2.0)) + 1.0;
    EXPECT_EQ(static_cast<double>(fam.base_count), base);
    EXPECT_EQ(fam.parts, parts);
    EXPECT_EQ(static_cast<double>(fam.size()), base * parts);
    EXPECT_LE(std::log(base * parts), fam.log_bound);
    EXPECT_TRUE(fam.within_bound());
    EXPECT_TRUE(fam.all_bounded());
}

TEST(Reparam, StandardMapQuadraticCurve) {
    const auto f = maps::standard_map(0.8);
    const double eps = 0.5 / (2.0 * (f.upsilon() + 2.0)) * 0.5;
    const auto c = quadratic_curve(eps * 0.9, {2, 1.0});
    ASSERT_EQ(check_bounded(c, eps).verdict, BoundedVerdict::strongly_bounded);
    const MapPower gp{f, 1};
    const auto classes = exponent_classes(gp, c);
    ASSERT_FALSE(classes.empty());
    for (const auto& [cp, ch] : classes) {
        const auto fam = reparametrize_step(gp, c, cp, ch, eps, constants_r2());
        EXPECT_LE(fam.max_bands_per_piece, 2);
        EXPECT_TRUE(fam.within_bound());
        EXPECT_LE(fam.worst_certificate_ratio, 1.01);
        // Independent oracle: re-check members on the 1e-3 grid.
        for (std::size_t k = 0; k < fam.blocks.size(); k += std::max<std::size_t>(1, fam.blocks.size() / 7)) {
            const auto cert = check_bounded_composed(gp, c, fam.member(k, 0.0), {}, 1.01);
            EXPECT_NE(cert.verdict, BoundedVerdict::neither);
        }
        const auto cov = check_coverage(gp, c, fam, 1000, 11);
        EXPECT_GT(cov.sampled, 0u);
        EXPECT_EQ(cov.misses, 0u);
    }
}

TEST(Reparam, RejectsInconsistentInputs) {
    const double eps = 1e-3;
    const auto seg = ParamCurve::segment(PhaseSpace::torus(2), v2(0.2, 0.2), v2(eps, 0));
    const MapPower gp{maps::cat_map(), 1};
    EXPECT_THROW(reparametrize_step(gp, seg, 0, 1, eps, constants_r1()), DomainError);
    const auto big = ParamCurve::segment(PhaseSpace::torus(2), v2(0.2, 0.2), v2(0.2, 0));
    EXPECT_THROW(reparametrize_step(gp, big, 1, 1, 0.2, constants_r1()), DomainError);
    EXPECT_THROW(reparametrize_step(gp, seg, 1, 1, eps / 2, constants_r1()), DomainError);  // not strongly bounded
}

TEST(Reparam, IsDeterministic) {
    const auto f = maps::standard_map(0.8);
    const double eps = 0.5 / (2.0 * (f.upsilon() + 2.0)) * 0.5;
    const auto c = quadratic_curve(eps * 0.9, {2, 1.0});
    const MapPower gp{f, 1};
    const auto [cp, ch] = exponent_class(gp, c, 0.0);
    const auto a = reparametrize_step(gp, c, cp, ch, eps, constants_r2());
    const auto b = reparametrize_step(gp, c, cp, ch, eps, constants_r2());
    ASSERT_EQ(a.blocks.size(), b.blocks.size());
    for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        EXPECT_EQ(a.blocks[i].band.lo, b.blocks[i].band.lo);
        EXPECT_EQ(a.blocks[i].band.hi, b.blocks[i].band.hi);
    }
}

TEST(GrowthRate, ConstantAndGeometricHistories) {
    EXPECT_EQ(growth_rate({{0, 2.0}, {5, 2.0}, {10, 2.0}, {15, 2.0}}), 0.0);
    const double c = std::log(7.0), k = std::log(1e5);
    std::vector<std::pair<int, double>> h;
    for (int m = 0; m <= 6; ++m) h.push_back({10 * m, c + m * k});
    EXPECT_NEAR(growth_rate(h), k / 10.0, 1e-6);
}

TEST(Bowen, IdentityDynamicsKeepsCountConstant) {
    const auto f = maps::identity(2);
    const double eps = 1e-3;
    const auto seg = ParamCurve::segment(PhaseSpace::torus(2), v2(0.4, 0.4), v2(eps * 0.5, 0));
    BowenOptions opt;
    opt.skip_if_bounded = true;
    const auto cov = bowen_cover(f, seg, seg.point(0.0), 12, 3, eps, constants_r1(), opt);
    ASSERT_EQ(cov.levels.size(), 4u);
    for (const auto& l : cov.levels) EXPECT_EQ(l.log_count, 0.0);
    EXPECT_EQ(growth_rate(cov.history()), 0.0);
}

TEST(Bowen, CatMapExpandingDirection) {
    const auto f = maps::cat_map();
    for (int q : {2, 4}) {
        const double eps = 0.25 / (std::pow(f.upsilon(), q) + 2.0) * 0.5;
        const auto seg = ParamCurve::segment(PhaseSpace::torus(2), v2(0.31, 0.17), eps * cat_unstable());
        const auto cov = bowen_cover(f, seg, seg.point(0.0), 4 * q, q, eps, constants_r1());
        for (const auto& l : cov.levels) {
            ASSERT_EQ(l.classes.size(), 1u);
            EXPECT_EQ(l.classes[0].first, l.classes[0].second);
            EXPECT_NEAR(l.log_multiplier, cov.levels[0].log_multiplier, 1e-9);
            EXPECT_LE(l.max_log_speed, std::log1p(1e-6));
        }
        EXPECT_LE(growth_rate(cov.history()), cov.ceiling() + 1e-6);
    }
}

TEST(Bowen, GenericCurveStaysBelowCeiling) {
    const auto f = maps::cat_map();
    std::vector<double> ceilings;
    for (int q : {2, 4, 8}) {
        const double eps = 0.25 / (std::pow(f.upsilon(), q) + 2.0) * 0.5;
        const auto seg = ParamCurve::segment(PhaseSpace::torus(2), v2(0.31, 0.17), v2(eps, 0));
        const auto cov = bowen_cover(f, seg, seg.point(0.0), 3 * q, q, eps, constants_r1());
        EXPECT_LE(growth_rate(cov.history()), cov.ceiling() + 1e-6);
        EXPECT_TRUE(std::isfinite(cov.representative_log_contraction));
        ceilings.push_back(cov.ceiling());
    }
    EXPECT_GT(ceilings[0], ceilings[1]);
    EXPECT_GT(ceilings[1], ceilings[2]);
}

TEST(Bowen, RejectsLargeEpsilon) {
    const auto f = maps::cat_map();
    const auto seg = ParamCurve::segment(PhaseSpace::torus(2), v2(0.3, 0.3), v2(0.01, 0));
    EXPECT_THROW(bowen_cover(f, seg, seg.point(0.0), 20, 10, 0.01, constants_r1()), DomainError);
}
