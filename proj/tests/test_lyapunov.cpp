#include "usc/lyapunov.hpp"

#include <gtest/gtest.h>

using namespace usc;

namespace {

const double kCatLog = std::log((3.0 + std::sqrt(5.0)) / 2.0);

Mat random_matrix(int d, CounterRng& rng, std::uint64_t& ctr) {
    Mat m(d, d);
    for (int i = 0; i < d * d; ++i) m.data()[i] = 4.0 * rng.uniform(ctr++) - 2.0;
    return m;
}

Vec henon_attractor_point(long skip = 1000) {
    const auto h = maps::henon();
    return h.iterate_point(Vec{{0.1, 0.1}}, skip);
}

}  // namespace

TEST(ExteriorNorm, HandExamples) {
    Mat d3 = Vec{{3.0, 2.0, 1.0}}.asDiagonal();
    EXPECT_NEAR(exterior_norm(d3, 2), 6.0, 1e-12);
    for (int k = 1; k <= 3; ++k) EXPECT_NEAR(exterior_norm(Mat::Identity(3, 3), k), 1.0, 1e-15);
    EXPECT_NEAR(exterior_norm(maps::cat_matrix(), 2), 1.0, 1e-12);
    EXPECT_THROW(exterior_norm(d3, 0), DomainError);
    EXPECT_THROW(exterior_norm(d3, 4), DomainError);
}

TEST(ExteriorNorm, TopGradeIsDeterminantAndSubmultiplicative) {
    CounterRng rng(11);
    std::uint64_t ctr = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const int d = 1 + trial % 3;
        const Mat a = random_matrix(d, rng, ctr);
        const Mat b = random_matrix(d, rng, ctr);
        EXPECT_NEAR(exterior_norm(a, d), std::abs(a.determinant()), 1e-10 * std::max(1.0, std::abs(a.determinant())));
        for (int k = 1; k <= d; ++k)
            EXPECT_LE(exterior_norm(a * b, k), exterior_norm(a, k) * exterior_norm(b, k) * (1 + 1e-12));
    }
}

TEST(ExteriorNorm, CompoundMatrixNormAgrees) {
    CounterRng rng(12);
    std::uint64_t ctr = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const Mat a = random_matrix(3, rng, ctr);
        for (int k = 1; k <= 3; ++k)
            EXPECT_NEAR(operator_norm(compound_matrix(a, k)), exterior_norm(a, k), 1e-10 * exterior_norm(a, k) + 1e-14);
    }
}

TEST(PhiN, IdentityAndCat) {
    EXPECT_EQ(phi_n(maps::identity(2), Vec{{0.4, 0.1}}, 17), 0.0);
    Eigen::JacobiSVD<Mat> svd(maps::cat_matrix());
    EXPECT_NEAR(phi_n(maps::cat_map(), Vec{{0.4, 0.1}}, 1), std::log(svd.singularValues()(0)), 1e-12);
    for (long n : {5L, 50L, 500L, 5000L})
        EXPECT_NEAR(phi_n(maps::cat_map(), Vec{{0.3, 0.8}}, n), n * kCatLog, 1.0);
    EXPECT_THROW(phi_n(maps::cat_map(), Vec{{0.3, 0.8}}, 0), DomainError);
}

TEST(PhiN, SubadditiveOnRandomTriples) {
    const std::vector<Diffeomorphism> fams = {maps::cat_map(), maps::standard_map(1.5), maps::henon(),
                                              maps::toral_automorphism(maps::expanding_3d_matrix()),
                                              maps::perturbed_automorphism(maps::cat_matrix(), 0.1)};
    CounterRng rng(21);
    std::uint64_t ctr = 0;
    for (const auto& f : fams) {
        for (int trial = 0; trial < 200; ++trial) {
            Vec x = f.space().is_torus() ? Vec(f.dim()) : henon_attractor_point(1000 + trial);
            if (f.space().is_torus())
                for (int a = 0; a < f.dim(); ++a) x(a) = rng.uniform(ctr++);
            const long n = 1 + static_cast<long>(rng.uniform(ctr++) * 30);
            const long m = 1 + static_cast<long>(rng.uniform(ctr++) * 30);
            const double lhs = phi_n(f, x, n + m);
            const double rhs = phi_n(f, f.iterate_point(x, m), n) + phi_n(f, x, m);
            EXPECT_LE(lhs, rhs + 1e-9) << f.name() << " n=" << n << " m=" << m;
        }
    }
}

TEST(Benettin, IdentityIsZero) {
    const auto s = benettin_spectrum(maps::identity(2), Vec{{0.1, 0.2}}, 1000);
    for (double x : s.exponents()) EXPECT_NEAR(x, 0.0, 1e-14);
    EXPECT_EQ(s.groups().size(), 1u);
    EXPECT_EQ(s.groups()[0].multiplicity, 2);
}

TEST(Benettin, CatMapEigenvalues) {
    Eigen::SelfAdjointEigenSolver<Mat> es(maps::cat_matrix());
    const double top = std::log(es.eigenvalues().maxCoeff());
    const auto s = benettin_spectrum(maps::cat_map(), Vec{{0.123, 0.456}}, 100000);
    EXPECT_NEAR(s.exponents()[0], top, 1e-3);
    EXPECT_NEAR(s.exponents()[1], -top, 1e-3);
    EXPECT_EQ(s.groups().size(), 2u);
}

TEST(Benettin, IntegrableStandardMap) {
    const auto s = benettin_spectrum(maps::standard_map(0.0), Vec{{0.2, 0.3}}, 20000);
    EXPECT_NEAR(s.exponents()[0], 0.0, 1e-2);
    EXPECT_NEAR(s.exponents()[1], 0.0, 1e-2);
}

TEST(Benettin, ShortRunRejected) {
    EXPECT_THROW(benettin_spectrum(maps::cat_map(), Vec{{0.1, 0.1}}, 99), DomainError);
}

TEST(Spectrum, DerivedQuantities) {
    const ExponentSpectrum a({1.0, 0.3, -1.3});
    EXPECT_NEAR(a.lambda_center(), 0.3, 1e-15);
    EXPECT_NEAR(lambda_center(ExponentSpectrum({0.5, -0.2, -0.9})), -0.2, 1e-15);
    EXPECT_DOUBLE_EQ(a.lambda_plus(), 1.0);
    EXPECT_DOUBLE_EQ(a.lambda_minus(), -1.3);
    EXPECT_DOUBLE_EQ(a.lambda_sigma_plus(), 1.3);
    EXPECT_GE(a.lambda_sigma_plus(), a.lambda_plus());
    EXPECT_EQ(center_sign(a), 1);
    EXPECT_THROW(ExponentSpectrum({0.1, 0.2}).lambda_center(), DomainError);
    const ExponentSpectrum sorted({-1.0, 2.0, 0.01});
    EXPECT_EQ(sorted.exponents().front(), 2.0);
    const ExponentSpectrum clustered({0.51, 0.5, -1.0});
    ASSERT_EQ(clustered.groups().size(), 2u);
    EXPECT_EQ(clustered.groups()[0].multiplicity, 2);
}

TEST(Spectrum, SigmaPlusDominatesPlus) {
    for (const auto& f : {maps::cat_map(), maps::standard_map(2.0), maps::henon(),
                          maps::toral_automorphism(maps::expanding_3d_matrix())}) {
        const Vec p = f.space().is_torus() ? Vec::Constant(f.dim(), 0.377) : henon_attractor_point();
        const auto s = benettin_spectrum(f, p, 5000);
        EXPECT_GE(s.lambda_sigma_plus(), s.lambda_plus());
        EXPECT_GE(s.lambda_plus(), 0.0);
    }
}

TEST(JacobianIdentity, CatHenonIdentity) {
    const auto cat = maps::cat_map();
    const auto cs = benettin_spectrum(cat, Vec{{0.123, 0.456}}, 20000);
    EXPECT_LE(jacobian_identity_residual(cs, cat, lebesgue_sample(cat.space(), 100, 1)), 1e-3);

    const auto h = maps::henon();
    const Vec p = henon_attractor_point();
    const auto hs = benettin_spectrum(h, p, 20000);
    const auto on_attractor = orbit_measure(h, p, 2000);
    EXPECT_LE(jacobian_identity_residual(hs, h, on_attractor), 1e-2);
    EXPECT_NEAR(on_attractor.integrate([&](const Vec& x) { return std::log(std::abs(h.jacobian(x).determinant())); }),
                std::log(0.3), 1e-12);

    const auto id = maps::identity(2);
    EXPECT_EQ(jacobian_identity_residual(benettin_spectrum(id, Vec{{0.1, 0.1}}, 100), id,
                                         lebesgue_sample(id.space(), 10, 2)),
              0.0);
}

TEST(CenterExponent, CatTimesRotation) {
    const auto f = maps::product_with_rotation(maps::cat_map(), std::sqrt(2.0) - 1.0);
    const auto s = benettin_spectrum(f, Vec{{0.1, 0.2, 0.3}}, 20000);
    EXPECT_NEAR(s.lambda_center(), 0.0, 1e-2);
    EXPECT_EQ(center_sign(s), 0);
}

TEST(SigmaPlus, IdentityCatAndProduct) {
    std::vector<long> sched;
    for (long n = 2; n <= 64; n += 2) sched.push_back(n);
    const auto id = maps::identity(2);
    EXPECT_EQ(lambda_sigma_plus(id, lebesgue_sample(id.space(), 50, 3), sched).value, 0.0);

    const auto cat = maps::cat_map();
    const auto est = lambda_sigma_plus(cat, lebesgue_sample(cat.space(), 1000, 4), sched);
    EXPECT_NEAR(est.value, kCatLog, 1e-2);
    for (std::size_t i = 1; i < est.running_inf.size(); ++i) EXPECT_LE(est.running_inf[i], est.running_inf[i - 1]);
    EXPECT_FALSE(est.drift_warning);

    const auto prod = maps::product_with_rotation(cat, 0.3819660112501051);
    EXPECT_NEAR(lambda_sigma_plus(prod, lebesgue_sample(prod.space(), 1000, 5), sched).value, kCatLog, 1e-2);
}

TEST(SigmaPlus, ScheduleValidation) {
    const auto cat = maps::cat_map();
    const auto mu = lebesgue_sample(cat.space(), 10, 1);
    const std::vector<long> bad = {4, 2};
    EXPECT_THROW(lambda_sigma_plus(cat, mu, bad), DomainError);
    EXPECT_THROW(lambda_sigma_plus(cat, mu, std::vector<long>{}), DomainError);
    EXPECT_THROW(lambda_sigma_plus(maps::identity(3), mu, std::vector<long>{1}), DomainError);
}

TEST(SigmaPlus, ThreadCountDoesNotChangeResult) {
    const auto f = maps::standard_map(1.8);
    const auto mu = lebesgue_sample(f.space(), 200, 8);
    const std::vector<long> sched = {1, 2, 4, 8, 16};
    SubadditiveOptions one, four;
    four.threads = 4;
    const auto a = lambda_sigma_plus(f, mu, sched, one);
    const auto b = lambda_sigma_plus(f, mu, sched, four);
    EXPECT_EQ(a.averages, b.averages);
}

TEST(SigmaPlus, ContinuousInFamilyParameter) {
    const Mat a = maps::cat_matrix();
    const auto mu = lebesgue_sample(PhaseSpace::torus(2), 500, 13);
    const std::vector<long> sched = {6};
    for (double t : {0.0, 0.02, 0.05}) {
        const double v0 = lambda_sigma_plus(maps::perturbed_automorphism(a, t), mu, sched).value;
        const double v1 = lambda_sigma_plus(maps::perturbed_automorphism(a, t + 1e-3), mu, sched).value;
        EXPECT_LE(std::abs(v1 - v0), 1e-3) << "t=" << t;
    }
}

TEST(ExponentGap, IdentityAndCat) {
    const auto id = maps::identity(2);
    EXPECT_EQ(exponent_quantity_gap(id, lebesgue_sample(id.space(), 20, 1), 3), 0.0);
    const auto cat = maps::cat_map();
    const auto mu = lebesgue_sample(cat.space(), 200, 2);
    // [[2,1],[1,1]] is symmetric positive definite: sigma_max = lambda_max, so the
    // q = 1 gap is zero up to rounding.
    Eigen::JacobiSVD<Mat> svd(maps::cat_matrix());
    EXPECT_NEAR(std::log(svd.singularValues()(0)), kCatLog, 1e-14);
    EXPECT_NEAR(exponent_quantity_gap(cat, mu, 1), 0.0, 1e-12);
    EXPECT_LE(exponent_quantity_gap(cat, mu, 50), 0.02);
}

TEST(ExponentGap, MonotoneDiagnostic) {
    const std::vector<Diffeomorphism> fams = {maps::cat_map(), maps::standard_map(2.0),
                                              maps::perturbed_automorphism(maps::cat_matrix(), 0.1),
                                              maps::toral_automorphism(maps::expanding_3d_matrix())};
    for (const auto& f : fams) {
        const auto mu = lebesgue_sample(f.space(), 100, 3);
        for (long q : {1L, 2L, 4L, 8L}) {
            const double g1 = exponent_quantity_gap(f, mu, q);
            const double g2 = exponent_quantity_gap(f, mu, 2 * q);
            EXPECT_GE(g1, -1e-2) << f.name();
            EXPECT_LE(g2, g1 + 1e-2) << f.name() << " q=" << q;
        }
    }
    const auto h = maps::henon();
    const auto mu = orbit_measure(h, henon_attractor_point(), 100);
    EXPECT_LE(exponent_quantity_gap(h, mu, 16), exponent_quantity_gap(h, mu, 8) + 1e-2);
}
