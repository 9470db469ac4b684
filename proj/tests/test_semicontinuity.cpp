#include "usc/semicontinuity.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace usc;

namespace {

SamplingConfig quick_config() {
    SamplingConfig cfg;
    cfg.points = 100000;
    cfg.exponent_points = 16;
    cfg.exponent_steps = 1000;
    cfg.bound.signature_points = 8;
    cfg.bound.bracket_points = 200;
    cfg.bound.refine_lhs = false;
    return cfg;
}

}  // namespace

TEST(Semicontinuity, ConstantFamilyRowsAgree) {
    const auto cfg = quick_config();
    const auto table = semicontinuity_experiment([](double) { return maps::cat_map(); }, {0.1, 0.05, 0.0}, cfg);
    ASSERT_EQ(table.rows.size(), 3u);
    for (const auto& row : table.rows) {
        EXPECT_TRUE(row.complete());
        EXPECT_NEAR(row.entropy, table.rows.back().entropy, 1e-2);
        EXPECT_NEAR(row.lambda_sigma_plus, table.rows.back().lambda_sigma_plus, 1e-2);
        EXPECT_NEAR(row.weak_star, 0.0, 1e-12);
        EXPECT_NEAR(row.beta, 1.0, 1e-12);
        ASSERT_TRUE(row.bound.has_value());
        EXPECT_TRUE(row.bound->bound_holds);
    }
    EXPECT_EQ(table.summary.verdict, Verdict::pass);
    EXPECT_GE(table.summary.margin, -1e-2);
}

TEST(Semicontinuity, PerturbedCatTailStaysBelowLimit) {
    auto cfg = quick_config();
    cfg.compute_bound = false;
    ExperimentOptions opt;
    const auto family = [](double t) { return maps::perturbed_automorphism(maps::cat_matrix(), t); };
    const auto table = semicontinuity_experiment(family, {0.1, 0.05, 0.02, 0.01, 0.0}, cfg, opt, "cat_shear");
    EXPECT_EQ(table.family, "cat_shear");
    ASSERT_EQ(table.rows.size(), 5u);
    // Eigenvalue oracle for the unperturbed row.
    EXPECT_NEAR(table.rows.back().lambda_sigma_plus, std::log((3.0 + std::sqrt(5.0)) / 2.0), 1e-3);
    EXPECT_EQ(table.summary.tail_rows, 2u);
    EXPECT_LE(table.summary.tail_max_entropy, table.summary.h0 + 0.05);
    EXPECT_LE(table.summary.max_sigma_deviation, 0.02);
    EXPECT_TRUE(table.summary.component_check_applies);
    EXPECT_TRUE(table.summary.component_check_holds);
    EXPECT_EQ(table.summary.verdict, Verdict::pass);
    for (const auto& row : table.rows) EXPECT_GE(row.ruelle_residual, -0.05) << row.t;
}

TEST(Semicontinuity, EllipticStandardMapIsVacuous) {
    auto cfg = quick_config();
    cfg.kind = SampleKind::orbit;
    cfg.orbit_start = Vec{{0.5, 0.05}};
    cfg.points = 100000;
    cfg.burn_in = 0;
    // Itineraries grow polynomially here, so deep depths stay trusted and
    // the plug-in increments decay like 1/n.
    cfg.entropy.depth = 48;
    cfg.compute_bound = false;
    const auto family = [](double t) { return maps::standard_map(0.05 + t); };
    const auto table = semicontinuity_experiment(family, {0.02, 0.01, 0.0}, cfg);
    for (const auto& row : table.rows) {
        EXPECT_LT(row.entropy, 0.05) << row.t;
        EXPECT_LT(row.lambda_plus, 0.02) << row.t;
        EXPECT_EQ(row.trusted_depth, 48);
    }
    EXPECT_EQ(table.summary.verdict, Verdict::vacuous_pass);
}

TEST(Semicontinuity, FailuresBecomePartialRows) {
    auto cfg = quick_config();
    cfg.kind = SampleKind::orbit;
    cfg.orbit_start = Vec{{0.2, 0.3}};
    cfg.points = 10;
    cfg.compute_bound = false;
    const auto table = semicontinuity_experiment([](double) { return maps::cat_map(); }, {0.0}, cfg);
    ASSERT_EQ(table.rows.size(), 1u);
    EXPECT_FALSE(table.rows[0].complete());
    EXPECT_NE(table.rows[0].warnings[0].find("entropy"), std::string::npos);
    EXPECT_GT(table.rows[0].lambda_sigma_plus, 0.9);
}

TEST(Semicontinuity, ParallelRowsMatchSerial) {
    auto cfg = quick_config();
    cfg.points = 20000;
    cfg.compute_bound = false;
    const auto family = [](double t) { return maps::perturbed_automorphism(maps::cat_matrix(), t); };
    ExperimentOptions serial, parallel;
    parallel.threads = 3;
    const auto a = semicontinuity_experiment(family, {0.1, 0.0}, cfg, serial);
    const auto b = semicontinuity_experiment(family, {0.1, 0.0}, cfg, parallel);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].entropy, b.rows[i].entropy);
        EXPECT_EQ(a.rows[i].lambda_sigma_plus, b.rows[i].lambda_sigma_plus);
    }
}
