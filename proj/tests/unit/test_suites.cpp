#include <gtest/gtest.h>

#include "minor_dyson/verification.hpp"

namespace md = minor_dyson;

TEST(IdentityTrials, AllBetasAndSizes) {
  md::TrialConfig cfg;
  cfg.trials = 300;
  cfg.seed = 7;
  const auto r = md::identity_trials(cfg);
  EXPECT_TRUE(r.pass());
  EXPECT_LT(r.find_stat("max_residue_residual")->value, 1e-8);
  EXPECT_EQ(r.tests.size(), 6u);
}

TEST(IdentityTrials, FixedSizeAndTightToleranceFails) {
  md::TrialConfig cfg;
  cfg.trials = 50;
  cfg.n = 4;
  cfg.beta = 2.0;
  EXPECT_TRUE(md::identity_trials(cfg).pass());
  cfg.tolerance = 1e-300;
  EXPECT_FALSE(md::identity_trials(cfg).pass());
}

TEST(IdentityTrials, RejectsBadConfig) {
  md::TrialConfig cfg;
  cfg.n = 1;
  EXPECT_THROW(md::identity_trials(cfg), md::InvalidInput);
  cfg = {};
  cfg.trials = 0;
  EXPECT_THROW(md::identity_trials(cfg), md::InvalidInput);
}

TEST(JacobianTrials, UpToFive) {
  md::TrialConfig cfg;
  cfg.trials = 100;
  cfg.n_max = 5;
  cfg.tolerance = 1e-5;
  const auto r = md::jacobian_trials(cfg);
  EXPECT_TRUE(r.pass()) << r.find_stat("max_relative_error")->value;
}

TEST(QuaternionDeterminantTrials, UpToFive) {
  md::TrialConfig cfg;
  cfg.trials = 100;
  cfg.n_max = 5;
  EXPECT_TRUE(md::quaternion_determinant_trials(cfg).pass());
}

TEST(BorderedRoundTripTrials, AllBetas) {
  md::TrialConfig cfg;
  cfg.trials = 60;
  cfg.tolerance = 1e-10;
  const auto r = md::bordered_round_trip_trials(cfg);
  EXPECT_TRUE(r.pass());
  EXPECT_LT(r.find_stat("max_r_error")->value, 1e-9);
}

TEST(Normalization, MassesAndPrintedFactor) {
  const auto r = md::normalization_report();
  EXPECT_TRUE(r.pass());
  EXPECT_NEAR(r.find_stat("printed_pair_mass_beta2")->value, 2.0, 1e-4);
  EXPECT_NEAR(r.find_stat("pair_correction_factor_beta2")->value, 0.5, 1e-12);
  EXPECT_NEAR(r.find_stat("pair_mass_beta4")->value, 1.0, 1e-4);
}

TEST(TransitionReport, SmallScale) {
  md::TransitionConfig cfg;
  cfg.paths = 4000;
  cfg.seed = 3;
  const auto r = md::transition_report(cfg);
  EXPECT_TRUE(r.pass());
  EXPECT_NE(r.find_test("ks_sde_lambda1_t0.1"), nullptr);
  EXPECT_NE(r.find_test("ks_matrix_lambda2_t1"), nullptr);
}

TEST(TransitionReport, WrongStartIsDetected) {
  md::TransitionConfig cfg;
  cfg.paths = 4000;
  cfg.times = {0.1};
  const auto good = md::transition_report(cfg);
  // Simulating from a different start must be rejected by the KS tests.
  md::TransitionConfig shifted = cfg;
  shifted.start = {-0.2, 1.0};
  std::vector<double> xs(cfg.paths);
  md::SdeDiagnostics diag;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    md::RandomStream rng(1, k, md::StreamPurpose::kSpectralPath);
    xs[k] = md::simulate_dyson(shifted.start, 0.1, 1e-3, 2.0, rng, diag)[0];
  }
  const md::detail::TransitionMarginalCdf cdf(0.1, cfg.start, 0);
  EXPECT_LT(md::ks_one_sample(xs, cdf).p, 1e-6);
  EXPECT_TRUE(good.pass());
}

TEST(GeneratorReport, BetaTwoNullVectorAndEigenRelations) {
  md::GeneratorConfig cfg;
  cfg.points = 10;
  const auto r = md::generator_report(cfg);
  EXPECT_TRUE(r.pass());
  EXPECT_DOUBLE_EQ(r.find_stat("eigenvalue_target")->value, 3.0);
}

TEST(GeneratorReport, NonClassicalBetaHasNoSplit) {
  md::GeneratorConfig cfg;
  cfg.points = 5;
  cfg.beta = 2.5;
  const auto r = md::generator_report(cfg);
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.find_test("lambda_part_eigenvalue"), nullptr);
}

TEST(CollapsedGapDrift, PositiveOnHundredConfigurations) {
  md::TrialConfig cfg;
  cfg.trials = 100;
  const auto r = md::collapsed_gap_drift_trials(cfg);
  EXPECT_TRUE(r.pass());
  EXPECT_GT(r.find_stat("min_collapsed_drift")->value, 0.0);
}
