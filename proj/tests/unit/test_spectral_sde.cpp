#include <gtest/gtest.h>

#include <cmath>

#include "minor_dyson/spectral_sde.hpp"
#include "minor_dyson/verification/stats.hpp"

namespace md = minor_dyson;

TEST(DysonStep, ScalarOuVariance) {
  const int paths = 20000;
  const double t = 0.6, beta = 2.0;
  md::MeanAccumulator acc;
  md::SdeDiagnostics diag;
  for (int k = 0; k < paths; ++k) {
    md::RandomStream rng(1, static_cast<std::uint64_t>(k), md::StreamPurpose::kSpectralPath);
    const auto x = md::simulate_dyson({0.0}, t, 1e-3, beta, rng, diag);
    acc.add(x[0] * x[0]);
  }
  EXPECT_NEAR(acc.mean(), -std::expm1(-2 * t) / beta, 4 * acc.stderr_mean() + 2e-3);
}

TEST(DysonStep, RejectsDegenerateInput) {
  md::RandomStream rng(2, 0);
  md::SdeDiagnostics diag;
  EXPECT_THROW(md::dyson_step({1.0, 1.0}, 1e-3, 2.0, rng, diag), md::DegenerateSpectrum);
  EXPECT_THROW(md::dyson_step({0.0, 1.0}, -1.0, 2.0, rng, diag), md::InvalidInput);
}

TEST(DysonStep, GapMeanLongRun) {
  // n = 2, beta = 2: gap density proportional to s^2 exp(-s^2/2), mean 2 sqrt(2/pi).
  const int paths = 4000;
  md::MeanAccumulator acc;
  md::SdeDiagnostics diag;
  for (int k = 0; k < paths; ++k) {
    md::RandomStream rng(3, static_cast<std::uint64_t>(k), md::StreamPurpose::kSpectralPath);
    const auto x = md::simulate_dyson({-0.1, 0.1}, 4.0, 2e-3, 2.0, rng, diag);
    acc.add(x[1] - x[0]);
  }
  const double expect = 2.0 * std::sqrt(2.0 / M_PI);
  EXPECT_NEAR(acc.mean(), expect, 0.02 * expect);
  EXPECT_EQ(diag.violations, 0u);
}

TEST(CoupledStep, NoiseIndexLayout) {
  const std::size_t n = 4;
  std::vector<int> seen(md::coupled_noise_dim(n), 0);
  for (std::size_t i = 0; i < n; ++i) seen[i]++;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) seen[md::tilde_index(n, i, j)]++;
  for (int s : seen) EXPECT_EQ(s, 1);
  EXPECT_EQ(md::tilde_index(n, 0, 1), n);
  EXPECT_EQ(md::tilde_index(n, 2, 3), md::coupled_noise_dim(n) - 1);
}

TEST(CoupledStep, MuPathEqualsStandaloneDyson) {
  // The mu equation sees only db_11..db_{n-1,n-1}: with the same increments, the
  // coupled mu path is the (n-1) Dyson Euler path.
  const std::size_t n = 3;
  md::CoupledState s{{-1.5, 0.2, 1.7}, {-0.6, 0.9}, 0.0};
  md::CoupledStepper stepper(n, 2.0);
  std::vector<double> mu = s.mu;
  md::RandomStream rng(4, 0);
  const double dt = 1e-3, sigma = 1.0;
  for (int k = 0; k < 500; ++k) {
    std::vector<double> dw(stepper.noise_dim());
    for (double& w : dw) w = std::sqrt(dt) * rng.normal();
    md::CoupledState next;
    stepper.raw_increment(s, dt, dw, next);
    std::vector<double> m2(mu.size());
    for (std::size_t g = 0; g < mu.size(); ++g) m2[g] = mu[g] + md::dyson_drift(mu, g) * dt + sigma * dw[g];
    mu = m2;
    s = next;
    for (std::size_t g = 0; g < mu.size(); ++g) ASSERT_NEAR(s.mu[g], mu[g], 1e-12);
  }
}

TEST(QuadraticVariation, SymmetricExample) {
  const double a = 1.3;
  for (double beta : {1.0, 2.0, 4.0}) {
    const md::InterlacedPair p({-a, a}, {0.0});
    const auto q = md::quadratic_variation_analytic(p, beta);
    EXPECT_NEAR(q(0, 2), (2 / beta) / 2, 1e-14);
    EXPECT_NEAR(q(1, 2), (2 / beta) / 2, 1e-14);
    for (int d = 0; d < 3; ++d) EXPECT_EQ(q(d, d), 2 / beta);
  }
}

TEST(QuadraticVariation, FormsAgreeAndPsd) {
  md::RandomStream rng(5, 0);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 2 + static_cast<std::size_t>(k % 4);
    const auto p = md::sample_interlaced_pair(n, rng);
    const auto q = md::quadratic_variation_analytic(p, 2.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j + 1 < n; ++j) {
        const double c = q(static_cast<int>(i), static_cast<int>(n + j));
        EXPECT_NEAR(c, md::cross_variation_residue_form(p, 2.0, i, j), 1e-9 * std::max(1.0, std::abs(c)));
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(QuadraticVariation, EmpiricalCrossCovariation) {
  const std::size_t n = 3;
  const md::CoupledState s{{-1.5, 0.2, 1.7}, {-0.6, 0.9}, 0.0};
  const auto q = md::quadratic_variation_analytic(s.pair(), 2.0);
  md::CoupledStepper stepper(n, 2.0);
  md::RandomStream rng(6, 0);
  const double dt = 1e-6;
  const int draws = 1000000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(5, 5);
  std::vector<double> dw(stepper.noise_dim());
  md::CoupledState next;
  for (int k = 0; k < draws; ++k) {
    for (double& w : dw) w = std::sqrt(dt) * rng.normal();
    stepper.raw_increment(s, dt, dw, next);
    Eigen::VectorXd d(5);
    for (std::size_t i = 0; i < 3; ++i) d(static_cast<int>(i)) = next.lambda[i] - s.lambda[i];
    for (std::size_t i = 0; i < 2; ++i) d(static_cast<int>(3 + i)) = next.mu[i] - s.mu[i];
    acc += d * d.transpose();
  }
  acc /= draws * dt;
  EXPECT_LT((acc - q).cwiseAbs().maxCoeff(), 0.05 * q.cwiseAbs().maxCoeff());
}

TEST(QuadraticVariation, IndependentCouplingBreaksCrossTerms) {
  const md::CoupledState s{{-1.5, 0.2, 1.7}, {-0.6, 0.9}, 0.0};
  md::CoupledStepper stepper(3, 2.0, md::Coupling::kIndependent);
  md::RandomStream rng(7, 0);
  const double dt = 1e-6;
  double cross = 0;
  std::vector<double> dw(stepper.noise_dim());
  md::CoupledState next;
  for (int k = 0; k < 200000; ++k) {
    for (double& w : dw) w = std::sqrt(dt) * rng.normal();
    stepper.raw_increment(s, dt, dw, next);
    cross += (next.lambda[1] - s.lambda[1]) * (next.mu[0] - s.mu[0]);
  }
  cross /= 200000 * dt;
  const auto q = md::quadratic_variation_analytic(s.pair(), 2.0);
  EXPECT_NEAR(cross, 0.0, 0.02);
  EXPECT_GT(std::abs(q(1, 3)), 0.1);
}

TEST(GapDrift, CollapsedExample) {
  const md::InterlacedPair p({0.0, 1.0}, {0.0});
  const auto g = md::gap_drift(p, 0);
  EXPECT_NEAR(g.lower, 1.0, 1e-15);
  EXPECT_NEAR(md::collapsed_gap_drift(p.lambda().values(), p.mu().values(), 0), 1.0, 1e-15);
}

TEST(GapDrift, ClosedFormPositiveAtRandomCollapse) {
  md::RandomStream rng(8, 0);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 2 + static_cast<std::size_t>(k % 5);
    const auto p = md::sample_interlaced_pair(n, rng);
    const std::size_t i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n - 1));
    auto mu = p.mu().values();
    mu[i] = p.lambda()[i];
    const md::InterlacedPair c(p.lambda().values(), mu);
    const double closed = md::collapsed_gap_drift(c.lambda().values(), mu, i);
    EXPECT_GT(closed, 0.0);
    EXPECT_NEAR(md::gap_drift(c, i).lower, closed, 1e-9 * std::max(1.0, std::abs(closed)));
    auto mu2 = p.mu().values();
    mu2[i] = p.lambda()[i + 1];
    const md::InterlacedPair c2(p.lambda().values(), mu2);
    const double upper = md::collapsed_upper_gap_drift(c2.lambda().values(), mu2, i);
    EXPECT_GT(upper, 0.0);
    EXPECT_NEAR(md::gap_drift(c2, i).upper, upper, 1e-9 * std::max(1.0, std::abs(upper)));
  }
}

TEST(GapDrift, MatchesShortTimeSimulation) {
  const double a = 1.2, b = 0.5;
  md::CoupledState s{{-a, 0.0, a}, {-b, b}, 0.0};
  const auto g = md::gap_drift(s.pair(), 0);
  md::CoupledStepper stepper(3, 2.0);
  const double dt = 1e-4;
  const int draws = 200000;
  md::MeanAccumulator acc;
  std::vector<double> dw(stepper.noise_dim());
  md::CoupledState next;
  md::RandomStream rng(9, 0);
  for (int k = 0; k < draws; ++k) {
    for (double& w : dw) w = std::sqrt(dt) * rng.normal();
    stepper.raw_increment(s, dt, dw, next);
    acc.add(((next.mu[0] - next.lambda[0]) - (s.mu[0] - s.lambda[0])) / dt);
  }
  EXPECT_NEAR(acc.mean(), g.lower, std::max(0.05 * std::abs(g.lower), 4 * acc.stderr_mean()));
}

TEST(CoupledStep, InterlacingPreservedAndLambdaMatchesDyson) {
  const int paths = 3000;
  md::SdeDiagnostics d1, d2;
  std::vector<double> a(paths), b(paths);
  for (int k = 0; k < paths; ++k) {
    md::RandomStream r1(10, static_cast<std::uint64_t>(k), md::StreamPurpose::kSpectralPath);
    md::RandomStream r2(11, static_cast<std::uint64_t>(k), md::StreamPurpose::kSpectralPath);
    md::CoupledState s{{-1.0, 0.1, 1.2}, {-0.5, 0.6}, 0.0};
    md::CoupledStepper(3, 2.5).advance(s, 0.5, 1e-3, r1, d1);
    a[k] = s.lambda[2];
    b[k] = md::simulate_dyson({-1.0, 0.1, 1.2}, 0.5, 1e-3, 2.5, r2, d2)[2];
  }
  EXPECT_EQ(d1.violations, 0u);
  EXPECT_GT(md::ks_two_sample(a, b).p, 0.005);
}

TEST(CoupledStep, RegularizeInitial) {
  md::CoupledState s{{0.0, 1.0}, {1.0}, 0.0};
  EXPECT_TRUE(md::regularize_initial(s));
  EXPECT_TRUE(s.pair().strict());
  md::CoupledState t{{0.0, 1.0}, {0.5}, 0.0};
  EXPECT_FALSE(md::regularize_initial(t));
}
