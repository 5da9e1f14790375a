#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>

#include "minor_dyson/densities.hpp"
#include "minor_dyson/spectral_sde.hpp"
#include "minor_dyson/verification/stats.hpp"

namespace md = minor_dyson;
using std::numbers::pi;

namespace {

std::vector<double> v(std::initializer_list<double> x) { return std::vector<double>(x); }

const std::vector<double> kStart = {-0.5, 0.7};

/// Mass of the n = 2 transition density over the chamber.
double transition_mass(double t, const std::vector<double>& start) {
  const double bound = md::invariant_support_bound(2, 2.0) + 2.0;
  const md::QuadratureOptions opt{1e-10, 15};
  return md::integrate_2d(
      [&](double l2, double l1) {
        const double l[2] = {l1, l2};
        return md::transition_density_lambda(t, start, std::span<const double>(l, 2));
      },
      -bound, bound, [&](double) { return -bound; }, [](double l2) { return l2; }, opt);
}

/// n = 2, beta = 2 pair transition density with the sphere and U(1) averages done in
/// closed form: the phases combine into one uniform angle, leaving e^{a mu mu_bar} I0(2 a r r_bar).
double pair_transition_n2(double t, const md::InterlacedPair& bar, double l1, double m, double l2) {
  const auto k = md::constants(2, 2.0);
  const double c = std::exp(-t), w = -std::expm1(-2 * t), a = 2 * c / w;
  const double lb1 = bar.lambda()[0], lb2 = bar.lambda()[1], mb = bar.mu()[0];
  const double r2 = (m - l1) * (l2 - m), rb2 = (mb - lb1) * (lb2 - mb);
  if (!(r2 > 0.0)) return 0.0;
  const double rn = l1 + l2 - m, rbn = lb1 + lb2 - mb;
  const double log_p = k.log_pair_normalizer() - k.N * std::log(w) -
                       (l1 * l1 + l2 * l2 + c * c * (lb1 * lb1 + lb2 * lb2)) / w + a * m * mb + a * rn * rbn +
                       std::log(l2 - l1);
  return std::exp(log_p) * boost::math::cyl_bessel_i(0, 2 * a * std::sqrt(r2 * rb2));
}

}  // namespace

TEST(TransitionLambda, RejectsNonPositiveTime) {
  EXPECT_THROW(md::transition_density_lambda(0.0, kStart, kStart), md::InvalidInput);
  EXPECT_THROW(md::transition_density_lambda(-1.0, kStart, kStart), md::InvalidInput);
}

TEST(TransitionLambda, LongTimeLimitIsInvariant) {
  for (const auto& lam : {v({-0.9, 0.2}), v({0.1, 1.5}), v({-2.0, -1.0})}) {
    const double r = md::transition_density_lambda(50.0, kStart, lam) / md::invariant_density_lambda(lam, 2.0);
    EXPECT_NEAR(r, 1.0, 1e-8);
  }
  const auto start3 = v({-1.0, 0.1, 1.3});
  for (const auto& lam : {v({-0.9, 0.2, 0.3}), v({-1.5, 0.0, 1.5})}) {
    const double r = md::transition_density_lambda(50.0, start3, lam) / md::invariant_density_lambda(lam, 2.0);
    EXPECT_NEAR(r, 1.0, 1e-8);
  }
}

TEST(TransitionLambda, ScalarIsOrnsteinUhlenbeck) {
  for (double t : {0.05, 0.7, 3.0})
    for (double x : {-1.0, 0.2, 2.0}) {
      const double x0 = 0.6, c = std::exp(-t), var = (1 - c * c) / 2.0;
      const double expect = std::exp(-(x - c * x0) * (x - c * x0) / (2 * var)) / std::sqrt(2 * pi * var);
      EXPECT_NEAR(md::transition_density_lambda(t, v({x0}), v({x})) / expect, 1.0, 1e-12);
    }
}

TEST(TransitionLambda, NormalizedOnChamber) {
  for (double t : {0.1, 1.0}) EXPECT_NEAR(transition_mass(t, kStart), 1.0, 1e-5) << t;
  // Degenerate starting point goes through the confluent branch.
  EXPECT_NEAR(transition_mass(0.5, v({0.3, 0.3})), 1.0, 1e-5);
}

TEST(TransitionLambda, ChapmanKolmogorov) {
  const double s = 0.3, t = 0.4;
  const double bound = md::invariant_support_bound(2, 2.0) + 2.0;
  const md::QuadratureOptions opt{1e-11, 15};
  for (const auto& lam : {v({-0.2, 0.9}), v({-1.1, 0.4})}) {
    const double conv = md::integrate_2d(
        [&](double n2, double n1) {
          const double nu[2] = {n1, n2};
          const std::span<const double> sn(nu, 2);
          return md::transition_density_lambda(s, kStart, sn) * md::transition_density_lambda(t, sn, lam);
        },
        -bound, bound, [&](double) { return -bound; }, [](double n2) { return n2; }, opt);
    EXPECT_NEAR(conv / md::transition_density_lambda(s + t, kStart, lam), 1.0, 1e-4);
  }
}

TEST(TransitionLambda, SatisfiesForwardEquation) {
  const double t = 0.5, ht = 1e-3;
  for (const auto& lam : {v({-0.6, 0.4}), v({0.0, 1.2}), v({-1.0, 0.3})}) {
    const double dpdt = (md::transition_density_lambda(t + ht, kStart, lam) -
                         md::transition_density_lambda(t - ht, kStart, lam)) /
                        (2 * ht);
    auto p = [&](std::span<const double> l) { return md::transition_density_lambda(t, kStart, l); };
    const auto a = md::adjoint_dyson_apply(p, lam, 2.0, 0.0, true);
    EXPECT_LT(std::abs(dpdt - a.value) / std::abs(dpdt), 1e-3);
  }
}

TEST(TransitionLambda, MatchesSimulatedMarginal) {
  const double t = 0.5;
  const int paths = 20000;
  std::vector<double> low(paths);
  md::SdeDiagnostics diag;
  for (int k = 0; k < paths; ++k) {
    md::RandomStream rng(31, static_cast<std::uint64_t>(k), md::StreamPurpose::kSpectralPath);
    low[static_cast<std::size_t>(k)] = md::simulate_dyson(kStart, t, 1e-3, 2.0, rng, diag)[0];
  }
  // Marginal of lambda_1 by quadrature on a grid, integrated to a CDF by the trapezoid rule.
  const double lo = -6.0, hi = 6.0;
  const int m = 2400;
  const double step = (hi - lo) / m;
  std::vector<double> dens(m + 1), cdf(m + 1, 0.0);
  for (int i = 0; i <= m; ++i) {
    const double x = lo + i * step;
    dens[static_cast<std::size_t>(i)] = md::integrate_1d(
        [&](double y) {
          const double l[2] = {x, y};
          return md::transition_density_lambda(t, kStart, std::span<const double>(l, 2));
        },
        x, hi + 4.0);
    if (i > 0) cdf[static_cast<std::size_t>(i)] = cdf[static_cast<std::size_t>(i - 1)] + 0.5 * step * (dens[static_cast<std::size_t>(i)] + dens[static_cast<std::size_t>(i - 1)]);
  }
  EXPECT_NEAR(cdf.back(), 1.0, 1e-5);
  auto cdf_at = [&](double x) {
    if (x <= lo) return 0.0;
    if (x >= hi) return 1.0;
    const double u = (x - lo) / step;
    const auto i = static_cast<std::size_t>(u);
    const double f = u - static_cast<double>(i);
    return cdf[i] * (1 - f) + cdf[std::min(i + 1, cdf.size() - 1)] * f;
  };
  const auto ks = md::ks_one_sample(low, cdf_at);
  EXPECT_GT(ks.p, 0.01) << ks.statistic;
}

TEST(TransitionPair, LongTimeLimitIsInvariant) {
  md::RandomStream rng(41, 0, md::StreamPurpose::kReference);
  for (auto beta : {md::Beta::kReal, md::Beta::kComplex, md::Beta::kQuaternion}) {
    const md::InterlacedPair bar({-1.0, 0.2, 1.1}, {-0.5, 0.6}), p({-0.8, 0.4, 1.6}, {0.0, 1.0});
    const auto est = md::transition_density_pair_mc(30.0, bar, p, beta, 200, rng);
    const double inv = md::invariant_density_pair(p, md::beta_value(beta));
    EXPECT_NEAR(est.value / inv, 1.0, std::max(3 * est.stderr_ / inv, 1e-9));
  }
}

TEST(TransitionPair, SingleEigenvalueIsOrnsteinUhlenbeck) {
  md::RandomStream rng(42, 0);
  const md::InterlacedPair bar({0.4}, {}), p({-0.3}, {});
  const auto est = md::transition_density_pair_mc(0.6, bar, p, md::Beta::kComplex, 2, rng);
  EXPECT_NEAR(est.value / md::transition_density_lambda(0.6, v({0.4}), v({-0.3})), 1.0, 1e-12);
}

TEST(TransitionPair, MonteCarloMatchesClosedForm) {
  md::RandomStream rng(43, 0, md::StreamPurpose::kReference);
  const md::InterlacedPair bar({-1.0, 0.8}, {0.1});
  for (const auto& [l1, m, l2] : {std::tuple{-0.7, -0.1, 0.6}, std::tuple{-1.5, 0.5, 0.9}}) {
    const md::InterlacedPair p({l1, l2}, {m});
    const auto est = md::transition_density_pair_mc(0.5, bar, p, md::Beta::kComplex, 20000, rng);
    EXPECT_NEAR(est.value, pair_transition_n2(0.5, bar, l1, m, l2), 3 * est.stderr_);
  }
}

TEST(TransitionPair, ClosedFormNormalized) {
  const md::InterlacedPair bar({-1.0, 0.8}, {0.1});
  const md::QuadratureOptions opt{1e-9, 12};
  for (double t : {0.2, 0.5, 2.0}) {
    // Coordinates (mu, mu - lambda_1, lambda_2 - mu) have unit Jacobian.
    const double mass = md::integrate_3d(
        [&](double m, double g1, double g2) { return pair_transition_n2(t, bar, m - g1, m, m + g2); }, -7.0, 7.0,
        [](double) { return 0.0; }, [](double) { return 10.0; }, [](double, double) { return 0.0; },
        [](double, double) { return 10.0; }, opt);
    EXPECT_NEAR(mass, 1.0, 1e-5) << t;
  }
}

TEST(TransitionPair, QuadratureOfMonteCarloNormalized) {
  // Fixed Gauss-Legendre product rule with the MC estimate at each node.
  const md::InterlacedPair bar({-1.0, 0.8}, {0.1});
  const double t = 0.5;
  using Rule = boost::math::quadrature::gauss<double, 24>;
  const auto& xs = Rule::abscissa();
  const auto& ws = Rule::weights();
  std::vector<std::pair<double, double>> nodes;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    nodes.emplace_back(xs[i], ws[i]);
    if (xs[i] != 0.0) nodes.emplace_back(-xs[i], ws[i]);
  }
  const double mu_lo = -4.0, mu_hi = 4.0, g_hi = 5.0;
  md::RandomStream rng(44, 0, md::StreamPurpose::kReference);
  double mc = 0.0, exact = 0.0;
  for (const auto& [a, wa] : nodes)
    for (const auto& [b, wb] : nodes)
      for (const auto& [c, wc] : nodes) {
        const double m = 0.5 * (mu_lo + mu_hi) + 0.5 * (mu_hi - mu_lo) * a;
        const double g1 = 0.5 * g_hi * (1 + b), g2 = 0.5 * g_hi * (1 + c);
        const double w = wa * wb * wc * 0.5 * (mu_hi - mu_lo) * 0.25 * g_hi * g_hi;
        const md::InterlacedPair p({m - g1, m + g2}, {m});
        mc += w * md::transition_density_pair_mc(t, bar, p, md::Beta::kComplex, 32, rng).value;
        exact += w * pair_transition_n2(t, bar, m - g1, m, m + g2);
      }
  EXPECT_NEAR(exact, 1.0, 1e-3);
  EXPECT_NEAR(mc, 1.0, 0.02);
}

TEST(TransitionPair, MatchesCoupledSimulation) {
  const md::InterlacedPair bar({-1.0, 0.8}, {0.1});
  const double t = 0.5;
  const int paths = 20000;
  const std::vector<double> edges = {0.0, 0.35, 0.7, 1.1, 1.6, 2.4, 10.0};
  const std::size_t cells = edges.size() - 1;
  std::vector<double> observed(cells * cells, 0.0), expected(cells * cells, 0.0);
  md::CoupledStepper stepper(2, 2.0);
  md::SdeDiagnostics diag;
  const double dt = md::default_dt(bar);
  auto cell_of = [&](double g) {
    std::size_t k = 0;
    while (k + 1 < cells && g >= edges[k + 1]) ++k;
    return k;
  };
  for (int k = 0; k < paths; ++k) {
    md::RandomStream rng(45, static_cast<std::uint64_t>(k), md::StreamPurpose::kSpectralPath);
    md::CoupledState s{bar.lambda().values(), bar.mu().values(), 0.0};
    stepper.advance(s, t, dt, rng, diag);
    observed[cell_of(s.mu[0] - s.lambda[0]) * cells + cell_of(s.lambda[1] - s.mu[0])] += 1.0;
  }
  const md::QuadratureOptions opt{1e-8, 10};
  for (std::size_t i = 0; i < cells; ++i)
    for (std::size_t j = 0; j < cells; ++j) {
      const double prob = md::integrate_3d(
          [&](double m, double g1, double g2) { return pair_transition_n2(t, bar, m - g1, m, m + g2); }, -7.0, 7.0,
          [&](double) { return edges[i]; }, [&](double) { return edges[i + 1]; },
          [&](double, double) { return edges[j]; }, [&](double, double) { return edges[j + 1]; }, opt);
      expected[i * cells + j] = prob * paths;
    }
  const double p = md::chi_square_p(observed, expected);
  EXPECT_GT(p, 0.01);
}
