#pragma once

// Aggregate deterministic checks over many random inputs, each summarized as one report:
// interlacing identities, the border Jacobian, the quaternionic determinant, the bordered
// round trip, normalization of the invariant laws, the n = 2 transition density, the forward
// operator at the invariant pair law and the gap drifts at collapsed boundaries.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "minor_dyson/core/parallel.hpp"
#include "minor_dyson/core/report.hpp"
#include "minor_dyson/densities.hpp"
#include "minor_dyson/matrix_process.hpp"
#include "minor_dyson/minor_geometry.hpp"
#include "minor_dyson/spectral_sde.hpp"
#include "minor_dyson/verification/experiments.hpp"
#include "minor_dyson/verification/stats.hpp"

namespace minor_dyson {

struct TrialConfig {
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
  std::optional<std::size_t> n;  // unset: cycle through n_min..n_max
  std::optional<double> beta;    // unset: cycle through 1, 2, 4
  std::size_t n_min = 2;
  std::size_t n_max = 6;
  double tolerance = 1e-8;

  std::size_t n_at(std::uint64_t k) const { return n ? *n : n_min + static_cast<std::size_t>(k % (n_max - n_min + 1)); }
  double beta_at(std::uint64_t k) const {
    static constexpr double cycle[3] = {1.0, 2.0, 4.0};
    return beta ? *beta : cycle[k % 3];
  }

  void validate() const {
    detail::require(trials >= 1, "trials must be at least 1");
    detail::require(n ? *n >= 2 : (n_min >= 2 && n_max >= n_min), "trial sizes need n >= 2");
    detail::require(!beta || *beta > 0.0, "beta must be positive");
    detail::require(tolerance > 0.0, "tolerance must be positive");
  }

  std::string canonical(const std::string& what) const {
    std::ostringstream os;
    os.precision(17);
    os << what << " trials=" << trials << " seed=" << seed << " n=" << (n ? std::to_string(*n) : "cycle")
       << " n_min=" << n_min << " n_max=" << n_max << " beta=" << (beta ? std::to_string(*beta) : "cycle")
       << " tol=" << tolerance;
    return os.str();
  }
};

namespace detail {

inline void trial_header(ExperimentReport& rep, const std::string& name, const TrialConfig& cfg) {
  rep.name = name;
  rep.param("trials", static_cast<std::int64_t>(cfg.trials));
  rep.param("n", cfg.n ? static_cast<std::int64_t>(*cfg.n) : std::int64_t{0});
  rep.param("n_min", static_cast<std::int64_t>(cfg.n_min));
  rep.param("n_max", static_cast<std::int64_t>(cfg.n_max));
  rep.param("beta", cfg.beta ? *cfg.beta : 0.0);
  rep.param("tolerance", cfg.tolerance);
  rep.provenance = {cfg.seed, 0.0, cfg.trials, config_digest(cfg.canonical(name))};
}

}  // namespace detail

/// identity_suite on `trials` random strictly interlaced pairs; the report keeps the
/// largest residual of each identity.
inline ExperimentReport identity_trials(const TrialConfig& cfg) {
  cfg.validate();
  ExperimentReport rep;
  detail::trial_header(rep, "identity_trials", cfg);
  const char* keys[] = {"sum_of_squares", "product", "resolvent", "resolvent_derivative", "residue"};
  double worst[5] = {0, 0, 0, 0, 0};
  std::uint64_t signature_failures = 0;
  RandomStream rng(cfg.seed, 0, StreamPurpose::kTrials);
  for (std::uint64_t k = 0; k < cfg.trials; ++k) {
    const InterlacedPair p = sample_interlaced_pair(cfg.n_at(k), rng);
    const ExperimentReport r = identity_suite(p, cfg.beta_at(k));
    for (int i = 0; i < 5; ++i) {
      const double v = r.find_stat(std::string(keys[i]) + "_residual")->value;
      worst[i] = std::isnan(v) ? v : std::max(worst[i], v);
    }
    if (!r.find_test("mixed_vandermonde_signature")->pass) ++signature_failures;
  }
  for (int i = 0; i < 5; ++i) rep.stat(std::string("max_") + keys[i] + "_residual", worst[i]);
  for (int i = 0; i < 5; ++i) rep.check_below(keys[i], worst[i], cfg.tolerance);
  rep.check_below("mixed_vandermonde_signature", static_cast<double>(signature_failures), 0.0);
  return rep;
}

/// Analytic border Jacobian against the finite-difference determinant.
inline ExperimentReport jacobian_trials(const TrialConfig& cfg) {
  cfg.validate();
  ExperimentReport rep;
  detail::trial_header(rep, "jacobian_trials", cfg);
  double worst = 0.0;
  RandomStream rng(cfg.seed, 1, StreamPurpose::kTrials);
  for (std::uint64_t k = 0; k < cfg.trials; ++k) {
    const double e = jacobian_check(sample_interlaced_pair(cfg.n_at(k), rng)).relative_error();
    worst = std::isnan(e) ? e : std::max(worst, e);
  }
  rep.stat("max_relative_error", worst);
  rep.check_below("jacobian", worst, cfg.tolerance);
  return rep;
}

/// Pfaffian-based determinant of beta = 4 matrices against the product of collapsed eigenvalues.
inline ExperimentReport quaternion_determinant_trials(const TrialConfig& cfg) {
  cfg.validate();
  ExperimentReport rep;
  detail::trial_header(rep, "quaternion_determinant_trials", cfg);
  double worst = 0.0;
  RandomStream rng(cfg.seed, 2, StreamPurpose::kTrials);
  for (std::uint64_t k = 0; k < cfg.trials; ++k) {
    const SelfAdjointMatrix b = sample_gaussian_ensemble(cfg.n_at(k), Beta::kQuaternion, rng);
    const Spectrum ev = eigenvalues(b);
    double prod = 1.0;
    for (double x : ev.values()) prod *= x;
    const double e = std::abs(quaternion_determinant(b) - prod) / std::abs(prod);
    worst = std::isnan(e) ? e : std::max(worst, e);
  }
  rep.stat("max_relative_error", worst);
  rep.check_below("quaternion_determinant", worst, cfg.tolerance);
  return rep;
}

/// bordered_form -> bordered_matrix equals the block conjugation, reconstruct returns B, and
/// the border weights agree with r_from_spectra. Absolute errors, on unit-scale ensembles.
inline ExperimentReport bordered_round_trip_trials(const TrialConfig& cfg, double r_tolerance = 1e-9) {
  cfg.validate();
  ExperimentReport rep;
  detail::trial_header(rep, "bordered_round_trip_trials", cfg);
  double conj = 0.0, back = 0.0, weights = 0.0;
  RandomStream rng(cfg.seed, 3, StreamPurpose::kTrials);
  for (std::uint64_t k = 0; k < cfg.trials; ++k) {
    const std::size_t n = cfg.n_at(k);
    const SelfAdjointMatrix b = sample_gaussian_ensemble(n, to_beta(cfg.beta_at(k)), rng);
    const BorderedForm f = bordered_form(b);
    const AlgebraMatrix c = block_conjugator(f.conjugator);
    const AlgebraMatrix direct = c * b.matrix() * c.adjoint();
    const SelfAdjointMatrix bord = bordered_matrix(f);
    const SelfAdjointMatrix rec = reconstruct(f);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        conj = std::max(conj, (direct(i, j) - bord(i, j)).abs());
        back = std::max(back, (rec(i, j) - b(i, j)).abs());
      }
    const BorderWeights w = r_from_spectra(spectral_pair(b));
    for (std::size_t i = 0; i + 1 < n; ++i) weights = std::max(weights, std::abs(w.r[i] - f.r[i]));
    weights = std::max(weights, std::abs(w.r_n - f.r_n));
  }
  rep.stat("max_conjugation_error", conj);
  rep.stat("max_reconstruction_error", back);
  rep.stat("max_r_error", weights);
  rep.check_below("bordered_matrix_is_conjugation", conj, cfg.tolerance);
  rep.check_below("reconstruct_round_trip", back, cfg.tolerance);
  rep.check_below("r_from_spectra", weights, r_tolerance);
  return rep;
}

struct NormalizationConfig {
  double lambda_tolerance = 1e-5;
  double pair_tolerance = 0.02;
  double quadrature_tolerance = 1e-10;
  double pair_quadrature_tolerance = 1e-7;  // 3-D nesting; the printed factor needs only a few digits

  std::string canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "normalization lambda_tol=" << lambda_tolerance << " pair_tol=" << pair_tolerance
       << " quad_tol=" << quadrature_tolerance << " pair_quad_tol=" << pair_quadrature_tolerance;
    return os.str();
  }
};

/// Mass of the n = 2 eigenvalue law for beta in {1, 2, 4} and of the n = 2 pair law, plus the
/// mass the printed pair prefactor would give.
inline ExperimentReport normalization_report(const NormalizationConfig& cfg = {}) {
  ExperimentReport rep;
  rep.name = "normalization";
  rep.param("lambda_tolerance", cfg.lambda_tolerance);
  rep.param("pair_tolerance", cfg.pair_tolerance);
  rep.param("quadrature_tolerance", cfg.quadrature_tolerance);
  rep.param("pair_quadrature_tolerance", cfg.pair_quadrature_tolerance);
  rep.provenance = {0, 0.0, 0, config_digest(cfg.canonical())};
  for (double beta : {1.0, 2.0, 4.0}) {
    const double mass = invariant_moments_by_quadrature(2, beta, cfg.quadrature_tolerance).mass;
    const std::string tag = "lambda_mass_beta" + std::to_string(static_cast<int>(beta));
    rep.stat(tag, mass);
    rep.check_below(tag, std::abs(mass - 1.0), cfg.lambda_tolerance);
  }
  // beta = 1 is left out: r^{beta - 2} has edge singularities the nested rule does not resolve.
  for (double beta : {2.0, 4.0}) {
    const double bound = invariant_support_bound(2, beta);
    const QuadratureOptions opt{cfg.pair_quadrature_tolerance, 12};
    auto dens = [beta](double l2, double m, double l1) {
      const double lam[2] = {l1, l2};
      return invariant_density_pair(std::span<const double>(lam, 2), std::span<const double>(&m, 1), beta);
    };
    const double mass = integrate_3d(
        dens, -bound, bound, [&](double) { return -bound; }, [](double l2) { return l2; },
        [&](double, double) { return -bound; }, [](double, double m) { return m; }, opt);
    const InterlacedPair probe({-0.4, 0.9}, {0.1});
    const double ratio = invariant_density_pair_printed(probe, beta) / invariant_density_pair(probe, beta);
    const std::string tag = "beta" + std::to_string(static_cast<int>(beta));
    rep.stat("pair_mass_" + tag, mass);
    rep.stat("printed_pair_mass_" + tag, mass * ratio);
    rep.stat("pair_correction_factor_" + tag, 1.0 / ratio);
    if (beta == 2.0) rep.check_below("pair_mass_beta2", std::abs(mass - 1.0), cfg.pair_tolerance);
  }
  return rep;
}

struct TransitionConfig {
  std::vector<double> start{-0.5, 0.7};
  std::vector<double> times{0.1, 1.0};
  std::uint64_t paths = 100000;
  std::uint64_t seed = 1;
  double dt = 1e-3;
  unsigned workers = 0;
  double alpha = 0.01;
  double mass_tolerance = 1e-5;
  double forward_tolerance = 1e-3;

  std::string canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "transition paths=" << paths << " seed=" << seed << " dt=" << dt << " alpha=" << alpha;
    for (double s : start) os << " start=" << s;
    for (double t : times) os << " t=" << t;
    return os.str();
  }
};

namespace detail {

/// CDF of one coordinate of the n = 2 transition law, tabulated on a grid by the trapezoid rule.
class TransitionMarginalCdf {
 public:
  TransitionMarginalCdf(double t, const std::vector<double>& start, std::size_t coord) {
    const double reach = 6.0 + std::max(std::abs(start[0]), std::abs(start[1]));
    lo_ = -reach;
    step_ = 2.0 * reach / kCells;
    cdf_.assign(kCells + 1, 0.0);
    double prev = 0.0;
    for (int i = 0; i <= kCells; ++i) {
      const double x = lo_ + i * step_;
      const double d = integrate_1d(
          [&](double y) {
            const double l[2] = {coord == 0 ? x : y, coord == 0 ? y : x};
            return transition_density_lambda(t, start, std::span<const double>(l, 2));
          },
          coord == 0 ? x : lo_ - 4.0, coord == 0 ? -lo_ + 4.0 : x);
      if (i > 0) cdf_[static_cast<std::size_t>(i)] = cdf_[static_cast<std::size_t>(i - 1)] + 0.5 * step_ * (d + prev);
      prev = d;
    }
  }
  double total() const { return cdf_.back(); }
  double operator()(double x) const {
    const double u = (x - lo_) / step_;
    if (u <= 0.0) return 0.0;
    if (u >= kCells) return 1.0;
    const auto i = static_cast<std::size_t>(u);
    const double f = u - static_cast<double>(i);
    return (1.0 - f) * cdf_[i] + f * cdf_[i + 1];
  }

 private:
  static constexpr int kCells = 2400;
  double lo_ = 0.0, step_ = 0.0;
  std::vector<double> cdf_;
};

}  // namespace detail

/// beta = 2, n = 2 transition density from `start`: mass on the chamber, one-sample KS of each
/// coordinate against Dyson SDE paths and against exact matrix paths, and the forward equation
/// at three points.
inline ExperimentReport transition_report(const TransitionConfig& cfg) {
  detail::require(cfg.start.size() == 2 && cfg.start[0] <= cfg.start[1], "transition start must be 2 sorted points");
  detail::require(cfg.paths >= 2 && cfg.dt > 0.0 && !cfg.times.empty(), "bad transition config");
  for (double t : cfg.times) detail::require(t > 0.0, "transition times must be positive");
  const unsigned workers = resolve_workers(cfg.workers ? std::optional<unsigned>(cfg.workers) : std::nullopt);
  ExperimentReport rep;
  rep.name = "transition_density";
  rep.param("start_1", cfg.start[0]);
  rep.param("start_2", cfg.start[1]);
  rep.param("paths", static_cast<std::int64_t>(cfg.paths));
  rep.param("dt", cfg.dt);
  rep.param("alpha", cfg.alpha);
  rep.provenance = {cfg.seed, cfg.dt, cfg.paths, config_digest(cfg.canonical())};

  SelfAdjointMatrix b0 = SelfAdjointMatrix::diagonal(Beta::kComplex, cfg.start);
  std::uint64_t violations = 0;
  for (std::size_t ti = 0; ti < cfg.times.size(); ++ti) {
    const double t = cfg.times[ti];
    std::ostringstream tag_os;
    tag_os << "_t" << t;
    const std::string tag = tag_os.str();
    const double bound = invariant_support_bound(2, 2.0) + 2.0 + std::abs(cfg.start[0]) + std::abs(cfg.start[1]);
    const double mass = integrate_2d(
        [&](double l2, double l1) {
          const double l[2] = {l1, l2};
          return transition_density_lambda(t, cfg.start, std::span<const double>(l, 2));
        },
        -bound, bound, [&](double) { return -bound; }, [](double l2) { return l2; }, QuadratureOptions{1e-10, 15});
    rep.stat("mass" + tag, mass);
    rep.check_below("mass" + tag, std::abs(mass - 1.0), cfg.mass_tolerance);

    std::vector<std::vector<double>> sde(2, std::vector<double>(cfg.paths)), mat = sde;
    std::vector<std::uint64_t> viol(cfg.paths, 0);
    parallel_for(cfg.paths, workers, [&](std::size_t k) {
      RandomStream rs(cfg.seed, (static_cast<std::uint64_t>(ti) << 40) + k, StreamPurpose::kSpectralPath);
      SdeDiagnostics diag;
      const std::vector<double> x = simulate_dyson(cfg.start, t, cfg.dt, 2.0, rs, diag);
      viol[k] = diag.violations;
      RandomStream rm(cfg.seed, (static_cast<std::uint64_t>(ti) << 40) + k, StreamPurpose::kMatrixPath);
      const std::vector<double> y = eigenvalues(ou_step_exact(b0, t, rm)).values();
      for (std::size_t c = 0; c < 2; ++c) {
        sde[c][k] = x[c];
        mat[c][k] = y[c];
      }
    });
    for (std::uint64_t v : viol) violations += v;
    for (std::size_t c = 0; c < 2; ++c) {
      const detail::TransitionMarginalCdf cdf(t, cfg.start, c);
      const std::string coord = "_lambda" + std::to_string(c + 1) + tag;
      rep.stat("marginal_mass" + coord, cdf.total());
      const KsResult ks = ks_one_sample(sde[c], cdf);
      rep.test_p("ks_sde" + coord, ks.statistic, ks.p, cfg.alpha);
      const KsResult km = ks_one_sample(mat[c], cdf);
      rep.test_p("ks_matrix" + coord, km.statistic, km.p, cfg.alpha);
    }
  }
  rep.check_below("interlacing_violations", static_cast<double>(violations), 0.0);

  const double t = 0.5, ht = 1e-3;
  double worst = 0.0;
  for (const auto& lam : {std::vector<double>{-0.6, 0.4}, std::vector<double>{0.0, 1.2}, std::vector<double>{-1.0, 0.3}}) {
    const double dpdt = (transition_density_lambda(t + ht, cfg.start, lam) -
                         transition_density_lambda(t - ht, cfg.start, lam)) / (2.0 * ht);
    auto p = [&](std::span<const double> l) { return transition_density_lambda(t, cfg.start, l); };
    const AdjointValue a = adjoint_dyson_apply(p, lam, 2.0, 0.0, true);
    worst = std::max(worst, std::abs(dpdt - a.value) / std::abs(dpdt));
  }
  rep.stat("forward_equation_relative_residual", worst);
  rep.check_below("forward_equation", worst, cfg.forward_tolerance);
  return rep;
}

struct GeneratorConfig {
  std::size_t n = 3;
  double beta = 2.0;
  std::uint64_t points = 50;
  std::uint64_t seed = 1;
  double h = 0.0;  // 0: default stencil
  double tolerance = 1e-4;
  double eigen_tolerance = 1e-3;

  std::string canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "generator n=" << n << " beta=" << beta << " points=" << points << " seed=" << seed << " h=" << h
       << " tol=" << tolerance << " eigen_tol=" << eigen_tolerance;
    return os.str();
  }
};

/// Full forward operator applied to the invariant pair density at random interior points; at
/// beta = 2 also the split into lambda, mu and cross parts, which equal n(n-1)/2, n(n-1)/2 and
/// -n(n-1) times the density.
inline ExperimentReport generator_report(const GeneratorConfig& cfg) {
  detail::require(cfg.n >= 2 && cfg.points >= 1 && cfg.beta > 0.0, "bad generator config");
  ExperimentReport rep;
  rep.name = "generator_invariant";
  rep.param("n", static_cast<std::int64_t>(cfg.n));
  rep.param("beta", cfg.beta);
  rep.param("points", static_cast<std::int64_t>(cfg.points));
  rep.param("h", cfg.h);
  rep.param("tolerance", cfg.tolerance);
  rep.param("eigen_tolerance", cfg.eigen_tolerance);
  rep.provenance = {cfg.seed, 0.0, cfg.points, config_digest(cfg.canonical())};
  const double beta = cfg.beta;
  const PairFunction f = [beta](std::span<const double> l, std::span<const double> m) {
    return invariant_density_pair(l, m, beta);
  };
  const double half = 0.5 * static_cast<double>(cfg.n * (cfg.n - 1));
  const bool eigen = beta == 2.0;
  double full = 0.0, lam_err = 0.0, mu_err = 0.0, cross_err = 0.0;
  RandomStream rng(cfg.seed, 4, StreamPurpose::kTrials);
  for (std::uint64_t k = 0; k < cfg.points; ++k) {
    const InterlacedPair p = sample_interlaced_pair(cfg.n, rng);
    full = std::max(full, adjoint_generator_apply(AdjointPart::kFull, f, p, beta, cfg.h, true).relative());
    if (!eigen) continue;
    const double i0 = invariant_density_pair(p, beta);
    lam_err = std::max(lam_err, std::abs(adjoint_generator_apply(AdjointPart::kLambda, f, p, beta, cfg.h, true).value / i0 - half));
    mu_err = std::max(mu_err, std::abs(adjoint_generator_apply(AdjointPart::kMu, f, p, beta, cfg.h, true).value / i0 - half));
    cross_err = std::max(cross_err, std::abs(adjoint_generator_apply(AdjointPart::kCross, f, p, beta, cfg.h, true).value / i0 + 2.0 * half));
  }
  rep.stat("max_full_relative_residual", full);
  rep.check_below("full_forward_operator", full, cfg.tolerance);
  if (eigen) {
    rep.stat("eigenvalue_target", half);
    rep.stat("max_lambda_part_error", lam_err);
    rep.stat("max_mu_part_error", mu_err);
    rep.stat("max_cross_part_error", cross_err);
    rep.check_below("lambda_part_eigenvalue", lam_err, cfg.eigen_tolerance);
    rep.check_below("mu_part_eigenvalue", mu_err, cfg.eigen_tolerance);
    rep.check_below("cross_part_eigenvalue", cross_err, 2.0 * cfg.eigen_tolerance);
  }
  return rep;
}

/// Gap drifts when mu_i collides with lambda_i (lower) or lambda_{i+1} (upper) on random
/// configurations: closed forms are positive and agree with the general drift difference.
inline ExperimentReport collapsed_gap_drift_trials(const TrialConfig& cfg) {
  cfg.validate();
  ExperimentReport rep;
  detail::trial_header(rep, "collapsed_gap_drift_trials", cfg);
  double min_drift = HUGE_VAL, mismatch = 0.0;
  RandomStream rng(cfg.seed, 5, StreamPurpose::kTrials);
  for (std::uint64_t k = 0; k < cfg.trials; ++k) {
    const std::size_t n = cfg.n_at(k);
    const InterlacedPair p = sample_interlaced_pair(n, rng);
    const auto i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n - 1));
    for (int side = 0; side < 2; ++side) {
      std::vector<double> mu = p.mu().values();
      mu[i] = p.lambda()[i + static_cast<std::size_t>(side)];
      const InterlacedPair c(p.lambda().values(), mu);
      const double closed = side == 0 ? collapsed_gap_drift(c.lambda().values(), mu, i)
                                      : collapsed_upper_gap_drift(c.lambda().values(), mu, i);
      const GapDrift g = gap_drift(c, i);
      const double general = side == 0 ? g.lower : g.upper;
      min_drift = std::min(min_drift, closed);
      mismatch = std::max(mismatch, std::abs(general - closed) / std::max(1.0, std::abs(closed)));
    }
  }
  rep.stat("min_collapsed_drift", min_drift);
  rep.stat("max_closed_form_mismatch", mismatch);
  rep.check("collapsed_drift_positive", min_drift, min_drift > 0.0);
  rep.check_below("closed_form_matches_drift", mismatch, 1e-9);
  return rep;
}

}  // namespace minor_dyson
