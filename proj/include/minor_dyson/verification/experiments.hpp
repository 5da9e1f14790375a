#pragma once

// Path-law equivalence between the matrix and coupled spectral routes, stationarity of the
// pair law, and the general-beta run against quadrature of the invariant law.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "minor_dyson/core/parallel.hpp"
#include "minor_dyson/core/report.hpp"
#include "minor_dyson/densities/invariant.hpp"
#include "minor_dyson/matrix_process.hpp"
#include "minor_dyson/spectral_sde.hpp"
#include "minor_dyson/verification/stats.hpp"

namespace minor_dyson {

inline std::string config_digest(std::string_view canonical) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(detail::fnv1a(canonical)));
  return buf;
}

namespace detail {

/// Records |diff| <= z_max * se as a test; with se == 0 the difference must vanish.
inline void check_z(ExperimentReport& r, const std::string& name, double diff, double se, double z_max = 3.0) {
  const double z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::copysign(HUGE_VAL, diff));
  r.check(name, z, std::abs(z) <= z_max);
}

inline double sum(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

inline double sum_sq(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

/// Smallest gap of the merged chain lambda_1 < mu_1 < ... < lambda_n.
inline double chain_min_gap(std::span<const double> lambda, std::span<const double> mu) {
  double g = HUGE_VAL;
  for (std::size_t i = 0; i < mu.size(); ++i) g = std::min({g, mu[i] - lambda[i], lambda[i + 1] - mu[i]});
  return g;
}

/// Root of sum_i w_i / (x - lambda_i) in (lambda_k, lambda_{k+1}); the sum decreases there.
inline double interlacing_root(std::span<const double> lambda, std::span<const double> w, std::size_t k) {
  double lo = lambda[k], hi = lambda[k + 1];
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    double f = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) f += w[i] / (mid - lambda[i]);
    (f > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Draw from the invariant pair law for any beta > 0: lambda from the tridiagonal model
/// (diagonal N(0, 1/beta), off-diagonal chi_{beta k} / sqrt(2 beta)), then mu as the roots of
/// sum_i w_i / (x - lambda_i) with w ~ Dirichlet(beta/2, ..., beta/2).
inline CoupledState sample_invariant_pair_general(std::size_t n, double beta, RandomStream& rng) {
  detail::require(n >= 2 && beta > 0.0, "invariant pair sampler needs n >= 2 and beta > 0");
  Eigen::VectorXd diag(static_cast<Eigen::Index>(n)), off(static_cast<Eigen::Index>(n - 1));
  for (std::size_t i = 0; i < n; ++i) diag(static_cast<Eigen::Index>(i)) = rng.normal() / std::sqrt(beta);
  for (std::size_t k = 1; k < n; ++k) {
    std::gamma_distribution<double> chi2(0.5 * beta * static_cast<double>(k), 2.0);
    off(static_cast<Eigen::Index>(k - 1)) = std::sqrt(chi2(rng) / (2.0 * beta));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  CoupledState s;
  s.lambda.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
  std::gamma_distribution<double> g(0.5 * beta, 1.0);
  std::vector<double> w(n);
  double total = 0.0;
  for (double& x : w) total += (x = g(rng));
  for (double& x : w) x /= total;
  s.mu.resize(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) s.mu[k] = detail::interlacing_root(s.lambda, w, k);
  return s;
}

/// Invariant pair draw: eigen-data of a Gaussian-ensemble matrix for beta in {1, 2, 4},
/// the general sampler otherwise.
inline CoupledState sample_invariant_pair(std::size_t n, double beta, RandomStream& rng) {
  if (!is_classical_beta(beta)) return sample_invariant_pair_general(n, beta, rng);
  const InterlacedPair p = spectral_pair(sample_gaussian_ensemble(n, to_beta(beta), rng));
  return CoupledState{p.lambda().values(), p.mu().values(), 0.0};
}

/// Fixed start of the equivalence experiment: the bordered matrix of an evenly spread pair.
inline SelfAdjointMatrix default_initial_matrix(std::size_t n, Beta beta) {
  detail::require(n >= 2, "initial matrix needs n >= 2");
  std::vector<double> lambda(n), mu(n - 1);
  for (std::size_t i = 0; i < n; ++i) lambda[i] = 1.2 * (static_cast<double>(i) - 0.5 * static_cast<double>(n - 1));
  for (std::size_t i = 0; i + 1 < n; ++i) mu[i] = lambda[i] + (i % 2 == 0 ? 0.4 : 0.7);
  lambda[0] -= 0.1;
  std::vector<AlgebraElement> u(n - 1, AlgebraElement::unit(beta));
  if (beta != Beta::kReal)
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double a = 0.9 * static_cast<double>(i + 1);
      u[i][0] = std::cos(a);
      u[i][1] = std::sin(a);
    }
  return bordered_matrix(border_from_spectra(InterlacedPair(lambda, mu), beta, std::move(u)));
}

struct PathEquivalenceConfig {
  std::size_t n = 2;
  double beta = 1.0;
  double t = 0.5;
  std::uint64_t paths = 100000;
  std::uint64_t seed = 1;
  double dt = 1e-3;
  unsigned workers = 0;
  double alpha = 0.005;  // per KS test
  Coupling coupling = Coupling::kShared;
  std::uint64_t qv_draws = 200000;
  double qv_dt = 1e-6;
  double qv_tolerance = 0.05;  // relative to the largest cross entry
  std::optional<SelfAdjointMatrix> initial;

  std::string canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "path_equivalence n=" << n << " beta=" << beta << " t=" << t << " paths=" << paths << " seed=" << seed
       << " dt=" << dt << " alpha=" << alpha << " coupling=" << (coupling == Coupling::kShared ? "shared" : "independent")
       << " qv_draws=" << qv_draws << " qv_dt=" << qv_dt << " custom_initial=" << initial.has_value();
    return os.str();
  }
};

namespace detail {

/// Empirical d(lambda, mu) d(lambda, mu)^T / dt from `draws` increments of `step`.
template <class Step>
Eigen::MatrixXd empirical_covariation(std::size_t n, std::uint64_t draws, double dt, Step&& step) {
  const auto m = static_cast<Eigen::Index>(2 * n - 1);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd d(m);
  for (std::uint64_t k = 0; k < draws; ++k) {
    step(k, d);
    acc.noalias() += d * d.transpose();
  }
  return acc / (static_cast<double>(draws) * dt);
}

inline double cross_block_error(const Eigen::MatrixXd& emp, const Eigen::MatrixXd& ref, std::size_t n,
                                double* ref_scale) {
  const auto ni = static_cast<Eigen::Index>(n);
  const auto cross_ref = ref.block(0, ni, ni, ni - 1);
  const auto cross_emp = emp.block(0, ni, ni, ni - 1);
  *ref_scale = cross_ref.cwiseAbs().maxCoeff();
  return (cross_emp - cross_ref).cwiseAbs().maxCoeff() / *ref_scale;
}

}  // namespace detail

/// Matrix route (exact OU transition, spectra of B and of its leading minor) against the
/// coupled spectral SDE from the same spectra: two-sample KS on every coordinate and on
/// sum lambda, sum lambda^2, sum mu, plus the empirical cross covariation of each route
/// against the closed form.
inline ExperimentReport path_equivalence_experiment(const PathEquivalenceConfig& cfg) {
  detail::require(is_classical_beta(cfg.beta), "matrix route needs beta in {1, 2, 4}");
  detail::require(cfg.n >= 2 && cfg.paths >= 2 && cfg.t >= 0.0 && cfg.dt > 0.0, "bad path equivalence config");
  const Beta beta = to_beta(cfg.beta);
  const SelfAdjointMatrix b0 = cfg.initial ? *cfg.initial : default_initial_matrix(cfg.n, beta);
  detail::require(b0.n() == cfg.n && b0.beta() == beta, "initial matrix does not match n and beta");
  const InterlacedPair start = spectral_pair(b0);
  if (!start.strict()) throw DomainError("initial matrix must have strictly interlaced spectra");
  const std::size_t n = cfg.n, m = 2 * n - 1, stats = m + 3;
  const unsigned workers = resolve_workers(cfg.workers ? std::optional<unsigned>(cfg.workers) : std::nullopt);

  auto features = [&](std::span<const double> lam, std::span<const double> mu, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = lam[i];
    for (std::size_t j = 0; j + 1 < n; ++j) out[n + j] = mu[j];
    out[m] = detail::sum(lam);
    out[m + 1] = detail::sum_sq(lam);
    out[m + 2] = detail::sum(mu);
  };

  std::vector<std::vector<double>> a(stats, std::vector<double>(cfg.paths)), b = a;
  std::vector<SdeDiagnostics> diags(cfg.paths);
  parallel_for(cfg.paths, workers, [&](std::size_t k) {
    std::vector<double> f(stats);
    RandomStream rm(cfg.seed, k, StreamPurpose::kMatrixPath);
    const InterlacedPair p = spectral_pair(ou_step_exact(b0, cfg.t, rm));
    features(p.lambda().values(), p.mu().values(), f);
    for (std::size_t q = 0; q < stats; ++q) a[q][k] = f[q];

    RandomStream rs(cfg.seed, k, StreamPurpose::kSpectralPath);
    CoupledState s{start.lambda().values(), start.mu().values(), 0.0};
    CoupledStepper(n, cfg.beta, cfg.coupling).advance(s, cfg.t, cfg.dt, rs, diags[k]);
    features(s.lambda, s.mu, f);
    for (std::size_t q = 0; q < stats; ++q) b[q][k] = f[q];
  });
  SdeDiagnostics diag;
  for (const auto& d : diags) diag += d;

  ExperimentReport r;
  r.name = "path_equivalence";
  r.param("n", static_cast<std::int64_t>(n));
  r.param("beta", cfg.beta);
  r.param("t", cfg.t);
  r.param("paths", static_cast<std::int64_t>(cfg.paths));
  r.param("dt", cfg.dt);
  r.param("alpha_per_test", cfg.alpha);
  r.param("coupling", std::string(cfg.coupling == Coupling::kShared ? "shared" : "independent"));
  r.provenance = {cfg.seed, cfg.dt, cfg.paths, config_digest(cfg.canonical())};

  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("ks_lambda_" + std::to_string(i + 1));
  for (std::size_t j = 0; j + 1 < n; ++j) names.push_back("ks_mu_" + std::to_string(j + 1));
  names.insert(names.end(), {"ks_sum_lambda", "ks_sum_lambda_sq", "ks_sum_mu"});
  for (std::size_t q = 0; q < stats; ++q) {
    const KsResult ks = ks_two_sample(a[q], b[q]);
    r.test_p(names[q], ks.statistic, ks.p, cfg.alpha);
  }
  r.stat("ks_tests", static_cast<double>(stats));
  r.stat("family_alpha", cfg.alpha * static_cast<double>(stats));
  for (std::size_t q = 0; q < stats; ++q) {
    const MomentEstimate ma = mean_estimate(a[q]), mb = mean_estimate(b[q]);
    r.stat("matrix_mean_" + names[q].substr(3), ma.value, ma.stderr_);
    r.stat("spectral_mean_" + names[q].substr(3), mb.value, mb.stderr_);
  }

  // Instantaneous covariation at the start, estimated along both routes.
  const Eigen::MatrixXd q = quadratic_variation_analytic(start, cfg.beta);
  const auto& lam0 = start.lambda().values();
  const auto& mu0 = start.mu().values();
  const Eigen::MatrixXd qm = detail::empirical_covariation(n, cfg.qv_draws, cfg.qv_dt, [&](std::uint64_t k, Eigen::VectorXd& d) {
    RandomStream rng(cfg.seed, k, StreamPurpose::kQuadraticVariation);
    const InterlacedPair p = spectral_pair(ou_step_exact(b0, cfg.qv_dt, rng));
    for (std::size_t i = 0; i < n; ++i) d(static_cast<Eigen::Index>(i)) = p.lambda()[i] - lam0[i];
    for (std::size_t j = 0; j + 1 < n; ++j) d(static_cast<Eigen::Index>(n + j)) = p.mu()[j] - mu0[j];
  });
  CoupledStepper stepper(n, cfg.beta, cfg.coupling);
  const CoupledState s0{lam0, mu0, 0.0};
  CoupledState next;
  std::vector<double> dw(stepper.noise_dim());
  const double sd = std::sqrt(cfg.qv_dt);
  const Eigen::MatrixXd qs = detail::empirical_covariation(n, cfg.qv_draws, cfg.qv_dt, [&](std::uint64_t k, Eigen::VectorXd& d) {
    RandomStream rng(cfg.seed, k, StreamPurpose::kReference);
    for (double& w : dw) w = sd * rng.normal();
    stepper.raw_increment(s0, cfg.qv_dt, dw, next);
    for (std::size_t i = 0; i < n; ++i) d(static_cast<Eigen::Index>(i)) = next.lambda[i] - lam0[i];
    for (std::size_t j = 0; j + 1 < n; ++j) d(static_cast<Eigen::Index>(n + j)) = next.mu[j] - mu0[j];
  });
  double scale = 0.0;
  const double err_matrix = detail::cross_block_error(qm, q, n, &scale);
  const double err_spectral = detail::cross_block_error(qs, q, n, &scale);
  r.stat("cross_covariation_scale", scale);
  r.check_below("cross_covariation_matrix_route", err_matrix, cfg.qv_tolerance);
  r.check_below("cross_covariation_spectral_route", err_spectral, cfg.qv_tolerance);

  r.stat("accepted_steps", static_cast<double>(diag.accepted));
  r.stat("halvings", static_cast<double>(diag.halvings));
  r.stat("resamples", static_cast<double>(diag.resamples));
  r.check("interlacing_violations", static_cast<double>(diag.violations), diag.violations == 0);
  return r;
}

struct StationarityConfig {
  std::size_t n = 3;
  double beta = 2.0;
  double t = 1.0;
  std::uint64_t paths = 100000;
  std::uint64_t seed = 1;
  double dt = 1e-3;
  double shift = 0.0;  // added to every coordinate of the initial draw
  unsigned workers = 0;
  double z_max = 3.0;

  std::string canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "stationarity n=" << n << " beta=" << beta << " t=" << t << " paths=" << paths << " seed=" << seed
       << " dt=" << dt << " shift=" << shift << " z_max=" << z_max;
    return os.str();
  }
};

/// Starts each path at an invariant draw (optionally shifted), evolves it by t and compares
/// the means of sum lambda, sum mu, sum lambda^2, sum mu^2 and the smallest gap with those
/// of the unshifted draws, through paired differences.
inline ExperimentReport stationarity_experiment(const StationarityConfig& cfg) {
  detail::require(cfg.n >= 2 && cfg.beta > 0.0 && cfg.paths >= 2 && cfg.t >= 0.0 && cfg.dt > 0.0,
                  "bad stationarity config");
  const std::size_t n = cfg.n;
  const unsigned workers = resolve_workers(cfg.workers ? std::optional<unsigned>(cfg.workers) : std::nullopt);
  constexpr std::size_t kF = 5;
  const char* names[kF] = {"sum_lambda", "sum_mu", "sum_lambda_sq", "sum_mu_sq", "min_gap"};
  auto features = [](const CoupledState& s, double* out) {
    out[0] = detail::sum(s.lambda);
    out[1] = detail::sum(s.mu);
    out[2] = detail::sum_sq(s.lambda);
    out[3] = detail::sum_sq(s.mu);
    out[4] = detail::chain_min_gap(s.lambda, s.mu);
  };
  std::vector<std::array<double, kF>> before(cfg.paths), after(cfg.paths);
  std::vector<SdeDiagnostics> diags(cfg.paths);
  parallel_for(cfg.paths, workers, [&](std::size_t k) {
    RandomStream init(cfg.seed, k, StreamPurpose::kInitialCondition);
    CoupledState s = sample_invariant_pair(n, cfg.beta, init);
    features(s, before[k].data());
    for (double& x : s.lambda) x += cfg.shift;
    for (double& x : s.mu) x += cfg.shift;
    RandomStream rng(cfg.seed, k, StreamPurpose::kSpectralPath);
    CoupledStepper(n, cfg.beta).advance(s, cfg.t, cfg.dt, rng, diags[k]);
    features(s, after[k].data());
  });
  SdeDiagnostics diag;
  for (const auto& d : diags) diag += d;

  ExperimentReport r;
  r.name = "stationarity";
  r.param("n", static_cast<std::int64_t>(n));
  r.param("beta", cfg.beta);
  r.param("t", cfg.t);
  r.param("paths", static_cast<std::int64_t>(cfg.paths));
  r.param("dt", cfg.dt);
  r.param("shift", cfg.shift);
  r.provenance = {cfg.seed, cfg.dt, cfg.paths, config_digest(cfg.canonical())};
  for (std::size_t f = 0; f < kF; ++f) {
    MeanAccumulator b, a, d;
    for (std::size_t k = 0; k < cfg.paths; ++k) {
      b.add(before[k][f]);
      a.add(after[k][f]);
      d.add(after[k][f] - before[k][f]);
    }
    r.stat(std::string("initial_mean_") + names[f], b.mean(), b.stderr_mean());
    r.stat(std::string("final_mean_") + names[f], a.mean(), a.stderr_mean());
    detail::check_z(r, std::string("stationary_") + names[f], d.mean(), d.stderr_mean(), cfg.z_max);
  }
  r.stat("accepted_steps", static_cast<double>(diag.accepted));
  r.check("interlacing_violations", static_cast<double>(diag.violations), diag.violations == 0);
  return r;
}

struct GeneralBetaConfig {
  std::size_t n = 3;
  double beta = 2.5;
  double t = 4.0;
  std::uint64_t paths = 20000;
  std::uint64_t seed = 1;
  double dt = 1e-3;
  unsigned workers = 0;
  double alpha = 0.005;
  double z_max = 3.0;
  double quadrature_tolerance = 1e-9;

  std::string canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "general_beta n=" << n << " beta=" << beta << " t=" << t << " paths=" << paths << " seed=" << seed
       << " dt=" << dt << " alpha=" << alpha << " z_max=" << z_max;
    return os.str();
  }
};

/// Symmetric start whose sum of squares already equals the stationary mean 2N/beta, so the
/// moments relax from close by.
inline CoupledState balanced_start(std::size_t n, double beta) {
  auto spread = [&](std::size_t m) {
    std::vector<double> x(m);
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      x[i] = static_cast<double>(i) - 0.5 * static_cast<double>(m - 1);
      ss += x[i] * x[i];
    }
    const double target = 2.0 * dimension_n(m, beta) / beta;
    const double k = ss > 0.0 ? std::sqrt(target / ss) : 0.0;
    for (double& v : x) v *= k;
    return x;
  };
  CoupledState s{spread(n), spread(n - 1), 0.0};
  regularize_initial(s);
  return s;
}

/// Coupled SDE at a general beta: stability, the lambda marginal against a standalone Dyson
/// run from the same start, and long-run moments of lambda and mu against quadrature of the
/// invariant law (of size n and n - 1).
inline ExperimentReport general_beta_experiment(const GeneralBetaConfig& cfg) {
  detail::require(cfg.n >= 2 && cfg.n <= 3, "general beta experiment uses quadrature, n in {2, 3}");
  detail::require(cfg.beta > 0.0 && cfg.paths >= 2 && cfg.t > 0.0 && cfg.dt > 0.0, "bad general beta config");
  const std::size_t n = cfg.n;
  const unsigned workers = resolve_workers(cfg.workers ? std::optional<unsigned>(cfg.workers) : std::nullopt);
  const CoupledState start = balanced_start(n, cfg.beta);

  std::vector<std::vector<double>> lam(n, std::vector<double>(cfg.paths)), dys = lam;
  std::vector<std::array<double, 4>> fun(cfg.paths);  // sum lambda, sum lambda^2, sum mu, sum mu^2
  std::vector<SdeDiagnostics> diags(cfg.paths), ddiags(cfg.paths);
  parallel_for(cfg.paths, workers, [&](std::size_t k) {
    RandomStream rng(cfg.seed, k, StreamPurpose::kSpectralPath);
    CoupledState s = start;
    CoupledStepper(n, cfg.beta).advance(s, cfg.t, cfg.dt, rng, diags[k]);
    for (std::size_t i = 0; i < n; ++i) lam[i][k] = s.lambda[i];
    fun[k] = {detail::sum(s.lambda), detail::sum_sq(s.lambda), detail::sum(s.mu), detail::sum_sq(s.mu)};
    RandomStream ref(cfg.seed, k, StreamPurpose::kReference);
    const std::vector<double> d = simulate_dyson(start.lambda, cfg.t, cfg.dt, cfg.beta, ref, ddiags[k]);
    for (std::size_t i = 0; i < n; ++i) dys[i][k] = d[i];
  });
  SdeDiagnostics diag, ddiag;
  for (const auto& d : diags) diag += d;
  for (const auto& d : ddiags) ddiag += d;

  ExperimentReport r;
  r.name = "general_beta";
  r.param("n", static_cast<std::int64_t>(n));
  r.param("beta", cfg.beta);
  r.param("t", cfg.t);
  r.param("paths", static_cast<std::int64_t>(cfg.paths));
  r.param("dt", cfg.dt);
  r.provenance = {cfg.seed, cfg.dt, cfg.paths, config_digest(cfg.canonical())};

  r.stat("accepted_steps", static_cast<double>(diag.accepted));
  r.stat("resamples", static_cast<double>(diag.resamples));
  r.check("interlacing_violations", static_cast<double>(diag.violations + ddiag.violations),
          diag.violations + ddiag.violations == 0);
  for (std::size_t i = 0; i < n; ++i) {
    const KsResult ks = ks_two_sample(lam[i], dys[i]);
    r.test_p("ks_lambda_" + std::to_string(i + 1) + "_vs_dyson", ks.statistic, ks.p, cfg.alpha);
  }

  // Moments: E s, E s^2 for s = sum x and E q, E q^2 for q = sum x^2.
  auto compare = [&](const std::string& tag, std::size_t size, std::size_t col_sum, std::size_t col_sq) {
    const SpectralMoments m = invariant_moments_by_quadrature(size, cfg.beta, cfg.quadrature_tolerance);
    const double ref[4] = {m.sum_mean, m.sum_second, m.sq_mean, m.sq_second};
    const char* what[4] = {"mean_sum_", "mean_sum_squared_", "mean_sum_sq_", "mean_sum_sq_squared_"};
    for (int j = 0; j < 4; ++j) {
      MeanAccumulator acc;
      for (const auto& f : fun) {
        const double v = j < 2 ? f[col_sum] : f[col_sq];
        acc.add(j % 2 == 0 ? v : v * v);
      }
      const std::string key = std::string(what[j]) + tag;
      r.stat(key, acc.mean(), acc.stderr_mean());
      r.stat(key + "_quadrature", ref[j]);
      detail::check_z(r, "moment_" + key, acc.mean() - ref[j], acc.stderr_mean(), cfg.z_max);
    }
    r.stat("quadrature_mass_" + tag, m.mass);
  };
  compare("lambda", n, 0, 1);
  compare("mu", n - 1, 2, 3);
  return r;
}

}  // namespace minor_dyson
