#pragma once

// Euler-Maruyama integration of the Dyson eigenvalue SDE and of the coupled
// SDE for the spectra of two consecutive minors, for any beta > 0.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "minor_dyson/core/rng.hpp"
#include "minor_dyson/minor_geometry.hpp"

namespace minor_dyson {

/// Step bookkeeping. `violations` counts accepted states that break strict ordering
/// and must stay at zero.
struct SdeDiagnostics {
  std::uint64_t accepted = 0;     // accepted substeps
  std::uint64_t halvings = 0;     // bridge refinements after a rejected substep
  std::uint64_t resamples = 0;    // whole steps redrawn after reaching the minimal substep
  std::uint64_t violations = 0;

  SdeDiagnostics& operator+=(const SdeDiagnostics& o) noexcept {
    accepted += o.accepted;
    halvings += o.halvings;
    resamples += o.resamples;
    violations += o.violations;
    return *this;
  }
};

inline constexpr int kMaxHalvings = 10;
inline constexpr int kMaxResamples = 1000;

/// -x_i + sum_{j != i} 1/(x_i - x_j)
inline double dyson_drift(std::span<const double> x, std::size_t i) noexcept {
  double d = -x[i];
  for (std::size_t j = 0; j < x.size(); ++j)
    if (j != i) d += 1.0 / (x[i] - x[j]);
  return d;
}

inline bool strictly_increasing(std::span<const double> x) noexcept {
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i - 1] < x[i])) return false;
  return true;
}

namespace detail {

/// Advances `state` by dt with Brownian increments `dw`. A substep that breaks validity
/// is split at the Brownian-bridge midpoint, down to dt / 2^kMaxHalvings. Returns false
/// if the minimal substep still fails; `state` is then unspecified.
template <class Advance, class Valid>
bool bridge_advance(std::vector<double>& state, double dt, const std::vector<double>& dw, int depth,
                    RandomStream& rng, SdeDiagnostics& diag, Advance& advance, Valid& valid,
                    std::vector<double>& scratch) {
  scratch = state;
  advance(scratch, dt, dw);
  if (valid(scratch)) {
    state.swap(scratch);
    ++diag.accepted;
    return true;
  }
  if (depth >= kMaxHalvings) return false;
  ++diag.halvings;
  const double half_sd = 0.5 * std::sqrt(dt);
  std::vector<double> first(dw.size()), second(dw.size());
  for (std::size_t k = 0; k < dw.size(); ++k) {
    first[k] = 0.5 * dw[k] + half_sd * rng.normal();
    second[k] = dw[k] - first[k];
  }
  return bridge_advance(state, 0.5 * dt, first, depth + 1, rng, diag, advance, valid, scratch) &&
         bridge_advance(state, 0.5 * dt, second, depth + 1, rng, diag, advance, valid, scratch);
}

/// One full step with redraws on persistent failure.
template <class Advance, class Valid, class Snapshot>
void robust_step(std::vector<double>& state, double dt, std::size_t noise_dim, RandomStream& rng,
                 SdeDiagnostics& diag, Advance&& advance, Valid&& valid, Snapshot&& snapshot,
                 double time) {
  std::vector<double> dw(noise_dim), scratch, trial;
  const double sd = std::sqrt(dt);
  for (int attempt = 0; attempt <= kMaxResamples; ++attempt) {
    for (double& w : dw) w = sd * rng.normal();
    trial = state;
    if (bridge_advance(trial, dt, dw, 0, rng, diag, advance, valid, scratch)) {
      if (!valid(trial)) ++diag.violations;
      state.swap(trial);
      return;
    }
    ++diag.resamples;
  }
  snapshot(state, time);
}

}  // namespace detail

/// One Euler-Maruyama step of d lambda_i = (-lambda_i + sum_{j!=i} 1/(lambda_i - lambda_j)) dt
/// + sqrt(2/beta) db_i.
inline std::vector<double> dyson_step(std::vector<double> lambda, double dt, double beta,
                                      RandomStream& rng, SdeDiagnostics& diag, double time = 0.0) {
  detail::require(dt > 0.0, "dt must be positive");
  detail::require(beta > 0.0, "beta must be positive");
  if (!strictly_increasing(lambda)) throw DegenerateSpectrum("dyson_step needs a simple spectrum");
  const double sigma = std::sqrt(2.0 / beta);
  std::vector<double> drift(lambda.size());
  auto advance = [&](std::vector<double>& x, double h, const std::vector<double>& dw) {
    for (std::size_t i = 0; i < x.size(); ++i) drift[i] = dyson_drift(x, i);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += drift[i] * h + sigma * dw[i];
  };
  auto valid = [](const std::vector<double>& x) { return strictly_increasing(x); };
  auto snapshot = [](const std::vector<double>& x, double t) {
    throw StepFailure("dyson_step: ordering kept failing at the minimal substep", x, {}, t);
  };
  detail::robust_step(lambda, dt, lambda.size(), rng, diag, advance, valid, snapshot, time);
  return lambda;
}

inline std::vector<double> simulate_dyson(std::vector<double> lambda, double t, double dt, double beta,
                                          RandomStream& rng, SdeDiagnostics& diag) {
  detail::require(t >= 0.0, "t must be nonnegative");
  const auto steps = static_cast<std::uint64_t>(std::ceil(t / dt - 1e-9));
  double time = 0.0;
  for (std::uint64_t k = 0; k < steps; ++k) {
    const double h = std::min(dt, t - time);
    if (h <= 0.0) break;
    lambda = dyson_step(std::move(lambda), h, beta, rng, diag, time);
    time += h;
  }
  return lambda;
}

/// How the mu equation receives its noise.
enum class Coupling {
  kShared,       // the same db_ii drive mu_i and the lambda equation
  kIndependent,  // mu gets fresh noise; negative control that breaks the cross covariation
};

struct CoupledState {
  std::vector<double> lambda;  // n
  std::vector<double> mu;      // n - 1
  double time = 0.0;

  std::size_t n() const noexcept { return lambda.size(); }
  InterlacedPair pair() const { return InterlacedPair(lambda, mu); }
};

/// Noise layout: db_11..db_nn, then db~_ij for i < j row-major.
inline std::size_t coupled_noise_dim(std::size_t n) noexcept { return n + n * (n - 1) / 2; }

inline std::size_t tilde_index(std::size_t n, std::size_t i, std::size_t j) noexcept {
  // position of db~_ij (0-based i < j) in the noise vector
  return n + i * n - i * (i + 1) / 2 + (j - i - 1);
}

namespace detail {

/// Merged chain lambda_1 < mu_1 < ... < mu_{n-1} < lambda_n, stored as [lambda..., mu...].
inline bool strictly_interlaced(std::span<const double> x, std::size_t n) noexcept {
  const auto lam = x.subspan(0, n);
  const auto mu = x.subspan(n, n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(lam[i] < mu[i] && mu[i] < lam[i + 1])) return false;
  return true;
}

/// Increment of the coupled system over h at state x = [lambda, mu] with noise dw.
class CoupledIncrement {
 public:
  CoupledIncrement(std::size_t n, double beta, Coupling coupling)
      : n_(n), sigma_(std::sqrt(2.0 / beta)), coupling_(coupling),
        r_(n - 1), w_(n - 1), next_(2 * n - 1) {}

  std::size_t noise_dim() const noexcept {
    return coupled_noise_dim(n_) + (coupling_ == Coupling::kIndependent ? n_ - 1 : 0);
  }

  void operator()(std::vector<double>& x, double h, const std::vector<double>& dw) {
    const std::size_t n = n_;
    const std::span<const double> lam(x.data(), n), mu(x.data() + n, n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double r2 = -poly_eval(lam, mu[k]) / poly_derivative_at_root(mu, k);
      r_[k] = std::sqrt(std::max(r2, 0.0));
    }
    for (std::size_t a = 0; a < n; ++a) {
      const double pref = lambda_prefactor(lam, mu, a);
      for (std::size_t i = 0; i + 1 < n; ++i) w_[i] = r_[i] / (lam[a] - mu[i]);
      double noise = dw[n - 1];  // db_nn
      for (std::size_t i = 0; i + 1 < n; ++i) {
        noise += w_[i] * w_[i] * dw[i];
        noise += kSqrt2 * w_[i] * dw[tilde_index(n, i, n - 1)];
        for (std::size_t j = i + 1; j + 1 < n; ++j) noise += kSqrt2 * w_[i] * w_[j] * dw[tilde_index(n, i, j)];
      }
      next_[a] = lam[a] + dyson_drift(lam, a) * h + sigma_ * pref * noise;
    }
    const std::size_t mu_noise = coupling_ == Coupling::kShared ? 0 : coupled_noise_dim(n);
    for (std::size_t g = 0; g + 1 < n; ++g)
      next_[n + g] = mu[g] + dyson_drift(mu, g) * h + sigma_ * dw[mu_noise + g];
    std::copy(next_.begin(), next_.end(), x.begin());
  }

 private:
  static constexpr double kSqrt2 = 1.4142135623730950488;
  std::size_t n_;
  double sigma_;
  Coupling coupling_;
  std::vector<double> r_, w_, next_;
};

}  // namespace detail

/// Stateful integrator for one coupled path; reuses its buffers across steps.
class CoupledStepper {
 public:
  CoupledStepper(std::size_t n, double beta, Coupling coupling = Coupling::kShared)
      : n_(n), beta_(beta), inc_(n, beta, coupling) {
    detail::require(n >= 2, "coupled SDE needs n >= 2");
    detail::require(beta > 0.0, "beta must be positive");
  }

  void step(CoupledState& s, double dt, RandomStream& rng, SdeDiagnostics& diag) {
    detail::require(dt > 0.0, "dt must be positive");
    detail::require(s.lambda.size() == n_ && s.mu.size() + 1 == n_, "state has wrong size");
    buf_.resize(2 * n_ - 1);
    std::copy(s.lambda.begin(), s.lambda.end(), buf_.begin());
    std::copy(s.mu.begin(), s.mu.end(), buf_.begin() + static_cast<std::ptrdiff_t>(n_));
    const std::size_t n = n_;
    if (!detail::strictly_interlaced(buf_, n)) throw DomainError("coupled_step needs strict interlacing");
    auto valid = [n](const std::vector<double>& x) { return detail::strictly_interlaced(x, n); };
    auto snapshot = [n](const std::vector<double>& x, double t) {
      throw StepFailure("coupled_step: interlacing kept failing at the minimal substep",
                        std::vector<double>(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n)),
                        std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(n), x.end()), t);
    };
    detail::robust_step(buf_, dt, inc_.noise_dim(), rng, diag, inc_, valid, snapshot, s.time);
    std::copy(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(n_), s.lambda.begin());
    std::copy(buf_.begin() + static_cast<std::ptrdiff_t>(n_), buf_.end(), s.mu.begin());
    s.time += dt;
  }

  /// Integrates to time s.time + t with steps of at most dt.
  void advance(CoupledState& s, double t, double dt, RandomStream& rng, SdeDiagnostics& diag) {
    const double end = s.time + t;
    const auto steps = static_cast<std::uint64_t>(std::ceil(t / dt - 1e-9));
    for (std::uint64_t k = 0; k < steps; ++k) {
      const double h = std::min(dt, end - s.time);
      if (h <= 0.0) break;
      step(s, h, rng, diag);
    }
    s.time = end;
  }

  /// Single unsplit Euler increment with the given noise (no validity handling).
  void raw_increment(const CoupledState& s, double dt, const std::vector<double>& dw, CoupledState& out) {
    buf_.assign(s.lambda.begin(), s.lambda.end());
    buf_.insert(buf_.end(), s.mu.begin(), s.mu.end());
    inc_(buf_, dt, dw);
    out.lambda.assign(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(n_));
    out.mu.assign(buf_.begin() + static_cast<std::ptrdiff_t>(n_), buf_.end());
    out.time = s.time + dt;
  }

  std::size_t noise_dim() const noexcept { return inc_.noise_dim(); }
  double beta() const noexcept { return beta_; }

 private:
  std::size_t n_;
  double beta_;
  detail::CoupledIncrement inc_;
  std::vector<double> buf_;
};

inline CoupledState coupled_step(CoupledState s, double dt, double beta, RandomStream& rng,
                                 SdeDiagnostics& diag, Coupling coupling = Coupling::kShared) {
  CoupledStepper(s.n(), beta, coupling).step(s, dt, rng, diag);
  return s;
}

/// Default step: 1e-3 times the smallest gap of the merged chain.
inline double default_dt(const InterlacedPair& p) { return 1e-3 * p.min_gap(); }

/// Moves non-strict initial data off the boundary by 1e-9 of the diameter.
/// Returns true if anything changed.
inline bool regularize_initial(CoupledState& s) {
  const std::size_t n = s.n();
  std::vector<double> chain(2 * n - 1);
  for (std::size_t i = 0; i < n; ++i) chain[2 * i] = s.lambda[i];
  for (std::size_t i = 0; i + 1 < n; ++i) chain[2 * i + 1] = s.mu[i];
  const double eps = 1e-9 * std::max(chain.back() - chain.front(), 1.0);
  bool changed = false;
  for (std::size_t k = 1; k < chain.size(); ++k)
    if (chain[k] <= chain[k - 1]) {
      chain[k] = chain[k - 1] + eps;
      changed = true;
    }
  for (std::size_t i = 0; i < n; ++i) s.lambda[i] = chain[2 * i];
  for (std::size_t i = 0; i + 1 < n; ++i) s.mu[i] = chain[2 * i + 1];
  return changed;
}

/// Instantaneous covariation d(lambda, mu) d(lambda, mu)^T / dt, lambda first.
inline Eigen::MatrixXd quadratic_variation_analytic(const InterlacedPair& p, double beta) {
  detail::require(p.strict(), "quadratic variation needs strict interlacing");
  const std::size_t n = p.n();
  const auto& lam = p.lambda().values();
  const auto& mu = p.mu().values();
  const double k2 = 2.0 / beta;
  const auto m = static_cast<Eigen::Index>(2 * n - 1);
  Eigen::MatrixXd q = k2 * Eigen::MatrixXd::Identity(m, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j + 1 < n; ++j) {
      double num = 1.0;
      for (std::size_t k = 0; k + 1 < n; ++k)
        if (k != j) num *= lam[i] - mu[k];
      for (std::size_t k = 0; k < n; ++k)
        if (k != i) num *= mu[j] - lam[k];
      const double c = k2 * num / (poly_derivative_at_root(lam, i) * poly_derivative_at_root(mu, j));
      q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n + j)) = c;
      q(static_cast<Eigen::Index>(n + j), static_cast<Eigen::Index>(i)) = c;
    }
  return q;
}

/// Cross block in the first printed form: (2/beta) P_{n-1}(lambda_i)/P'_n(lambda_i) (r_j/(lambda_i-mu_j))^2.
inline double cross_variation_residue_form(const InterlacedPair& p, double beta, std::size_t i,
                                           std::size_t j) {
  const BorderWeights w = r_from_spectra(p);
  const double v = w.r[j] / (p.lambda()[i] - p.mu()[j]);
  return 2.0 / beta * lambda_prefactor(p.lambda().values(), p.mu().values(), i) * v * v;
}

struct GapDrift {
  double lower = 0.0;  // drift of mu_i - lambda_i
  double upper = 0.0;  // drift of lambda_{i+1} - mu_i
};

/// Drifts of the two gaps around mu_i (0-based i < n-1) as differences of Dyson drifts.
/// Valid on the boundary mu_i = lambda_i or mu_i = lambda_{i+1}.
inline GapDrift gap_drift(const InterlacedPair& p, std::size_t i) {
  detail::require(i + 1 < p.n(), "gap index out of range");
  const auto& lam = p.lambda().values();
  const auto& mu = p.mu().values();
  const double dmu = dyson_drift(mu, i);
  return {dmu - dyson_drift(lam, i), dyson_drift(lam, i + 1) - dmu};
}

/// Closed form of the lower gap drift when mu_i = lambda_i:
/// sum_{j != i} (mu_j - lambda_j)/((lambda_i - mu_j)(lambda_i - lambda_j)) + 1/(lambda_n - lambda_i).
/// `mu` is read except at index i.
inline double collapsed_gap_drift(std::span<const double> lambda, std::span<const double> mu,
                                  std::size_t i) {
  const std::size_t n = lambda.size();
  detail::require(mu.size() + 1 == n && i + 1 < n, "bad collapsed configuration");
  const double x = lambda[i];
  double f = 1.0 / (lambda[n - 1] - x);
  for (std::size_t j = 0; j + 1 < n; ++j)
    if (j != i) f += (mu[j] - lambda[j]) / ((x - mu[j]) * (x - lambda[j]));
  return f;
}

/// Same for the upper gap when mu_i = lambda_{i+1}, by the reflection x -> -x.
inline double collapsed_upper_gap_drift(std::span<const double> lambda, std::span<const double> mu,
                                        std::size_t i) {
  const std::size_t n = lambda.size();
  std::vector<double> rl(n), rm(n - 1);
  for (std::size_t k = 0; k < n; ++k) rl[k] = -lambda[n - 1 - k];
  for (std::size_t k = 0; k + 1 < n; ++k) rm[k] = -mu[n - 2 - k];
  return collapsed_gap_drift(rl, rm, n - 2 - i);
}

}  // namespace minor_dyson
