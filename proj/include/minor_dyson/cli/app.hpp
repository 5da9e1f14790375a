#pragma once

// Command-line front end. Every subcommand writes report.json into --out; the simulation and
// density commands also write paths.csv / paths.frame / density.csv. Options may come from a
// flat key=value file given by --config; flags on the command line override it.
//
// Exit codes: 0 all tests passed, 1 some test failed, 2 usage error, 3 numerical failure.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "minor_dyson/io.hpp"
#include "minor_dyson/verification.hpp"

namespace minor_dyson::cli {

enum ExitCode : int { kExitPass = 0, kExitTestFailure = 1, kExitUsage = 2, kExitNumerical = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using io::Json;

inline Json json_value(double v) { return io::number(v); }
inline Json json_value(const std::string& v) { return v; }
template <class T>
  requires std::is_integral_v<T>
Json json_value(T v) {
  return v;
}

/// Options of one subcommand, remembered in declaration order so the resolved values can be
/// embedded in the report.
class Options {
 public:
  explicit Options(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& name, T& ref, const std::string& help) {
    values_.emplace_back(name, [&ref] { return json_value(ref); });
    return app_->add_option("--" + name, ref, help)->capture_default_str();
  }
  /// Recorded under `name` but not registered as a flag (derived values such as workers).
  void record(const std::string& name, std::function<Json()> get) { values_.emplace_back(name, std::move(get)); }

  Json resolved(const std::string& command) const {
    Json j = Json::object();
    j["command"] = command;
    for (const auto& [name, get] : values_) j[name] = get();
    return j;
  }

 private:
  CLI::App* app_;
  std::vector<std::pair<std::string, std::function<Json()>>> values_;
};

inline std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(what + ": cannot parse '" + item + "' as a number");
    }
  }
  return out;
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

/// key=value lines; '#' and ';' start comments. Duplicate keys keep the last value.
inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(number) + ": expected key=value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.size() > 2 && key.rfind("--", 0) == 0) key = key.substr(2);
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw UsageError(path + ":" + std::to_string(number) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

inline std::vector<double> time_grid(double t, double record_dt) {
  if (!(t >= 0.0)) throw InvalidInput("t must be nonnegative");
  std::vector<double> grid{0.0};
  if (t == 0.0) return grid;
  const double step = record_dt > 0.0 ? record_dt : t;
  const auto k = static_cast<std::uint64_t>(std::ceil(t / step - 1e-9));
  for (std::uint64_t i = 1; i <= k; ++i) grid.push_back(std::min(t, static_cast<double>(i) * step));
  return grid;
}

inline std::ofstream open_output(const std::filesystem::path& p, bool binary = false) {
  std::ofstream os(p, binary ? std::ios::binary : std::ios::out);
  if (!os) throw UsageError("cannot write " + p.string());
  return os;
}

inline Branch parse_branch(const std::string& s) {
  if (s == "plus" || s == "+") return Branch::kPlus;
  if (s == "minus" || s == "-") return Branch::kMinus;
  throw UsageError("branch must be plus or minus");
}

inline Coupling parse_coupling(const std::string& s) {
  if (s == "shared") return Coupling::kShared;
  if (s == "independent") return Coupling::kIndependent;
  throw UsageError("coupling must be shared or independent");
}

inline void check_format(const std::string& f) {
  if (f != "csv" && f != "frame" && f != "both") throw UsageError("format must be csv, frame or both");
}

}  // namespace detail

/// Rejected requests (bad flags, inadmissible parameters, infeasible gauges) are usage errors;
/// anything that fails while computing is a numerical failure.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericalFailure*>(&e)) return kExitNumerical;
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const CLI::Error*>(&e) || dynamic_cast<const Error*>(&e))
    return kExitUsage;
  return kExitNumerical;
}

/// Parses argv, runs one subcommand and returns its exit code. Diagnostics go to `err`, the
/// one-line summary to `out`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using detail::Json;
  CLI::App app{"Dyson matrix OU process and interlacing minor spectra"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", std::string(MINOR_DYSON_VERSION));

  struct Common {
    std::uint64_t seed = 1;
    unsigned workers = 0;
    std::string out = ".";
    std::string config;
  };
  struct Command {
    CLI::App* app = nullptr;
    std::unique_ptr<detail::Options> opts;
    Common common;
    // Runs the command; returns the report. `dir` is the output directory.
    std::function<ExperimentReport(const std::filesystem::path& dir, unsigned workers)> body;
  };
  std::map<std::string, Command> commands;

  auto make = [&](const std::string& name, const std::string& help) -> Command& {
    Command& c = commands[name];
    c.app = app.add_subcommand(name, help);
    c.app->set_help_flag("--help", "print this help message and exit");  // -h would clash with --h
    c.opts = std::make_unique<detail::Options>(c.app);
    c.opts->add("seed", c.common.seed, "master seed");
    c.app->add_option("--workers", c.common.workers, "worker threads (0: MINOR_DYSON_WORKERS or hardware)")
        ->capture_default_str();
    c.app->add_option("--out", c.common.out, "output directory")->capture_default_str();
    c.app->add_option("--config", c.common.config, "flat key=value file; flags override it");
    return c;
  };

  // simulate-matrix
  struct {
    std::size_t n = 3;
    double beta = 2.0, t = 1.0, record_dt = 0.0;
    std::uint64_t paths = 10;
    std::string format = "csv";
  } sm;
  {
    Command& c = make("simulate-matrix", "exact OU matrix paths of the Gaussian ensembles");
    c.opts->add("n", sm.n, "matrix size");
    c.opts->add("beta", sm.beta, "1, 2 or 4");
    c.opts->add("t", sm.t, "final time");
    c.opts->add("record-dt", sm.record_dt, "recording interval (0: endpoints only)");
    c.opts->add("paths", sm.paths, "number of paths");
    c.opts->add("format", sm.format, "csv, frame or both");
    c.body = [&](const std::filesystem::path& dir, unsigned workers) {
      detail::check_format(sm.format);
      if (sm.n < 1 || sm.paths < 1) throw InvalidInput("n and paths must be at least 1");
      const Beta beta = to_beta(sm.beta);
      MatrixPathConfig mc;
      mc.n = sm.n;
      mc.beta = beta;
      mc.t_grid = detail::time_grid(sm.t, sm.record_dt);
      mc.seed = c.common.seed;
      mc.paths = sm.paths;
      mc.validate();
      const SelfAdjointMatrix b0 = sm.n >= 2 ? default_initial_matrix(sm.n, beta)
                                             : SelfAdjointMatrix::diagonal(beta, {0.5});
      std::vector<std::vector<SelfAdjointMatrix>> paths(sm.paths);
      parallel_for(sm.paths, workers, [&](std::size_t k) { paths[k] = ou_path(b0, mc, k); });
      if (sm.format != "frame") {
        std::ofstream os = detail::open_output(dir / "paths.csv");
        io::MatrixPathCsv csv(os);
        for (std::size_t k = 0; k < paths.size(); ++k)
          for (std::size_t i = 0; i < mc.t_grid.size(); ++i) csv.write(k, mc.t_grid[i], paths[k][i]);
      }
      if (sm.format != "csv") {
        std::ofstream os = detail::open_output(dir / "paths.frame", true);
        io::FrameWriter fw(os, {io::FrameKind::kMatrix, sm.beta, sm.n, sm.paths, mc.t_grid.size(),
                                SelfAdjointMatrix::parameter_count(beta, sm.n)});
        for (std::size_t k = 0; k < paths.size(); ++k)
          for (std::size_t i = 0; i < mc.t_grid.size(); ++i) fw.write(mc.t_grid[i], paths[k][i].parameters());
      }
      ExperimentReport rep;
      rep.name = "simulate_matrix";
      rep.param("n", static_cast<std::int64_t>(sm.n));
      rep.param("beta", sm.beta);
      rep.param("t", sm.t);
      rep.param("times", static_cast<std::int64_t>(mc.t_grid.size()));
      rep.provenance = {c.common.seed, sm.record_dt, sm.paths,
                        config_digest("simulate_matrix " + c.opts->resolved("simulate-matrix").dump())};
      auto trace_square = [&](const SelfAdjointMatrix& b) {
        const std::vector<double> p = b.parameters();
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) s += (i < sm.n ? 1.0 : 2.0) * p[i] * p[i];
        return s;
      };
      MeanAccumulator tr2;
      for (const auto& p : paths) tr2.add(trace_square(p.back()));
      const double tr0 = trace_square(b0);
      rep.stat("trace_square_final", tr2.mean(), tr2.stderr_mean());
      rep.stat("trace_square_expected", expected_trace_square(tr0, sm.n, sm.beta, sm.t));
      return rep;
    };
  }

  // simulate-spectral
  struct {
    std::size_t n = 3;
    double beta = 2.0, t = 1.0, dt = 1e-3, record_dt = 0.0;
    std::uint64_t paths = 10;
    std::string coupling = "shared", start = "balanced", format = "csv";
  } ss;
  {
    Command& c = make("simulate-spectral", "coupled (lambda, mu) SDE paths for any beta > 0");
    c.opts->add("n", ss.n, "size of the outer spectrum (n >= 2)");
    c.opts->add("beta", ss.beta, "any positive beta");
    c.opts->add("t", ss.t, "final time");
    c.opts->add("dt", ss.dt, "Euler step");
    c.opts->add("record-dt", ss.record_dt, "recording interval (0: endpoints only)");
    c.opts->add("paths", ss.paths, "number of paths");
    c.opts->add("coupling", ss.coupling, "shared or independent noise");
    c.opts->add("start", ss.start, "balanced (fixed symmetric) or invariant (random draw per path)");
    c.opts->add("format", ss.format, "csv, frame or both");
    c.body = [&](const std::filesystem::path& dir, unsigned workers) {
      detail::check_format(ss.format);
      const Coupling coupling = detail::parse_coupling(ss.coupling);
      if (ss.start != "balanced" && ss.start != "invariant") throw UsageError("start must be balanced or invariant");
      if (ss.n < 2 || ss.paths < 1) throw InvalidInput("simulate-spectral needs n >= 2 and paths >= 1");
      if (!(ss.beta > 0.0) || !(ss.dt > 0.0)) throw InvalidInput("beta and dt must be positive");
      const std::vector<double> grid = detail::time_grid(ss.t, ss.record_dt);
      const std::size_t m = 2 * ss.n - 1;
      std::vector<std::vector<double>> rec(ss.paths, std::vector<double>(grid.size() * m));
      std::vector<SdeDiagnostics> diags(ss.paths);
      const CoupledState balanced = balanced_start(ss.n, ss.beta);
      parallel_for(ss.paths, workers, [&](std::size_t k) {
        CoupledState s = balanced;
        if (ss.start == "invariant") {
          RandomStream init(c.common.seed, k, StreamPurpose::kInitialCondition);
          s = sample_invariant_pair(ss.n, ss.beta, init);
          regularize_initial(s);
        }
        CoupledStepper stepper(ss.n, ss.beta, coupling);
        RandomStream rng(c.common.seed, k, StreamPurpose::kSpectralPath);
        for (std::size_t i = 0; i < grid.size(); ++i) {
          if (i > 0) stepper.advance(s, grid[i] - grid[i - 1], ss.dt, rng, diags[k]);
          std::copy(s.lambda.begin(), s.lambda.end(), rec[k].begin() + static_cast<std::ptrdiff_t>(i * m));
          std::copy(s.mu.begin(), s.mu.end(), rec[k].begin() + static_cast<std::ptrdiff_t>(i * m + ss.n));
        }
      });
      if (ss.format != "frame") {
        std::ofstream os = detail::open_output(dir / "paths.csv");
        io::SpectralPathCsv csv(os);
        for (std::size_t k = 0; k < ss.paths; ++k)
          for (std::size_t i = 0; i < grid.size(); ++i) {
            const double* r = rec[k].data() + i * m;
            csv.write(k, grid[i], std::span<const double>(r, ss.n), std::span<const double>(r + ss.n, ss.n - 1));
          }
      }
      if (ss.format != "csv") {
        std::ofstream os = detail::open_output(dir / "paths.frame", true);
        io::FrameWriter fw(os, {io::FrameKind::kSpectral, ss.beta, ss.n, ss.paths, grid.size(), m});
        for (std::size_t k = 0; k < ss.paths; ++k)
          for (std::size_t i = 0; i < grid.size(); ++i)
            fw.write(grid[i], std::span<const double>(rec[k].data() + i * m, m));
      }
      SdeDiagnostics total;
      for (const auto& d : diags) total += d;
      ExperimentReport rep;
      rep.name = "simulate_spectral";
      rep.param("n", static_cast<std::int64_t>(ss.n));
      rep.param("beta", ss.beta);
      rep.param("t", ss.t);
      rep.param("times", static_cast<std::int64_t>(grid.size()));
      rep.provenance = {c.common.seed, ss.dt, ss.paths,
                        config_digest("simulate_spectral " + c.opts->resolved("simulate-spectral").dump())};
      MeanAccumulator sl, sm2;
      for (const auto& r : rec) {
        const std::span<const double> lam(r.data() + (grid.size() - 1) * m, ss.n);
        sl.add(minor_dyson::detail::sum(lam));
        sm2.add(minor_dyson::detail::sum_sq(lam));
      }
      rep.stat("sum_lambda_final", sl.mean(), sl.stderr_mean());
      rep.stat("sum_lambda_sq_final", sm2.mean(), sm2.stderr_mean());
      rep.stat("accepted_steps", static_cast<double>(total.accepted));
      rep.stat("halvings", static_cast<double>(total.halvings));
      rep.stat("resamples", static_cast<double>(total.resamples));
      rep.check_below("interlacing_violations", static_cast<double>(total.violations), 0.0);
      return rep;
    };
  }

  // verify-identities
  struct {
    std::string which = "all";
    std::size_t n = 0, n_max = 6;
    double beta = 0.0;
    std::uint64_t trials = 1000;
    double tol_identity = 1e-8, tol_jacobian = 1e-5, tol_quaternion = 1e-8, tol_bordered = 1e-10, tol_r = 1e-9;
  } vi;
  {
    Command& c = make("verify-identities", "interlacing identities, Jacobian, quaternion determinant, bordered form");
    c.opts->add("which", vi.which, "identities, jacobian, quaternion, bordered or all");
    c.opts->add("n", vi.n, "fixed size (0: cycle 2..n-max)");
    c.opts->add("n-max", vi.n_max, "largest size when cycling");
    c.opts->add("beta", vi.beta, "fixed beta (0: cycle 1, 2, 4)");
    c.opts->add("trials", vi.trials, "random inputs per check");
    c.opts->add("tol-identity", vi.tol_identity, "max relative residual of the identities");
    c.opts->add("tol-jacobian", vi.tol_jacobian, "max relative Jacobian error");
    c.opts->add("tol-quaternion", vi.tol_quaternion, "max relative determinant error");
    c.opts->add("tol-bordered", vi.tol_bordered, "max entrywise round-trip error");
    c.opts->add("tol-r", vi.tol_r, "max border weight error");
    c.body = [&](const std::filesystem::path&, unsigned) {
      const std::vector<std::string> all = {"identities", "jacobian", "quaternion", "bordered"};
      if (vi.which != "all" && std::find(all.begin(), all.end(), vi.which) == all.end())
        throw UsageError("which must be identities, jacobian, quaternion, bordered or all");
      TrialConfig base;
      base.trials = vi.trials;
      base.seed = c.common.seed;
      if (vi.n) base.n = vi.n;
      base.n_max = vi.n_max;
      if (vi.beta != 0.0) base.beta = vi.beta;
      auto one = [&](const std::string& w) {
        TrialConfig cfg = base;
        if (w == "identities") {
          cfg.tolerance = vi.tol_identity;
          return identity_trials(cfg);
        }
        if (w == "jacobian") {
          cfg.tolerance = vi.tol_jacobian;
          return jacobian_trials(cfg);
        }
        if (w == "quaternion") {
          cfg.tolerance = vi.tol_quaternion;
          cfg.beta = 4.0;
          return quaternion_determinant_trials(cfg);
        }
        cfg.tolerance = vi.tol_bordered;
        if (cfg.beta && !is_classical_beta(*cfg.beta)) throw InvalidInput("bordered form needs beta in {1, 2, 4}");
        return bordered_round_trip_trials(cfg, vi.tol_r);
      };
      if (vi.which != "all") return one(vi.which);
      ExperimentReport rep;
      rep.name = "verify_identities";
      rep.param("trials", static_cast<std::int64_t>(vi.trials));
      rep.provenance = {c.common.seed, 0.0, vi.trials,
                        config_digest("verify_identities " + c.opts->resolved("verify-identities").dump())};
      for (const auto& w : all) rep.merge(one(w), w + ".");
      return rep;
    };
  }

  // verify-invariant
  struct {
    std::string which = "normalization";
    std::size_t n = 3;
    double beta = 2.0, t = 1.0, dt = 1e-3, shift = 0.0, alpha = 0.005, z_max = 3.0;
    std::uint64_t paths = 100000;
    std::string start = "-0.5,0.7", times = "0.1,1";
    double tol_lambda_mass = 1e-5, tol_pair_mass = 0.02, tol_transition_mass = 1e-5, tol_forward = 1e-3;
  } vv;
  {
    Command& c = make("verify-invariant", "normalization, transition density, stationarity, general-beta run");
    c.opts->add("which", vv.which, "normalization, transition, stationarity, general-beta or all");
    c.opts->add("n", vv.n, "size for stationarity and general-beta");
    c.opts->add("beta", vv.beta, "beta for stationarity and general-beta");
    c.opts->add("t", vv.t, "run length for stationarity and general-beta");
    c.opts->add("dt", vv.dt, "Euler step");
    c.opts->add("paths", vv.paths, "Monte Carlo paths");
    c.opts->add("shift", vv.shift, "stationarity: shift of the initial draw");
    c.opts->add("alpha", vv.alpha, "per-test level for KS tests");
    c.opts->add("z-max", vv.z_max, "moment tests: allowed standard errors");
    c.opts->add("start", vv.start, "transition: two starting eigenvalues (n = 2, beta = 2)");
    c.opts->add("times", vv.times, "transition: comparison times");
    c.opts->add("tol-lambda-mass", vv.tol_lambda_mass, "eigenvalue law mass tolerance");
    c.opts->add("tol-pair-mass", vv.tol_pair_mass, "pair law mass tolerance");
    c.opts->add("tol-transition-mass", vv.tol_transition_mass, "transition mass tolerance");
    c.opts->add("tol-forward", vv.tol_forward, "forward equation relative tolerance");
    c.body = [&](const std::filesystem::path&, unsigned workers) {
      const std::vector<std::string> all = {"normalization", "transition", "stationarity", "general-beta"};
      if (vv.which != "all" && std::find(all.begin(), all.end(), vv.which) == all.end())
        throw UsageError("which must be normalization, transition, stationarity, general-beta or all");
      auto one = [&](const std::string& w) {
        if (w == "normalization") {
          NormalizationConfig cfg;
          cfg.lambda_tolerance = vv.tol_lambda_mass;
          cfg.pair_tolerance = vv.tol_pair_mass;
          return normalization_report(cfg);
        }
        if (w == "transition") {
          TransitionConfig cfg;
          cfg.start = detail::parse_list(vv.start, "start");
          cfg.times = detail::parse_list(vv.times, "times");
          cfg.paths = vv.paths;
          cfg.seed = c.common.seed;
          cfg.dt = vv.dt;
          cfg.workers = workers;
          cfg.mass_tolerance = vv.tol_transition_mass;
          cfg.forward_tolerance = vv.tol_forward;
          return transition_report(cfg);
        }
        if (w == "stationarity") {
          StationarityConfig cfg;
          cfg.n = vv.n;
          cfg.beta = vv.beta;
          cfg.t = vv.t;
          cfg.paths = vv.paths;
          cfg.seed = c.common.seed;
          cfg.dt = vv.dt;
          cfg.shift = vv.shift;
          cfg.workers = workers;
          cfg.z_max = vv.z_max;
          return stationarity_experiment(cfg);
        }
        GeneralBetaConfig cfg;
        cfg.n = vv.n;
        cfg.beta = vv.beta;
        cfg.t = vv.t;
        cfg.paths = vv.paths;
        cfg.seed = c.common.seed;
        cfg.dt = vv.dt;
        cfg.workers = workers;
        cfg.alpha = vv.alpha;
        cfg.z_max = vv.z_max;
        return general_beta_experiment(cfg);
      };
      if (vv.which != "all") return one(vv.which);
      ExperimentReport rep;
      rep.name = "verify_invariant";
      rep.provenance = {c.common.seed, vv.dt, vv.paths,
                        config_digest("verify_invariant " + c.opts->resolved("verify-invariant").dump())};
      for (const auto& w : all) rep.merge(one(w), w + ".");
      return rep;
    };
  }

  // verify-generator
  struct {
    std::string which = "all";
    std::size_t n = 3;
    double beta = 2.0, h = 0.0, tol_generator = 1e-4, tol_eigen = 1e-3;
    std::uint64_t trials = 50;
  } vg;
  {
    Command& c = make("verify-generator", "forward operator at the invariant pair law; collapsed gap drifts");
    c.opts->add("which", vg.which, "generator, gap-drift or all");
    c.opts->add("n", vg.n, "size of the outer spectrum");
    c.opts->add("beta", vg.beta, "beta");
    c.opts->add("trials", vg.trials, "random points / configurations");
    c.opts->add("h", vg.h, "finite-difference step (0: default)");
    c.opts->add("tol-generator", vg.tol_generator, "max normalized residual");
    c.opts->add("tol-eigen", vg.tol_eigen, "eigen-relation tolerance (beta = 2)");
    c.body = [&](const std::filesystem::path&, unsigned) {
      if (vg.which != "generator" && vg.which != "gap-drift" && vg.which != "all")
        throw UsageError("which must be generator, gap-drift or all");
      GeneratorConfig gc;
      gc.n = vg.n;
      gc.beta = vg.beta;
      gc.points = vg.trials;
      gc.seed = c.common.seed;
      gc.h = vg.h;
      gc.tolerance = vg.tol_generator;
      gc.eigen_tolerance = vg.tol_eigen;
      TrialConfig tc;
      tc.trials = vg.trials;
      tc.seed = c.common.seed;
      tc.n_max = std::max<std::size_t>(vg.n, 2);
      if (vg.which == "generator") return generator_report(gc);
      if (vg.which == "gap-drift") return collapsed_gap_drift_trials(tc);
      ExperimentReport rep;
      rep.name = "verify_generator";
      rep.provenance = {c.common.seed, 0.0, vg.trials,
                        config_digest("verify_generator " + c.opts->resolved("verify-generator").dump())};
      rep.merge(generator_report(gc), "generator.");
      rep.merge(collapsed_gap_drift_trials(tc), "gap-drift.");
      return rep;
    };
  }

  // compare-paths
  struct {
    std::size_t n = 2;
    double beta = 1.0, t = 0.5, dt = 1e-3, alpha = 0.005, tol_qv = 0.05;
    std::uint64_t paths = 100000, qv_draws = 200000;
    std::string coupling = "shared";
  } cp;
  {
    Command& c = make("compare-paths", "matrix route against the coupled spectral SDE");
    c.opts->add("n", cp.n, "matrix size");
    c.opts->add("beta", cp.beta, "1, 2 or 4");
    c.opts->add("t", cp.t, "comparison time");
    c.opts->add("dt", cp.dt, "Euler step");
    c.opts->add("paths", cp.paths, "paths per route");
    c.opts->add("alpha", cp.alpha, "per-test KS level");
    c.opts->add("coupling", cp.coupling, "shared or independent noise");
    c.opts->add("qv-draws", cp.qv_draws, "increments for the cross covariation");
    c.opts->add("tol-qv", cp.tol_qv, "relative cross covariation tolerance");
    c.body = [&](const std::filesystem::path&, unsigned workers) {
      PathEquivalenceConfig cfg;
      cfg.n = cp.n;
      cfg.beta = cp.beta;
      cfg.t = cp.t;
      cfg.paths = cp.paths;
      cfg.seed = c.common.seed;
      cfg.dt = cp.dt;
      cfg.workers = workers;
      cfg.alpha = cp.alpha;
      cfg.coupling = detail::parse_coupling(cp.coupling);
      cfg.qv_draws = cp.qv_draws;
      cfg.qv_tolerance = cp.tol_qv;
      return path_equivalence_experiment(cfg);
    };
  }

  // witness-nonmarkov
  struct {
    std::uint64_t paths = 1000000;
    double h = 1e-3, s1 = 0.0, s2 = std::numbers::pi, eta1 = 0.0, eta2 = 0.0, z_max = 3.0, separation = 10.0;
    std::string branch = "plus", lambda, mu, nu;
  } wn;
  {
    Command& c = make("witness-nonmarkov", "drift of B_11 det B at two matrices with equal minor spectra");
    c.opts->add("paths", wn.paths, "Monte Carlo draws");
    c.opts->add("h", wn.h, "time step of the drift estimate");
    c.opts->add("s1", wn.s1, "first phase sum");
    c.opts->add("s2", wn.s2, "second phase sum");
    c.opts->add("eta1", wn.eta1, "free phase eta_1");
    c.opts->add("eta2", wn.eta2, "free phase eta_2");
    c.opts->add("branch", wn.branch, "plus (larger |B_23|) or minus");
    c.opts->add("z-max", wn.z_max, "allowed standard errors");
    c.opts->add("separation", wn.separation, "required |delta| in standard errors");
    c.opts->add("lambda", wn.lambda, "three eigenvalues of B (default: built-in example)");
    c.opts->add("mu", wn.mu, "two eigenvalues of the 2x2 minor");
    c.opts->add("nu", wn.nu, "the 1x1 minor");
    c.body = [&](const std::filesystem::path&, unsigned workers) {
      WitnessConfig cfg;
      const bool any = !wn.lambda.empty() || !wn.mu.empty() || !wn.nu.empty();
      if (any) {
        TripleSpectra t{detail::parse_list(wn.lambda, "lambda"), detail::parse_list(wn.mu, "mu"),
                        detail::parse_list(wn.nu, "nu")};
        if (t.lambda.size() != 3 || t.mu.size() != 2 || t.nu.size() != 1)
          throw UsageError("witness triple needs 3 lambda, 2 mu and 1 nu values");
        cfg.triple = std::move(t);
      }
      cfg.s1 = wn.s1;
      cfg.s2 = wn.s2;
      cfg.eta1 = wn.eta1;
      cfg.eta2 = wn.eta2;
      cfg.branch = detail::parse_branch(wn.branch);
      cfg.h = wn.h;
      cfg.paths = wn.paths;
      cfg.seed = c.common.seed;
      cfg.workers = workers;
      cfg.z_max = wn.z_max;
      cfg.separation = wn.separation;
      return nonmarkov_witness(cfg);
    };
  }

  // density-grid
  struct {
    std::string kind = "invariant-lambda", start = "-0.5,0.7";
    std::size_t n = 2, points = 101;
    double beta = 2.0, t = 1.0, lo = -4.0, hi = 4.0;
  } dg;
  {
    Command& c = make("density-grid", "tabulate a density on a regular grid");
    c.opts->add("kind", dg.kind, "invariant-lambda (n = 1, 2), invariant-pair (n = 2) or transition (n = 2, beta = 2)");
    c.opts->add("n", dg.n, "size");
    c.opts->add("beta", dg.beta, "beta");
    c.opts->add("t", dg.t, "transition: time");
    c.opts->add("start", dg.start, "transition: starting eigenvalues");
    c.opts->add("points", dg.points, "grid points per coordinate");
    c.opts->add("lo", dg.lo, "grid lower end");
    c.opts->add("hi", dg.hi, "grid upper end");
    c.body = [&](const std::filesystem::path& dir, unsigned) {
      if (dg.points < 2 || !(dg.hi > dg.lo)) throw InvalidInput("density grid needs points >= 2 and hi > lo");
      if (!(dg.beta > 0.0)) throw InvalidInput("beta must be positive");
      std::vector<std::string> coords;
      std::function<double(std::span<const double>)> dens;
      std::vector<double> start;
      if (dg.kind == "invariant-lambda") {
        if (dg.n != 1 && dg.n != 2) throw InvalidInput("invariant-lambda grid supports n = 1 or 2");
        for (std::size_t i = 0; i < dg.n; ++i) coords.push_back("lambda" + std::to_string(i + 1));
        dens = [&](std::span<const double> x) { return invariant_density_lambda(x, dg.beta); };
      } else if (dg.kind == "invariant-pair") {
        if (dg.n != 2) throw InvalidInput("invariant-pair grid supports n = 2");
        coords = {"lambda1", "mu1", "lambda2"};
        dens = [&](std::span<const double> x) {
          const double l[2] = {x[0], x[2]};
          if (!(x[0] <= x[1] && x[1] <= x[2])) return 0.0;
          return invariant_density_pair(std::span<const double>(l, 2), x.subspan(1, 1), dg.beta);
        };
      } else if (dg.kind == "transition") {
        if (dg.n != 2 || dg.beta != 2.0) throw InvalidInput("transition grid supports n = 2, beta = 2");
        if (!(dg.t > 0.0)) throw InvalidInput("transition grid needs t > 0");
        start = detail::parse_list(dg.start, "start");
        if (start.size() != 2) throw UsageError("start needs two values");
        coords = {"lambda1", "lambda2"};
        dens = [&](std::span<const double> x) { return transition_density_lambda(dg.t, start, x); };
      } else {
        throw UsageError("kind must be invariant-lambda, invariant-pair or transition");
      }
      const std::size_t k = coords.size();
      const double step = (dg.hi - dg.lo) / static_cast<double>(dg.points - 1);
      std::ofstream os = detail::open_output(dir / "density.csv");
      io::DensityGridCsv csv(os, coords);
      std::vector<std::size_t> idx(k, 0);
      std::vector<double> x(k);
      double mass = 0.0;
      for (;;) {
        for (std::size_t i = 0; i < k; ++i) x[i] = dg.lo + step * static_cast<double>(idx[i]);
        bool ordered = true;
        if (dg.kind != "invariant-pair")
          for (std::size_t i = 1; i < k; ++i) ordered = ordered && x[i - 1] <= x[i];
        const double d = ordered ? dens(x) : 0.0;
        csv.write(x, d);
        mass += d;
        std::size_t i = k;
        while (i > 0 && ++idx[i - 1] == dg.points) idx[--i] = 0;
        if (i == 0) break;
      }
      ExperimentReport rep;
      rep.name = "density_grid";
      rep.param("kind", dg.kind);
      rep.param("n", static_cast<std::int64_t>(dg.n));
      rep.param("beta", dg.beta);
      rep.param("points", static_cast<std::int64_t>(dg.points));
      rep.provenance = {c.common.seed, 0.0, 0, config_digest("density_grid " + c.opts->resolved("density-grid").dump())};
      rep.stat("grid_mass", mass * std::pow(step, static_cast<double>(k)));
      return rep;
    };
  }

  try {
    // --config: turn the file into leading flags so explicit flags win.
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string sub_name;
    if (!args.empty() && commands.count(args[0])) sub_name = args[0];
    std::string config_path;
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (!config_path.empty() && !sub_name.empty()) {
      Command& cmd = commands[sub_name];
      std::vector<std::string> injected{sub_name};
      for (const auto& [key, value] : detail::read_config_file(config_path)) {
        if (key == "command") {
          if (value != sub_name) throw UsageError("config is for command '" + value + "', not '" + sub_name + "'");
          continue;
        }
        if (key == "config" || cmd.app->get_option_no_throw("--" + key) == nullptr)
          throw UsageError("unknown config key '" + key + "' for " + sub_name);
        injected.push_back("--" + key);
        injected.push_back(value);
      }
      injected.insert(injected.end(), args.begin() + 1, args.end());
      args = std::move(injected);
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);

    for (auto& [name, cmd] : commands) {
      if (!cmd.app->parsed()) continue;
      const unsigned workers = resolve_workers(cmd.common.workers ? std::optional<unsigned>(cmd.common.workers)
                                                                  : std::nullopt);
      cmd.opts->record("workers", [workers] { return Json(workers); });
      const std::filesystem::path dir(cmd.common.out);
      std::error_code ec;
      std::filesystem::create_directories(dir, ec);
      if (ec) throw UsageError("cannot create output directory " + dir.string());
      const ExperimentReport rep = cmd.body(dir, workers);
      {
        std::ofstream os = detail::open_output(dir / "report.json");
        os << io::dump(rep, cmd.opts->resolved(name));
      }
      std::size_t passed = 0;
      for (const auto& t : rep.tests) passed += t.pass ? 1 : 0;
      out << name << ": " << (rep.pass() ? "PASS" : "FAIL") << " (" << passed << "/" << rep.tests.size()
          << " tests) -> " << (dir / "report.json").string() << "\n";
      for (const auto& t : rep.tests)
        if (!t.pass) err << "  failed: " << t.name << " statistic=" << t.statistic << " p=" << t.p << "\n";
      return rep.pass() ? kExitPass : kExitTestFailure;
    }
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitUsage;
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    err << (code == kExitUsage ? "usage error: " : "numerical failure: ") << e.what() << "\n";
    return code;
  }
}

}  // namespace minor_dyson::cli
