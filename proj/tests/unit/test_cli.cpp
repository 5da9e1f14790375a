#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "minor_dyson/cli/app.hpp"

namespace md = minor_dyson;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  fs::path p = fs::temp_directory_path() / (std::string("minor_dyson_cli_") + info->test_suite_name() + "_" + info->name());
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "minor-dyson");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = md::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

md::io::Json report(const fs::path& dir) { return md::io::Json::parse(slurp(dir / "report.json")); }

}  // namespace

TEST(Cli, VerifyIdentitiesExample) {
  const auto dir = scratch();
  ASSERT_EQ(run({"verify-identities", "--n", "4", "--beta", "2", "--trials", "1000", "--seed", "7", "--out", dir.string()}), 0);
  const auto j = report(dir);
  EXPECT_TRUE(j["pass"].get<bool>());
  int residuals = 0;
  for (const auto& s : j["statistics"]) {
    const auto name = s["name"].get<std::string>();
    if (name.starts_with("identities.max_")) {
      EXPECT_LT(s["value"].get<double>(), 1e-8) << name;
      ++residuals;
    }
  }
  EXPECT_EQ(residuals, 5);
  EXPECT_EQ(j["config"]["n"], 4);
  EXPECT_EQ(j["config"]["trials"], 1000);
  EXPECT_EQ(j["provenance"]["seed"], 7);
  EXPECT_EQ(j["config"]["command"], "verify-identities");
}

TEST(Cli, SimulateSpectralNonClassicalBeta) {
  const auto dir = scratch();
  ASSERT_EQ(run({"simulate-spectral", "--n", "3", "--beta", "2.5", "--t", "1", "--paths", "100", "--out", dir.string()}), 0);
  const std::string csv = slurp(dir / "paths.csv");
  EXPECT_EQ(csv.rfind("path,t,kind,index,value\n", 0), 0u);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  // 100 paths, times {0, 1}, five coordinates each, plus the header.
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 100 * 2 * 5 + 1);
  EXPECT_NE(csv.find(",lam,"), std::string::npos);
  EXPECT_NE(csv.find(",mu,"), std::string::npos);
  const auto j = report(dir);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(j["tests"][0]["name"], "interlacing_violations");
  EXPECT_EQ(j["tests"][0]["p"], nullptr);
}

TEST(Cli, FrameMatchesCsv) {
  const auto dir = scratch();
  ASSERT_EQ(run({"simulate-spectral", "--n", "2", "--beta", "1", "--t", "0.2", "--record-dt", "0.1", "--paths", "3",
                 "--format", "both", "--out", dir.string()}),
            0);
  std::ifstream fin(dir / "paths.frame", std::ios::binary);
  const md::io::Frame f = md::io::read_frame(fin);
  EXPECT_EQ(f.header.kind, md::io::FrameKind::kSpectral);
  EXPECT_EQ(f.header.paths, 3u);
  EXPECT_EQ(f.header.times, 3u);
  EXPECT_EQ(f.header.width, 3u);
  EXPECT_EQ(fs::file_size(dir / "paths.frame"), 64u + 9u * 4u * 8u);
  std::istringstream csv(slurp(dir / "paths.csv"));
  std::string line;
  std::getline(csv, line);
  for (std::uint64_t p = 0; p < 3; ++p)
    for (std::uint64_t k = 0; k < 3; ++k)
      for (std::size_t c = 0; c < 3; ++c) {
        ASSERT_TRUE(std::getline(csv, line));
        const double v = std::stod(line.substr(line.rfind(',') + 1));
        EXPECT_EQ(v, f.at(p, k).values[c]);
      }
  EXPECT_DOUBLE_EQ(f.at(1, 2).t, 0.2);
}

TEST(Cli, MatrixFrameHoldsParameters) {
  const auto dir = scratch();
  ASSERT_EQ(run({"simulate-matrix", "--n", "2", "--beta", "4", "--paths", "2", "--format", "frame", "--out", dir.string()}), 0);
  std::ifstream fin(dir / "paths.frame", std::ios::binary);
  const md::io::Frame f = md::io::read_frame(fin);
  EXPECT_EQ(f.header.kind, md::io::FrameKind::kMatrix);
  EXPECT_EQ(f.header.width, 6u);  // two diagonal entries + one quaternion
  const auto b0 = md::default_initial_matrix(2, md::Beta::kQuaternion).parameters();
  for (std::size_t i = 0; i < b0.size(); ++i) EXPECT_EQ(f.at(1, 0).values[i], b0[i]);
  EXPECT_FALSE(fs::exists(dir / "paths.csv"));
}

TEST(Cli, ReportsAreByteIdentical) {
  const auto a = scratch() / "a", b = a.parent_path() / "b", c = a.parent_path() / "c";
  const std::vector<std::string> base = {"witness-nonmarkov", "--paths", "20000", "--seed", "3", "--workers", "2"};
  auto with = [&](const fs::path& d) {
    auto v = base;
    v.insert(v.end(), {"--out", d.string()});
    return v;
  };
  ASSERT_EQ(run(with(a)), 0);
  ASSERT_EQ(run(with(b)), 0);
  EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json"));
  // A different worker count changes only the recorded worker count.
  auto v = with(c);
  v[6] = "1";
  ASSERT_EQ(run(v), 0);
  auto ja = report(a), jc = report(c);
  EXPECT_EQ(ja["statistics"], jc["statistics"]);
  EXPECT_EQ(jc["config"]["workers"], 1);
}

TEST(Cli, ConfigFileAndOverrides) {
  const auto dir = scratch();
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "# identities only\ncommand = verify-identities\nwhich=identities\nn = 3\ntrials=5\nseed=11\n";
  }
  ASSERT_EQ(run({"verify-identities", "--config", (dir / "run.cfg").string(), "--trials", "7", "--out", dir.string()}), 0);
  const auto j = report(dir);
  EXPECT_EQ(j["name"], "identity_trials");
  EXPECT_EQ(j["config"]["trials"], 7);
  EXPECT_EQ(j["config"]["seed"], 11);
  EXPECT_EQ(j["config"]["n"], 3);

  std::string err;
  {
    std::ofstream cfg(dir / "bad.cfg");
    cfg << "trails=5\n";
  }
  EXPECT_EQ(run({"verify-identities", "--config", (dir / "bad.cfg").string(), "--out", dir.string()}, &err), 2);
  EXPECT_NE(err.find("trails"), std::string::npos);
  {
    std::ofstream cfg(dir / "other.cfg");
    cfg << "command=compare-paths\n";
  }
  EXPECT_EQ(run({"verify-identities", "--config", (dir / "other.cfg").string(), "--out", dir.string()}), 2);
  {
    std::ofstream cfg(dir / "noeq.cfg");
    cfg << "trials 5\n";
  }
  EXPECT_EQ(run({"verify-identities", "--config", (dir / "noeq.cfg").string(), "--out", dir.string()}), 2);
  EXPECT_EQ(run({"verify-identities", "--config", (dir / "missing.cfg").string(), "--out", dir.string()}), 2);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch();
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"no-such-command"}), 2);
  EXPECT_EQ(run({"verify-identities", "--bogus", "1"}), 2);
  EXPECT_EQ(run({"verify-identities", "--trials", "abc"}), 2);
  EXPECT_EQ(run({"simulate-matrix", "--beta", "3", "--out", dir.string()}), 2);
  EXPECT_EQ(run({"verify-identities", "--which", "everything", "--out", dir.string()}), 2);
  EXPECT_EQ(run({"verify-identities", "--help"}), 0);
  // A tolerance no residual can meet is a test failure, not an error.
  EXPECT_EQ(run({"verify-identities", "--which", "identities", "--trials", "10", "--tol-identity", "1e-300",
                 "--out", dir.string()}),
            1);
  EXPECT_FALSE(report(dir)["pass"].get<bool>());

  EXPECT_EQ(md::cli::exit_code_for(md::NumericalFailure("x")), 3);
  EXPECT_EQ(md::cli::exit_code_for(md::StepFailure("x", {0.0, 1.0}, {0.5}, 0.0)), 3);
  EXPECT_EQ(md::cli::exit_code_for(md::DegenerateSpectrum("x")), 3);
  EXPECT_EQ(md::cli::exit_code_for(md::InvalidInput("x")), 2);
  EXPECT_EQ(md::cli::exit_code_for(md::DomainError("x")), 2);
  EXPECT_EQ(md::cli::exit_code_for(md::InfeasibleGauge("x")), 2);
}

TEST(Cli, InfeasibleGaugeIsUsageError) {
  const auto dir = scratch();
  // A random beta = 2 triple whose admissible cos(s) interval misses one end.
  md::RandomStream rng(5, 0);
  md::TripleSpectra t;
  std::array<double, 2> range{-1.0, 1.0};
  for (int k = 0; k < 1000 && range[0] < -0.9 && range[1] > 0.9; ++k) {
    t = md::spectral_triple(md::sample_gaussian_ensemble(3, md::Beta::kComplex, rng));
    range = md::TripleConstraints(t).admissible_cos_range();
  }
  ASSERT_TRUE(range[0] >= -0.9 || range[1] <= 0.9);
  const double bad = range[0] > -1.0 ? std::numbers::pi : 0.0;
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : ",") + md::io::format_double(x);
    return s;
  };
  std::string err;
  EXPECT_EQ(run({"witness-nonmarkov", "--lambda", list(t.lambda), "--mu", list(t.mu), "--nu", list(t.nu), "--s1",
                 std::to_string(bad), "--paths", "100", "--out", dir.string()},
                &err),
            2);
  EXPECT_NE(err.find("admissible"), std::string::npos);
  EXPECT_EQ(run({"witness-nonmarkov", "--lambda", "1,2", "--out", dir.string()}), 2);
}

TEST(Cli, DensityGrid) {
  const auto dir = scratch();
  ASSERT_EQ(run({"density-grid", "--kind", "invariant-lambda", "--n", "2", "--beta", "2", "--points", "81", "--out",
                 dir.string()}),
            0);
  const std::string csv = slurp(dir / "density.csv");
  EXPECT_EQ(csv.rfind("lambda1,lambda2,density\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 81 * 81 + 1);
  const auto j = report(dir);
  EXPECT_NEAR(j["statistics"][0]["value"].get<double>(), 1.0, 1e-3);
  ASSERT_EQ(run({"density-grid", "--kind", "transition", "--t", "0.5", "--points", "61", "--out", dir.string()}), 0);
  EXPECT_NEAR(report(dir)["statistics"][0]["value"].get<double>(), 1.0, 1e-2);
  // Coarse Riemann sum: cell boundaries are counted at full weight.
  ASSERT_EQ(run({"density-grid", "--kind", "invariant-pair", "--points", "41", "--out", dir.string()}), 0);
  EXPECT_NEAR(report(dir)["statistics"][0]["value"].get<double>(), 1.0, 0.25);
  EXPECT_EQ(run({"density-grid", "--kind", "transition", "--beta", "1", "--out", dir.string()}), 2);
}

TEST(Cli, ComparePathsSmall) {
  const auto dir = scratch();
  EXPECT_EQ(run({"compare-paths", "--n", "2", "--beta", "2", "--paths", "5000", "--qv-draws", "20000", "--out",
                 dir.string()}),
            0);
  EXPECT_EQ(report(dir)["name"], "path_equivalence");
}

TEST(Cli, VerifyGeneratorAndInvariant) {
  const auto dir = scratch();
  EXPECT_EQ(run({"verify-generator", "--trials", "10", "--out", dir.string()}), 0);
  EXPECT_EQ(run({"verify-invariant", "--out", dir.string()}), 0);
  const auto j = report(dir);
  EXPECT_EQ(j["name"], "normalization");
}
