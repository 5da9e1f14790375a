#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace minor_dyson {

struct Statistic {
  std::string name;
  double value = 0.0;
  double stderr_ = std::numeric_limits<double>::quiet_NaN();  // NaN when not a Monte Carlo quantity
};

struct TestDecision {
  std::string name;
  double statistic = 0.0;
  double p = std::numeric_limits<double>::quiet_NaN();  // NaN for tolerance checks
  bool pass = false;
};

struct Provenance {
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::uint64_t paths = 0;
  std::string config_digest;
};

using ParamValue = std::variant<double, std::int64_t, std::string, bool>;

/// Outcome of a verification run: named statistics, test decisions and provenance.
struct ExperimentReport {
  std::string name;
  std::vector<std::pair<std::string, ParamValue>> params;
  std::vector<Statistic> statistics;
  std::vector<TestDecision> tests;
  Provenance provenance;

  void param(std::string key, ParamValue v) { params.emplace_back(std::move(key), std::move(v)); }
  void stat(std::string key, double value,
            double err = std::numeric_limits<double>::quiet_NaN()) {
    statistics.push_back({std::move(key), value, err});
  }
  /// Tolerance check: passes when `value` <= `tol` (NaN never passes).
  void check_below(std::string key, double value, double tol) {
    tests.push_back({std::move(key), value, std::numeric_limits<double>::quiet_NaN(),
                     value <= tol});
  }
  void check(std::string key, double statistic, bool ok) {
    tests.push_back({std::move(key), statistic, std::numeric_limits<double>::quiet_NaN(), ok});
  }
  /// Hypothesis test: passes when p > alpha.
  void test_p(std::string key, double statistic, double p, double alpha) {
    tests.push_back({std::move(key), statistic, p, p > alpha});
  }

  bool pass() const noexcept {
    for (const auto& t : tests)
      if (!t.pass) return false;
    return true;
  }

  const Statistic* find_stat(const std::string& key) const noexcept {
    for (const auto& s : statistics)
      if (s.name == key) return &s;
    return nullptr;
  }
  const TestDecision* find_test(const std::string& key) const noexcept {
    for (const auto& t : tests)
      if (t.name == key) return &t;
    return nullptr;
  }

  /// Appends the statistics and tests of `other`, prefixing their names.
  void merge(const ExperimentReport& other, const std::string& prefix) {
    for (auto s : other.statistics) {
      s.name = prefix + s.name;
      statistics.push_back(std::move(s));
    }
    for (auto t : other.tests) {
      t.name = prefix + t.name;
      tests.push_back(std::move(t));
    }
  }
};

}  // namespace minor_dyson
