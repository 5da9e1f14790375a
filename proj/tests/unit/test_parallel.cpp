#include <gtest/gtest.h>

#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "minor_dyson/core/parallel.hpp"
#include "minor_dyson/core/rng.hpp"

namespace md = minor_dyson;

namespace {

std::vector<double> draw(unsigned workers) {
  std::vector<double> out(5000);
  md::parallel_for(out.size(), workers, [&](std::size_t i) {
    md::RandomStream r(11, i, md::StreamPurpose::kTrials);
    out[i] = r.normal();
  }, 64);
  return out;
}

}  // namespace

TEST(ParallelFor, ResultsIndependentOfWorkerCount) {
  const auto a = draw(1);
  const auto b = draw(3);
  const auto c = draw(8);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  EXPECT_EQ(md::pairwise_sum(a), md::pairwise_sum(c));
}

TEST(ParallelFor, RethrowsLowestFailingIndex) {
  try {
    md::parallel_for(1000, 4, [](std::size_t i) {
      if (i == 700 || i == 300) throw std::runtime_error(std::to_string(i));
    }, 16);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "300");
  }
}

TEST(TreeReduce, MatchesSum) {
  std::vector<double> v(1001);
  std::iota(v.begin(), v.end(), 0.0);
  EXPECT_DOUBLE_EQ(md::pairwise_sum(v), 500500.0);
  EXPECT_EQ(md::pairwise_sum(std::vector<double>{}), 0.0);
}

TEST(ResolveWorkers, FlagThenEnvironment) {
  EXPECT_EQ(md::resolve_workers(3u), 3u);
  ::setenv("MINOR_DYSON_WORKERS", "5", 1);
  EXPECT_EQ(md::resolve_workers(), 5u);
  ::setenv("MINOR_DYSON_WORKERS", "bogus", 1);
  EXPECT_THROW(md::resolve_workers(), md::InvalidInput);
  ::unsetenv("MINOR_DYSON_WORKERS");
  EXPECT_GE(md::resolve_workers(), 1u);
}
