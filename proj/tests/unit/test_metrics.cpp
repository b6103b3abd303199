#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "sfd/error.hpp"
#include "sfd/metrics.hpp"

using namespace sfd;
using namespace sfd::metrics;

namespace {

AccuracyMatrix from_table(const oracle::Table& t) {
  AccuracyMatrix m(t.size());
  for (std::size_t k = 1; k <= t.size(); ++k)
    for (std::size_t j = 1; j <= k; ++j) m.set(k, j, t[k - 1][j - 1]);
  return m;
}

oracle::Table random_table(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> size(1, 12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  oracle::Table t(size(rng));
  for (std::size_t k = 0; k < t.size(); ++k)
    for (std::size_t j = 0; j <= k; ++j) t[k].push_back(u(rng));
  return t;
}

}  // namespace

TEST(AccuracyMatrix, TriangleAndRange) {
  AccuracyMatrix m(3);
  EXPECT_EQ(m.task_count(), 3u);
  EXPECT_EQ(m.row(2).size(), 2u);
  m.set(3, 1, 0.25);
  EXPECT_EQ(m.at(3, 1), 0.25);
  EXPECT_THROW(m.set(1, 2, 0.5), InvalidInput);
  EXPECT_THROW(m.set(4, 1, 0.5), InvalidInput);
  EXPECT_THROW(m.set(2, 0, 0.5), InvalidInput);
  EXPECT_THROW(m.set(2, 1, 1.5), InvalidInput);
  EXPECT_THROW(m.set(2, 1, -0.1), InvalidInput);
  EXPECT_THROW(m.at(2, 3), InvalidInput);
}

TEST(AverageAccuracy, Examples) {
  const auto m = from_table({{0.3}, {0.8, 0.6}});
  EXPECT_EQ(avg_incremental_accuracy(m, 1), 0.3);
  EXPECT_DOUBLE_EQ(avg_incremental_accuracy(m, 2), 0.7);
  EXPECT_THROW(avg_incremental_accuracy(m, 0), InvalidInput);
  EXPECT_THROW(avg_incremental_accuracy(m, 3), InvalidInput);

  const auto constant = from_table({{0.4}, {0.4, 0.4}, {0.4, 0.4, 0.4}});
  for (double a : accuracy_series(constant)) EXPECT_DOUBLE_EQ(a, 0.4);
}

TEST(AverageForgetting, Examples) {
  const auto m = from_table({{0.9}, {0.8, 0.7}});
  EXPECT_EQ(avg_forgetting(m, 2), 0.9 - 0.8);
  EXPECT_DOUBLE_EQ(avg_forgetting(m, 2), 0.1);
  EXPECT_THROW(avg_forgetting(m, 1), InvalidInput);
  EXPECT_THROW(avg_forgetting(m, 3), InvalidInput);

  const auto constant = from_table({{0.4}, {0.4, 0.4}, {0.4, 0.4, 0.4}});
  for (double f : forgetting_series(constant)) EXPECT_EQ(f, 0.0);

  // Accuracy that only improves gives negative forgetting, left unclamped.
  const auto improving = from_table({{0.2}, {0.5, 0.6}, {0.9, 0.8, 0.7}});
  EXPECT_LT(avg_forgetting(improving, 2), 0.0);
  EXPECT_DOUBLE_EQ(avg_forgetting(improving, 3), ((0.5 - 0.9) + (0.6 - 0.8)) / 2.0);
}

TEST(AverageForgetting, UsesWorstHistoricalDrop) {
  const auto m = from_table({{0.9}, {0.5, 0.8}, {0.6, 0.8, 1.0}});
  // Task 1 peaked at 0.9, task 2 at 0.8.
  EXPECT_DOUBLE_EQ(avg_forgetting(m, 3), ((0.9 - 0.6) + (0.8 - 0.8)) / 2.0);
}

TEST(Series, Lengths) {
  const auto m = from_table({{1.0}, {0.5, 0.5}, {0.1, 0.2, 0.3}, {0.4, 0.4, 0.4, 0.4}});
  EXPECT_EQ(accuracy_series(m).size(), 4u);
  EXPECT_EQ(forgetting_series(m).size(), 3u);
  EXPECT_TRUE(forgetting_series(AccuracyMatrix(1)).empty());
}

TEST(Metrics, MatchBruteForceOnRandomMatrices) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto t = random_table(rng);
    const auto m = from_table(t);
    for (std::size_t k = 1; k <= t.size(); ++k) {
      const double a = avg_incremental_accuracy(m, k);
      EXPECT_NEAR(a, oracle::avg_accuracy(t, k), 1e-12);
      EXPECT_GE(a, 0.0);
      EXPECT_LE(a, 1.0);
      if (k < 2) continue;
      const double f = avg_forgetting(m, k);
      EXPECT_NEAR(f, oracle::avg_forgetting(t, k), 1e-12);
      EXPECT_GE(f, -1.0);
      EXPECT_LE(f, 1.0);
    }
  }
}
