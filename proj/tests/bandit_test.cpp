#include <gtest/gtest.h>

#include <cmath>

#include "vetl/bandit.hpp"

using namespace vetl;
using namespace vetl::bandit;

namespace {
ElementKey k(const char* s) { return ElementKey{s}; }
}  // namespace

TEST(Bandit, UpdateSpotChecks) {
  BanditTables t;
  update(t, k("a"), 5);
  EXPECT_EQ(t.q(k("a")), 5.0);
  EXPECT_EQ(t.count(k("a")), 1u);

  t.set(k("b"), 2.0, 3);
  update(t, k("b"), 6);
  EXPECT_EQ(t.q(k("b")), 3.0);
  EXPECT_EQ(t.count(k("b")), 4u);
  EXPECT_EQ(t.q(k("a")), 5.0);
}

TEST(Bandit, MeanOfSequence) {
  BanditTables t;
  for (int r : {1, 2, 3}) update(t, k("a"), r);
  EXPECT_DOUBLE_EQ(t.q(k("a")), 2.0);
  EXPECT_EQ(t.count(k("a")), 3u);
}

TEST(Bandit, NegativeRewardRejected) {
  BanditTables t;
  EXPECT_THROW(update(t, k("a"), -1), std::invalid_argument);
}

TEST(Bandit, UnseenKeysDefaultToZero) {
  BanditTables t;
  EXPECT_EQ(t.q(k("zz")), 0.0);
  EXPECT_EQ(t.count(k("zz")), 0u);
}

TEST(Bandit, CuriosityReward) {
  EXPECT_EQ(curiosity_reward({}, {k("a"), k("b"), k("c")}), 3);
  EXPECT_EQ(curiosity_reward({k("a"), k("b"), k("c")}, {k("a"), k("b")}), 0);
  EXPECT_EQ(curiosity_reward({k("a")}, {k("a"), k("b"), k("c"), k("d"), k("e")}), 4);
}

TEST(Bandit, SoftmaxSymmetricAndKnownValues) {
  auto p = softmax({0, 0});
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  p = softmax({1, 0});
  EXPECT_NEAR(p[0], std::exp(1.0) / (std::exp(1.0) + 1), 1e-12);
  EXPECT_NEAR(p[0], 0.7311, 1e-4);
  EXPECT_NEAR(p[1], 0.2689, 1e-4);
}

TEST(Bandit, SoftmaxLargeValuesStable) {
  auto p = softmax({1000, 999});
  EXPECT_NEAR(p[0], 0.7310585786, 1e-9);
  EXPECT_TRUE(std::isfinite(p[1]));
}

TEST(Bandit, EmptyCandidatesThrow) {
  BanditTables t;
  EXPECT_THROW(select_target(t, {}), EmptyCandidates);
}

TEST(Bandit, EpsilonOneAlwaysExplores) {
  BanditTables t(1.0, 3);
  SelectionContext ctx{{k("a")}, {k("a"), k("b"), k("c")}};
  std::map<ElementKey, int> hits;
  for (int i = 0; i < 30000; ++i) {
    auto s = select_target(t, ctx);
    ASSERT_EQ(s.branch, Branch::explore);
    ++hits[s.target];
  }
  for (const auto& [key, n] : hits) EXPECT_NEAR(n / 30000.0, 1.0 / 3, 0.015);
}

TEST(Bandit, EmptyInterestedFallsBackToExplore) {
  BanditTables t(0.0, 3);
  SelectionContext ctx{{}, {k("a"), k("b")}};
  for (int i = 0; i < 100; ++i) EXPECT_EQ(select_target(t, ctx).branch, Branch::explore);
}

TEST(Bandit, EpsilonZeroAlwaysExploitsInterested) {
  BanditTables t(0.0, 3);
  SelectionContext ctx{{k("b")}, {k("a"), k("b")}};
  for (int i = 0; i < 100; ++i) {
    auto s = select_target(t, ctx);
    EXPECT_EQ(s.branch, Branch::exploit);
    EXPECT_EQ(s.target, k("b"));
  }
}

TEST(Bandit, SeedDeterminism) {
  SelectionContext ctx{{k("a"), k("b")}, {k("a"), k("b"), k("c"), k("d")}};
  BanditTables x(0.3, 42), y(0.3, 42);
  for (int i = 0; i < 1000; ++i) {
    auto a = select_target(x, ctx);
    auto b = select_target(y, ctx);
    ASSERT_EQ(a.target, b.target);
    ASSERT_EQ(a.branch, b.branch);
  }
}

TEST(Bandit, InvalidEpsilonRejected) {
  EXPECT_THROW(BanditTables(1.5, 0), std::invalid_argument);
  EXPECT_THROW(BanditTables(-0.1, 0), std::invalid_argument);
}
