#include <gtest/gtest.h>

#include <cmath>

#include "asyt/metrics.hpp"

using namespace asyt;

namespace {
std::vector<ItemId> ids(std::initializer_list<std::uint32_t> xs) {
  std::vector<ItemId> out;
  for (auto x : xs) out.push_back(make_id<ItemId>(x));
  return out;
}
}  // namespace

TEST(Ndcg, PerfectRankingIsOne) {
  auto exact = ids({4, 2, 9});
  EXPECT_DOUBLE_EQ(ndcg_at(exact, exact), 1.0);
}

TEST(Ndcg, EmptyRankingIsZero) {
  EXPECT_DOUBLE_EQ(ndcg_at({}, ids({1, 2})), 0.0);
  EXPECT_DOUBLE_EQ(ndcg_at({}, {}), 1.0);
}

TEST(Ndcg, SwappedPairByHand) {
  // Relevances 20 and 19; the swap puts 19 first.
  const double ideal = 20.0 + 19.0 / std::log2(3.0);
  const double got = 19.0 + 20.0 / std::log2(3.0);
  EXPECT_DOUBLE_EQ(ndcg_at(ids({2, 1}), ids({1, 2})), got / ideal);
}

TEST(Ndcg, ForeignItemsGainNothing) {
  const double ideal = 20.0 + 19.0 / std::log2(3.0);
  EXPECT_DOUBLE_EQ(ndcg_at(ids({7, 1}), ids({1, 2})), (20.0 / std::log2(3.0)) / ideal);
}

TEST(Precision, ZeroBasedRanks) {
  std::vector<std::optional<std::size_t>> ranks = {0, 4, 5, std::nullopt};
  EXPECT_DOUBLE_EQ(precision_at(ranks, 1), 0.25);
  EXPECT_DOUBLE_EQ(precision_at(ranks, 5), 0.5);
  EXPECT_DOUBLE_EQ(precision_at(ranks, 20), 0.75);
}
