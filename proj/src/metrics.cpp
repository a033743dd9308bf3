#include "asyt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace asyt {

double ndcg_at(std::span<const ItemId> ranking, std::span<const ItemId> exact, std::size_t n) {
  const std::size_t depth = std::min(n, exact.size());
  if (depth == 0) return 1.0;
  std::unordered_map<ItemId, double> relevance;
  for (std::size_t r = 0; r < depth; ++r) relevance.emplace(exact[r], static_cast<double>(n - r));

  double ideal = 0.0;
  for (std::size_t p = 0; p < depth; ++p) ideal += relevance[exact[p]] / std::log2(static_cast<double>(p) + 2.0);
  double gained = 0.0;
  for (std::size_t p = 0; p < std::min(n, ranking.size()); ++p) {
    auto it = relevance.find(ranking[p]);
    if (it != relevance.end()) gained += it->second / std::log2(static_cast<double>(p) + 2.0);
  }
  return gained / ideal;
}

double precision_at(std::span<const std::optional<std::size_t>> ranks, std::size_t k) {
  if (ranks.empty()) return 0.0;
  auto hits = std::count_if(ranks.begin(), ranks.end(), [&](const auto& r) { return r && *r < k; });
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

}  // namespace asyt
