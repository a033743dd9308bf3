#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "asyt/types.hpp"

namespace asyt {

// NDCG@n of `ranking` against the exact ranking. The item at zero-based exact
// rank r has relevance max(0, n - r); position p is discounted by log2(p + 2).
// An empty reference yields 1.
double ndcg_at(std::span<const ItemId> ranking, std::span<const ItemId> exact, std::size_t n = 20);

// Fraction of trials whose zero-based rank is below k; nullopt counts as a miss.
double precision_at(std::span<const std::optional<std::size_t>> ranks, std::size_t k);

}  // namespace asyt
