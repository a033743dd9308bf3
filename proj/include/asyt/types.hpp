#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <type_traits>

namespace asyt {

// Dense ids, contiguous from 0 within each namespace.
enum class UserId : std::uint32_t {};
enum class ItemId : std::uint32_t {};
enum class TagId : std::uint32_t {};

template <class Id>
constexpr std::uint32_t index(Id id) noexcept {
  return static_cast<std::uint32_t>(id);
}

template <class Id>
constexpr Id make_id(std::size_t i) noexcept {
  return static_cast<Id>(static_cast<std::uint32_t>(i));
}

inline constexpr std::uint32_t kNoIndex = std::numeric_limits<std::uint32_t>::max();

// Term frequency: number of distinct users that tagged an item with a tag.
using TermFreq = std::uint32_t;

// Social proximity in [0, 1].
using Proximity = double;

}  // namespace asyt
