// Score ranges, the termination test and anytime extraction.
#include <algorithm>

#include "asyt/engine.hpp"

namespace asyt {

double Session::blend(double tf, double sf) const noexcept {
  const double fr = config_.alpha * config_.tf_scale * tf + (1.0 - config_.alpha) * sf;
  return apply_transform(config_.transform, fr);
}

// An entry whose tf is not yet read is bounded by the current list head.
Session::Sums Session::entry_sums(const TermEntry& e, TermFreq head, Proximity mp) const noexcept {
  const TermFreq tf_hi = e.tf_known ? e.tf : head;
  const double tf_lo = e.tf_known ? e.tf : e.visited;
  const double unseen = tf_hi > e.visited ? static_cast<double>(tf_hi - e.visited) : 0.0;
  return {e.sf, e.sf + mp * unseen, tf_lo, static_cast<double>(tf_hi)};
}

ScoreRange Session::item_range(const ItemState* s) const {
  ScoreRange r;
  for (std::size_t j = 0; j < completed_.size(); ++j) {
    const TermFreq head = completed_head(j);
    const Proximity mp = proximity_at(completed_[j].social_pos);
    Sums sums{0.0, mp * head, 0.0, static_cast<double>(head)};
    if (s && j < s->completed.size() && s->completed[j].present) sums = entry_sums(s->completed[j], head, mp);
    r.min += blend(sums.tf_lo, sums.sf_lo);
    r.max += blend(sums.tf_hi, sums.sf_hi);
  }
  if (prefix_.active()) {
    const TermFreq head = prefix_head();
    const Proximity mp = proximity_at(prefix_.social_pos);
    // Prefix semantics: sf and tf are each the max over completions.
    Sums acc{0.0, mp * head, 0.0, static_cast<double>(head)};
    if (s) {
      for (const auto& [tag, e] : s->completions) {
        auto x = entry_sums(e, head, mp);
        acc.sf_lo = std::max(acc.sf_lo, x.sf_lo);
        acc.sf_hi = std::max(acc.sf_hi, x.sf_hi);
        acc.tf_lo = std::max(acc.tf_lo, x.tf_lo);
        acc.tf_hi = std::max(acc.tf_hi, x.tf_hi);
      }
    }
    r.min += blend(acc.tf_lo, acc.sf_lo);
    r.max += blend(acc.tf_hi, acc.sf_hi);
  }
  return r;
}

ScoreRange Session::score_bounds(ItemId item) const {
  auto it = items_.find(item);
  return item_range(it == items_.end() ? nullptr : &it->second);
}

ScoreRange Session::wildcard_bounds() const { return {0.0, item_range(nullptr).max}; }

std::vector<CandidateBounds> Session::candidate_bounds() const {
  std::vector<CandidateBounds> out;
  out.reserve(items_.size());
  for (const auto& [item, s] : items_) out.push_back({item, item_range(&s)});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.item < b.item; });
  return out;
}

namespace {

bool ranks_before(const CandidateBounds& a, const CandidateBounds& b) {
  return a.range.min != b.range.min ? a.range.min > b.range.min : a.item < b.item;
}

// Could `other` end up ranked above an item known to score `score`?
bool may_outrank(const CandidateBounds& other, double score, ItemId item) {
  return other.range.max > score || (other.range.max == score && other.item < item);
}

}  // namespace

std::optional<TopKResult> Session::exact_result() const {
  auto cands = candidate_bounds();
  const std::size_t k = std::min(config_.k, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(k), cands.end(), ranks_before);
  std::size_t top = 0;
  while (top < k && cands[top].range.min > 0.0) ++top;
  for (std::size_t r = 0; r < top; ++r) {
    if (!cands[r].range.closed()) return std::nullopt;
  }
  const double wildcard = wildcard_bounds().max;
  if (top == config_.k) {
    const auto& kth = cands[top - 1];
    if (wildcard >= kth.range.min) return std::nullopt;
    for (std::size_t r = top; r < cands.size(); ++r) {
      if (may_outrank(cands[r], kth.range.min, kth.item)) return std::nullopt;
    }
  } else {
    if (wildcard > 0.0) return std::nullopt;
    for (std::size_t r = top; r < cands.size(); ++r) {
      if (cands[r].range.max > 0.0) return std::nullopt;
    }
  }
  TopKResult out;
  out.exact = true;
  for (std::size_t r = 0; r < top; ++r) {
    out.entries.push_back({cands[r].item, cands[r].range.min, cands[r].range.max, EntryStatus::Guaranteed});
  }
  return out;
}

bool Session::termination_met() const { return exact_result().has_value(); }

TopKResult Session::anytime_topk() const {
  if (auto exact = exact_result()) return *exact;
  auto cands = candidate_bounds();
  std::erase_if(cands, [](const CandidateBounds& c) { return !(c.range.max > 0.0); });
  const double wildcard = wildcard_bounds().max;

  // Upper bounds in descending order, to count possible outrankers.
  std::vector<CandidateBounds> by_max = cands;
  std::sort(by_max.begin(), by_max.end(), [](const auto& a, const auto& b) {
    return a.range.max != b.range.max ? a.range.max > b.range.max : a.item < b.item;
  });
  auto outrankers = [&](const CandidateBounds& c) {
    const double score = c.range.min;
    auto above = std::partition_point(by_max.begin(), by_max.end(),
                                      [&](const CandidateBounds& d) { return d.range.max > score; });
    std::size_t n = static_cast<std::size_t>(above - by_max.begin());
    for (auto it = above; it != by_max.end() && it->range.max == score && it->item < c.item; ++it) ++n;
    if (c.range.max > score) --n;  // itself
    return n;
  };

  auto by_mid = [](const CandidateBounds& a, const CandidateBounds& b) {
    const double ma = (a.range.min + a.range.max) / 2, mb = (b.range.min + b.range.max) / 2;
    if (ma != mb) return ma > mb;
    if (a.range.min != b.range.min) return a.range.min > b.range.min;
    return a.item < b.item;
  };

  std::vector<CandidateBounds> guaranteed, possible;
  for (const auto& c : cands) {
    const bool sure = c.range.min > 0.0 && wildcard < c.range.min && outrankers(c) + 1 <= config_.k;
    (sure ? guaranteed : possible).push_back(c);
  }
  std::sort(guaranteed.begin(), guaranteed.end(), by_mid);
  std::sort(possible.begin(), possible.end(), by_mid);

  TopKResult out;
  for (const auto& c : guaranteed) {
    if (out.entries.size() == config_.k) break;
    out.entries.push_back({c.item, c.range.min, c.range.max, EntryStatus::Guaranteed});
  }
  for (const auto& c : possible) {
    if (out.entries.size() == config_.k) break;
    out.entries.push_back({c.item, c.range.min, c.range.max, EntryStatus::Possible});
  }
  return out;
}

}  // namespace asyt
