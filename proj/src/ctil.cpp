#include "asyt/ctil.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "asyt/text.hpp"

namespace asyt {

namespace {

// Longest common prefix in bytes, backed off to a scalar boundary.
std::size_t common_prefix(std::string_view a, std::string_view b) {
  std::size_t n = 0;
  const std::size_t m = std::min(a.size(), b.size());
  while (n < m && a[n] == b[n]) ++n;
  while (n > 0 && n < a.size() && text::is_continuation(static_cast<unsigned char>(a[n]))) --n;
  return n;
}

std::string_view first_scalar(std::string_view s) { return s.substr(0, text::scalar_prefix_bytes(s, 1)); }

}  // namespace

CtIlIndex::CtIlIndex() : nodes_(1) {}

CtIlIndex CtIlIndex::build(const Corpus& corpus) {
  CtIlIndex ix;
  const std::size_t nt = corpus.num_tags();
  ix.tag_names_.reserve(nt);
  for (std::size_t t = 0; t < nt; ++t) ix.tag_names_.push_back(corpus.tag_name(make_id<TagId>(t)));

  ix.list_offsets_.assign(nt + 1, 0);
  for (std::size_t t = 0; t < nt; ++t) {
    auto src = corpus.postings(make_id<TagId>(t));
    ix.lists_.insert(ix.lists_.end(), src.begin(), src.end());
    auto first = ix.lists_.end() - static_cast<std::ptrdiff_t>(src.size());
    std::stable_sort(first, ix.lists_.end(), [](const Posting& a, const Posting& b) {
      return a.tf != b.tf ? a.tf > b.tf : a.item < b.item;
    });
    ix.list_offsets_[t + 1] = static_cast<std::uint32_t>(ix.lists_.size());
  }

  ix.sorted_tags_ = corpus.vocab();
  std::sort(ix.sorted_tags_.begin(), ix.sorted_tags_.end(),
            [&](TagId a, TagId b) { return ix.tag_names_[index(a)] < ix.tag_names_[index(b)]; });
  ix.lex_rank_.assign(nt, kNoIndex);
  ix.leaf_node_.assign(nt, kNoIndex);
  for (std::size_t r = 0; r < ix.sorted_tags_.size(); ++r) ix.lex_rank_[index(ix.sorted_tags_[r])] = static_cast<std::uint32_t>(r);

  // Patricia insertion in lexicographic order.
  auto& nodes = ix.nodes_;
  for (TagId tag : ix.sorted_tags_) {
    std::string_view rest = ix.tag_names_[index(tag)];
    NodeId cur = 0;
    while (true) {
      if (rest.empty()) {
        nodes[cur].tag = index(tag);
        break;
      }
      auto head = first_scalar(rest);
      NodeId match = kNoIndex;
      for (NodeId c : nodes[cur].children) {
        if (first_scalar(nodes[c].label) == head) {
          match = c;
          break;
        }
      }
      if (match == kNoIndex) {
        Node leaf;
        leaf.label = std::string(rest);
        leaf.path = nodes[cur].path + leaf.label;
        leaf.parent = cur;
        leaf.tag = index(tag);
        auto id = static_cast<NodeId>(nodes.size());
        nodes.push_back(std::move(leaf));
        nodes[cur].children.push_back(id);
        break;
      }
      const std::size_t lcp = common_prefix(nodes[match].label, rest);
      if (lcp == nodes[match].label.size()) {
        rest.remove_prefix(lcp);
        cur = match;
        continue;
      }
      // Split the edge of `match` at lcp.
      Node mid;
      mid.label = nodes[match].label.substr(0, lcp);
      mid.path = nodes[cur].path + mid.label;
      mid.parent = cur;
      auto mid_id = static_cast<NodeId>(nodes.size());
      nodes.push_back(std::move(mid));
      nodes[match].label.erase(0, lcp);
      nodes[match].parent = mid_id;
      nodes[mid_id].children.push_back(match);
      std::replace(nodes[cur].children.begin(), nodes[cur].children.end(), match, mid_id);
      rest.remove_prefix(lcp);
      cur = mid_id;
    }
  }
  for (auto& n : nodes) {
    std::sort(n.children.begin(), n.children.end(),
              [&](NodeId a, NodeId b) { return nodes[a].label < nodes[b].label; });
  }

  // Post-order: lex ranges and max scores. Children are created after their
  // parents except across splits, so recurse explicitly.
  auto finish = [&](auto&& self, NodeId id) -> void {
    Node& n = nodes[id];
    std::uint32_t lo = kNoIndex, hi = 0;
    TermFreq best = 0;
    if (n.tag != kNoIndex) {
      lo = ix.lex_rank_[n.tag];
      hi = lo + 1;
      ix.leaf_node_[n.tag] = id;
      auto l = ix.list(make_id<TagId>(n.tag));
      if (!l.empty()) best = l.front().tf;
    }
    for (NodeId c : nodes[id].children) {
      self(self, c);
      lo = std::min(lo, nodes[c].lex_lo);
      hi = std::max(hi, nodes[c].lex_hi);
      best = std::max(best, nodes[c].max_score);
    }
    nodes[id].lex_lo = (lo == kNoIndex) ? 0 : lo;
    nodes[id].lex_hi = hi;
    nodes[id].max_score = best;
  };
  finish(finish, 0);
  return ix;
}

std::span<const Posting> CtIlIndex::list(TagId tag) const noexcept {
  auto t = index(tag);
  if (t + 1 >= list_offsets_.size()) return {};
  return std::span<const Posting>(lists_).subspan(list_offsets_[t], list_offsets_[t + 1] - list_offsets_[t]);
}

std::optional<NodeId> CtIlIndex::find_prefix(std::string_view prefix) const {
  if (sorted_tags_.empty()) return std::nullopt;
  NodeId cur = 0;
  std::string_view rest = prefix;
  while (!rest.empty()) {
    auto head = first_scalar(rest);
    NodeId match = kNoIndex;
    for (NodeId c : nodes_[cur].children) {
      if (first_scalar(nodes_[c].label) == head) {
        match = c;
        break;
      }
    }
    if (match == kNoIndex) return std::nullopt;
    const auto& label = nodes_[match].label;
    if (text::starts_with(label, rest)) return match;
    if (!text::starts_with(rest, label)) return std::nullopt;
    rest.remove_prefix(label.size());
    cur = match;
  }
  return cur;
}

std::optional<NodeId> CtIlIndex::leaf_of(TagId tag) const noexcept {
  auto t = index(tag);
  if (t >= leaf_node_.size() || leaf_node_[t] == kNoIndex) return std::nullopt;
  return leaf_node_[t];
}

bool CtIlIndex::is_completion(TagId tag, NodeId node) const noexcept {
  auto t = index(tag);
  if (t >= lex_rank_.size() || lex_rank_[t] == kNoIndex) return false;
  const auto& n = nodes_[node];
  return lex_rank_[t] >= n.lex_lo && lex_rank_[t] < n.lex_hi;
}

std::string CtIlIndex::dump() const {
  std::string out;
  auto rec = [&](auto&& self, NodeId id, int depth) -> void {
    const auto& n = nodes_[id];
    out += fmt::format("{:{}}{} [{}]", "", depth * 2, id == 0 ? "<root>" : n.label, n.max_score);
    if (n.tag != kNoIndex) out += fmt::format(" ({})", tag_names_[n.tag]);
    out += '\n';
    for (NodeId c : n.children) self(self, c, depth + 1);
  };
  rec(rec, 0, 0);
  return out;
}

// ---------------------------------------------------------------------------

std::uint32_t ListOverlay::position(TagId tag) const noexcept {
  auto it = positions_.find(asyt::index(tag));
  return it == positions_.end() ? 0 : it->second;
}

std::optional<Posting> ListOverlay::head(TagId tag) const noexcept {
  auto l = index_->list(tag);
  auto pos = position(tag);
  if (pos >= l.size()) return std::nullopt;
  return l[pos];
}

TermFreq ListOverlay::head_tf(TagId tag) const noexcept {
  auto h = head(tag);
  return h ? h->tf : 0;
}

TermFreq ListOverlay::node_score(NodeId node) const noexcept {
  auto it = node_scores_.find(node);
  return it == node_scores_.end() ? index_->node(node).max_score : it->second;
}

void ListOverlay::advance(TagId tag) {
  auto l = index_->list(tag);
  auto& pos = positions_[asyt::index(tag)];
  if (pos >= l.size()) return;
  ++pos;
  auto leaf = index_->leaf_of(tag);
  if (!leaf) return;
  for (NodeId cur = *leaf; cur != kNoIndex; cur = index_->node(cur).parent) {
    const auto& n = index_->node(cur);
    TermFreq best = n.tag != kNoIndex ? head_tf(make_id<TagId>(n.tag)) : 0;
    for (NodeId c : n.children) best = std::max(best, node_score(c));
    if (best == node_score(cur)) break;  // ancestors unchanged
    node_scores_[cur] = best;
  }
}

TermFreq ListOverlay::concrete_top_tf(std::string_view term) const {
  auto node = index_->find_prefix(term);
  if (!node) return 0;
  const auto& n = index_->node(*node);
  if (n.tag == kNoIndex || n.path != term) return 0;
  return head_tf(make_id<TagId>(n.tag));
}

TermFreq ListOverlay::prefix_top_tf(std::string_view prefix) const {
  auto node = index_->find_prefix(prefix);
  return node ? node_score(*node) : 0;
}

// ---------------------------------------------------------------------------

bool VirtualListCursor::Lower::operator()(const QEntry& a, const QEntry& b) const noexcept {
  // Returns true when `a` ranks below `b`.
  if (a.score != b.score) return a.score < b.score;
  if (a.is_list != b.is_list) return a.is_list;  // expand nodes before deciding ties
  if (!a.is_list) return a.id > b.id;
  if (a.item != b.item) return a.item > b.item;
  return a.lex > b.lex;
}

VirtualListCursor::VirtualListCursor(ListOverlay& overlay, NodeId node) : overlay_(&overlay), node_(node) {
  push_node(node);
  settle(nullptr);
}

std::optional<VirtualListCursor> VirtualListCursor::open(ListOverlay& overlay, std::string_view prefix) {
  auto node = overlay.index().find_prefix(prefix);
  if (!node) return std::nullopt;
  return VirtualListCursor(overlay, *node);
}

VirtualListCursor VirtualListCursor::open_node(ListOverlay& overlay, NodeId node) {
  return VirtualListCursor(overlay, node);
}

void VirtualListCursor::push_node(NodeId node) {
  auto score = overlay_->node_score(node);
  if (score == 0) return;
  queue_.push({score, false, node, ItemId{}, 0});
}

void VirtualListCursor::push_list(TagId tag) {
  auto h = overlay_->head(tag);
  if (!h) return;
  queue_.push({h->tf, true, asyt::index(tag), h->item, overlay_->index().lex_rank(tag)});
}

void VirtualListCursor::settle(std::vector<VirtualEntry>* skipped) {
  const auto& ix = overlay_->index();
  while (!queue_.empty()) {
    QEntry top = queue_.top();
    if (!top.is_list) {
      queue_.pop();
      const auto& n = ix.node(top.id);
      if (n.tag != kNoIndex) push_list(make_id<TagId>(n.tag));
      for (NodeId c : n.children) push_node(c);
      continue;
    }
    if (!emitted_.contains(top.item)) return;
    queue_.pop();
    auto tag = make_id<TagId>(top.id);
    if (skipped) skipped->push_back({top.item, tag, top.score});
    overlay_->advance(tag);
    push_list(tag);
  }
}

std::optional<VirtualEntry> VirtualListCursor::peek() const {
  if (queue_.empty()) return std::nullopt;
  const auto& top = queue_.top();
  return VirtualEntry{top.item, make_id<TagId>(top.id), top.score};
}

TermFreq VirtualListCursor::top_tf() const noexcept { return queue_.empty() ? 0 : queue_.top().score; }

std::optional<VirtualEntry> VirtualListCursor::advance(std::vector<VirtualEntry>* skipped) {
  auto head = peek();
  if (!head) return std::nullopt;
  queue_.pop();
  emitted_.insert(head->item);
  overlay_->advance(head->tag);
  push_list(head->tag);
  settle(skipped);
  return head;
}

}  // namespace asyt
