#pragma once

#include <optional>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "asyt/corpus.hpp"
#include "asyt/types.hpp"

namespace asyt {

// One entry of a virtual (prefix) inverted list.
struct VirtualEntry {
  ItemId item;
  TagId tag;
  TermFreq tf;
  friend bool operator==(const VirtualEntry&, const VirtualEntry&) = default;
};

using NodeId = std::uint32_t;

// Completion trie over tf-ordered inverted lists.
//
// The trie is a Patricia trie at Unicode-scalar granularity: edges carry
// labels, single-child chains without a payload are compressed. Each node
// stores the best head tf among the lists of its subtree; the index itself is
// immutable and keeps the scores of the unconsumed lists. Per-query cursor
// positions and refreshed node scores live in a ListOverlay.
class CtIlIndex {
 public:
  struct Node {
    std::string label;        // edge label from the parent
    std::string path;         // concatenated labels from the root
    NodeId parent = kNoIndex;
    std::vector<NodeId> children;  // sorted by label
    std::uint32_t tag = kNoIndex;  // leaf payload
    std::uint32_t lex_lo = 0, lex_hi = 0;  // lexicographic tag-rank range of the subtree
    TermFreq max_score = 0;
  };

  CtIlIndex();
  static CtIlIndex build(const Corpus& corpus);

  // Inverted list of `tag`: tf descending, ties by ascending item id.
  std::span<const Posting> list(TagId tag) const noexcept;

  // Node whose subtree holds exactly the completions of `prefix`; the empty
  // prefix maps to the root. nullopt when no tag extends the prefix.
  std::optional<NodeId> find_prefix(std::string_view prefix) const;

  // Leaf node of a vocabulary tag.
  std::optional<NodeId> leaf_of(TagId tag) const noexcept;

  bool is_completion(TagId tag, NodeId node) const noexcept;
  std::uint32_t lex_rank(TagId tag) const noexcept { return lex_rank_[index(tag)]; }
  TagId tag_at_rank(std::uint32_t rank) const noexcept { return sorted_tags_[rank]; }

  const Node& node(NodeId id) const { return nodes_.at(id); }
  std::size_t num_nodes() const noexcept { return nodes_.size(); }
  std::size_t num_leaves() const noexcept { return sorted_tags_.size(); }
  NodeId root() const noexcept { return 0; }

  const std::string& tag_name(TagId tag) const { return tag_names_.at(index(tag)); }

  // Indented text rendering: one node per line, "label [max_score]" and the
  // tag name for leaves.
  std::string dump() const;

 private:
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> list_offsets_;
  std::vector<Posting> lists_;
  std::vector<std::uint32_t> lex_rank_;  // by tag id, kNoIndex for tags without postings
  std::vector<TagId> sorted_tags_;
  std::vector<NodeId> leaf_node_;  // by tag id
  std::vector<std::string> tag_names_;
};

// Private cursor positions over the index lists, plus node scores refreshed
// eagerly along the root path after every leaf advance.
class ListOverlay {
 public:
  explicit ListOverlay(const CtIlIndex& index) : index_(&index) {}

  std::uint32_t position(TagId tag) const noexcept;
  std::optional<Posting> head(TagId tag) const noexcept;
  TermFreq head_tf(TagId tag) const noexcept;
  void advance(TagId tag);

  TermFreq node_score(NodeId node) const noexcept;

  // Head tf of the concrete list of `term`; 0 when absent or exhausted.
  TermFreq concrete_top_tf(std::string_view term) const;
  // Best head tf among completions of `prefix`; 0 when absent or exhausted.
  TermFreq prefix_top_tf(std::string_view prefix) const;

  const CtIlIndex& index() const noexcept { return *index_; }

 private:
  const CtIlIndex* index_;
  std::unordered_map<std::uint32_t, std::uint32_t> positions_;
  std::unordered_map<NodeId, TermFreq> node_scores_;
};

// Ranked, per-item-max deduplicated union of the lists below a prefix node.
// Emits (item, tag, tf) in non-increasing tf, ties by ascending item id then
// lexicographic tag. Entries of already-emitted items are passed over; those
// passes are reported to the caller of advance().
class VirtualListCursor {
 public:
  static std::optional<VirtualListCursor> open(ListOverlay& overlay, std::string_view prefix);
  static VirtualListCursor open_node(ListOverlay& overlay, NodeId node);

  std::optional<VirtualEntry> peek() const;
  // Emits the current head. Entries skipped while settling on the next head
  // (lower-scored duplicates of emitted items) are appended to `skipped`.
  std::optional<VirtualEntry> advance(std::vector<VirtualEntry>* skipped = nullptr);

  TermFreq top_tf() const noexcept;
  bool exhausted() const noexcept { return !peek().has_value(); }
  NodeId node() const noexcept { return node_; }
  bool emitted(ItemId item) const { return emitted_.contains(item); }

 private:
  struct QEntry {
    TermFreq score;
    bool is_list;
    std::uint32_t id;  // node id, or tag id when is_list
    ItemId item;       // list head
    std::uint32_t lex; // lex rank of the list's tag
  };
  struct Lower {
    bool operator()(const QEntry& a, const QEntry& b) const noexcept;
  };

  VirtualListCursor(ListOverlay& overlay, NodeId node);
  void push_node(NodeId node);
  void push_list(TagId tag);
  void settle(std::vector<VirtualEntry>* skipped);

  ListOverlay* overlay_;
  NodeId node_;
  std::priority_queue<QEntry, std::vector<QEntry>, Lower> queue_;
  std::unordered_set<ItemId> emitted_;
};

}  // namespace asyt
