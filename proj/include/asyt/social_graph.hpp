#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "asyt/corpus.hpp"
#include "asyt/types.hpp"

namespace asyt {

struct WeightedEdge {
  UserId a;
  UserId b;
  double weight;
};

// Undirected user graph with weights in (0, 1]. Node ids share the corpus user
// namespace; users that only appear in an edge file get ids past
// corpus.num_users().
class SimilarityGraph {
 public:
  struct Neighbor {
    UserId user;
    double weight;
  };

  SimilarityGraph() = default;

  // Drops self-loops and non-positive weights, clamps to 1, and keeps the
  // larger weight for duplicate pairs.
  static SimilarityGraph from_edges(std::size_t num_nodes, std::span<const WeightedEdge> edges);

  std::span<const Neighbor> neighbors(UserId u) const noexcept;
  std::size_t num_nodes() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_edges() const noexcept { return adjacency_.size() / 2; }
  bool contains(UserId u) const noexcept { return index(u) < num_nodes(); }

  // Each undirected edge once, a < b.
  std::vector<WeightedEdge> edges() const;
  std::vector<double> weights() const;

  // Names for nodes outside the corpus user namespace.
  const std::vector<std::string>& extra_names() const noexcept { return extra_names_; }
  void set_extra_names(std::vector<std::string> names) { extra_names_ = std::move(names); }

 private:
  std::vector<std::uint32_t> offsets_;
  std::vector<Neighbor> adjacency_;
  std::vector<std::string> extra_names_;
};

struct GraphLoadResult {
  SimilarityGraph graph;
  std::vector<Diagnostic> diagnostics;
};

// Reads `userA<TAB>userB<TAB>weight` lines; weights must lie in (0, 1].
GraphLoadResult read_edges(std::istream& in, const Corpus& corpus);
GraphLoadResult load_edges_file(const std::filesystem::path& path, const Corpus& corpus);
void write_edges(std::ostream& out, const SimilarityGraph& g, const Corpus& corpus);

std::string user_display_name(UserId u, const Corpus& corpus, const SimilarityGraph& g);

// Keeps edges with weight >= theta.
SimilarityGraph filter_edges(const SimilarityGraph& g, double theta);

// Dice similarity 2|A∩B| / (|A| + |B|) over per-user feature sets.
SimilarityGraph dice_from_features(std::span<const std::vector<std::uint32_t>> features);
SimilarityGraph dice_common_neighbors(const SimilarityGraph& g);
SimilarityGraph dice_item_tag_pairs(const Corpus& c);
SimilarityGraph dice_tags(const Corpus& c);

// How edge weights combine along a path into extended proximity.
struct ProximityAggregator {
  enum class Kind { MaxProduct, ExpDecay };
  Kind kind = Kind::MaxProduct;
  double decay = 1.0;  // lambda in (0, 1], ExpDecay only

  static ProximityAggregator max_product() { return {}; }
  static ProximityAggregator exp_decay(double lambda);

  // Internal path labels: MaxProduct multiplies weights; ExpDecay multiplies
  // lambda * weight per edge and divides by lambda once, giving
  // product(w) * lambda^(hops-1).
  double extend(double label, double weight) const noexcept {
    return kind == Kind::MaxProduct ? label * weight : label * (weight * decay);
  }
  double value(double label) const noexcept { return kind == Kind::MaxProduct ? label : label / decay; }
};

struct ProximityEntry {
  UserId user;
  Proximity proximity;
  friend bool operator==(const ProximityEntry&, const ProximityEntry&) = default;
};

// Best-first stream of users reachable from the seeker, in non-increasing
// extended proximity (ties by ascending user id). The seeker itself is not
// yielded.
class ProximityIterator {
 public:
  ProximityIterator(const SimilarityGraph& g, UserId seeker, ProximityAggregator agg);

  std::optional<ProximityEntry> next();
  // Proximity of the next user to be yielded, 0 when exhausted.
  Proximity peek_bound();

 private:
  struct Item {
    double label;
    std::uint32_t user;
    bool operator<(const Item& o) const noexcept {
      return label != o.label ? label < o.label : user > o.user;
    }
  };
  void drop_settled();
  void relax(std::uint32_t u, double label);

  const SimilarityGraph* graph_;
  ProximityAggregator agg_;
  std::priority_queue<Item> heap_;
  std::unordered_map<std::uint32_t, double> best_;
  std::unordered_set<std::uint32_t> settled_;
};

}  // namespace asyt
