#pragma once

#include <cstdint>

#include "asyt/corpus.hpp"
#include "asyt/social_graph.hpp"

namespace asyt {

enum class GraphModel { SmallWorld, Ring, Empty };

struct SyntheticSpec {
  std::uint64_t seed = 1;
  std::size_t n_users = 1000;
  std::size_t n_items = 2000;
  std::size_t n_tags = 500;
  std::size_t n_triples = 20000;
  GraphModel graph_model = GraphModel::SmallWorld;
  std::size_t mean_degree = 10;
  double rewire = 0.1;
  double zipf_exponent = 1.0;
  std::size_t communities = 20;
  double community_bias = 0.6;  // chance a tagging stays in the user's community
  double topic_bias = 0.5;      // chance the tag comes from the item's own topics
};

struct SyntheticData {
  Corpus corpus;
  SimilarityGraph graph;
};

// Seed-deterministic corpus with Zipf item and tag popularity, plus a
// homophilous user graph: users are laid out on a ring, communities are ring
// arcs, and most taggings stay within the tagger's community.
// Throws std::invalid_argument when the sizes cannot hold n_triples.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

// Fitted slope of log(frequency) against log(rank) over tags with at least
// `min_count` triples.
double zipf_slope(const Corpus& c, std::size_t min_count = 5);

}  // namespace asyt
