#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "asyt/corpus.hpp"
#include "asyt/ctil.hpp"
#include "asyt/social_graph.hpp"

namespace asyt::testing {

struct Dataset {
  Corpus corpus;
  SimilarityGraph graph;
  CtIlIndex index;
};

// Alice's network and taggings used throughout the worked examples.
Dataset running_example();

struct RandomSpec {
  std::size_t max_users = 50;
  std::size_t max_items = 300;
  std::size_t max_tags = 80;
  std::size_t max_triples = 3000;
  double edge_density = 0.08;
};

// Tag names are short strings over a small alphabet, so prefixes overlap.
Dataset random_dataset(std::uint64_t seed, const RandomSpec& spec = {});
SimilarityGraph random_graph(std::mt19937_64& rng, std::size_t nodes, double density);
std::string random_tag_name(std::mt19937_64& rng);

UserId user(const Corpus& c, std::string_view name);
ItemId item(const Corpus& c, std::string_view name);
TagId tag(const Corpus& c, std::string_view name);

}  // namespace asyt::testing
