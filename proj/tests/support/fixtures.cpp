#include "support/fixtures.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace asyt::testing {

Dataset running_example() {
  const char* triples =
      "Bob\ti6\tstyle\n"
      "Bob\ti6\tglasses\n"
      "Carol\ti4\tstyle\n"
      "Carol\ti6\tglasses\n"
      "Danny\ti4\tgrunge\n"
      "Eve\ti4\tglasses\n"
      "Eve\ti2\tstreet\n"
      "Frank\ti4\tgoth\n"
      "Frank\ti2\tstreet\n"
      "George\ti4\tgloomy\n"
      "George\ti2\tstreet\n"
      "George\ti2\tstyle\n"
      "Holly\ti4\tgoth\n"
      "Holly\ti2\tstreet\n"
      "Holly\ti1\tgloomy\n"
      "Ida\ti4\tstyle\n"
      "Ida\ti2\tstud\n"
      "Jim\ti4\tstyle\n"
      "Jim\ti2\tstud\n"
      "Jim\ti5\thippie\n"
      "Alice\ti3\thipster\n";
  const char* edges =
      "Alice\tBob\t0.9\n"
      "Bob\tDanny\t0.9\n"
      "Alice\tCarol\t0.6\n"
      "Alice\tFrank\t0.4\n"
      "Alice\tEve\t0.3\n"
      "Alice\tGeorge\t0.2\n"
      "Alice\tIda\t0.16\n"
      "Alice\tJim\t0.07\n"
      "Alice\tHolly\t0.01\n";
  std::istringstream tin(triples), ein(edges);
  auto corpus = ingest_triples(tin).corpus;
  auto graph = read_edges(ein, corpus).graph;
  auto index = CtIlIndex::build(corpus);
  return {std::move(corpus), std::move(graph), std::move(index)};
}

std::string random_tag_name(std::mt19937_64& rng) {
  static const char alphabet[] = "abcde";
  std::uniform_int_distribution<int> len(1, 5), ch(0, 4);
  std::string s;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) s += alphabet[ch(rng)];
  return s;
}

SimilarityGraph random_graph(std::mt19937_64& rng, std::size_t nodes, double density) {
  std::bernoulli_distribution coin(density);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  std::vector<WeightedEdge> edges;
  for (std::size_t a = 0; a < nodes; ++a) {
    for (std::size_t b = a + 1; b < nodes; ++b) {
      if (coin(rng)) edges.push_back({make_id<UserId>(a), make_id<UserId>(b), weight(rng)});
    }
  }
  return SimilarityGraph::from_edges(nodes, edges);
}

Dataset random_dataset(std::uint64_t seed, const RandomSpec& spec) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  const std::size_t n_users = pick(2, spec.max_users);
  const std::size_t n_items = pick(1, spec.max_items);
  const std::size_t n_tags = pick(1, spec.max_tags);
  const std::size_t n_triples = pick(1, spec.max_triples);

  std::set<std::string> names;
  while (names.size() < n_tags) names.insert(random_tag_name(rng));
  std::vector<std::string> tags(names.begin(), names.end());
  std::shuffle(tags.begin(), tags.end(), rng);

  // Skewed item and tag popularity so term frequencies vary.
  std::geometric_distribution<std::size_t> item_skew(4.0 / static_cast<double>(n_items + 3));
  std::geometric_distribution<std::size_t> tag_skew(3.0 / static_cast<double>(n_tags + 2));
  Corpus::Builder b;
  std::vector<std::string> user_names;
  for (std::size_t u = 0; u < n_users; ++u) user_names.push_back("u" + std::to_string(u));
  for (std::size_t t = 0; t < n_triples; ++t) {
    auto u = pick(0, n_users - 1);
    auto i = item_skew(rng) % n_items;
    auto g = tag_skew(rng) % n_tags;
    b.add(user_names[u], "i" + std::to_string(i), tags[g]);
  }
  auto corpus = std::move(b).build();
  // Users never drawn are absent from the corpus; graph nodes follow corpus ids.
  auto graph = random_graph(rng, corpus.num_users(), spec.edge_density + 2.0 / static_cast<double>(n_users));
  auto index = CtIlIndex::build(corpus);
  return {std::move(corpus), std::move(graph), std::move(index)};
}

UserId user(const Corpus& c, std::string_view name) {
  if (auto u = c.find_user(name)) return *u;
  throw std::out_of_range(std::string(name));
}
ItemId item(const Corpus& c, std::string_view name) {
  if (auto i = c.find_item(name)) return *i;
  throw std::out_of_range(std::string(name));
}
TagId tag(const Corpus& c, std::string_view name) {
  if (auto t = c.find_tag(name)) return *t;
  throw std::out_of_range(std::string(name));
}

}  // namespace asyt::testing
