#include "asyt/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace asyt {

namespace {

class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double s) : cdf_(n) {
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      total += 1.0 / std::pow(static_cast<double>(r + 1), s);
      cdf_[r] = total;
    }
  }
  std::size_t operator()(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> u(0.0, cdf_.back());
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u(rng));
    return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

// Pronounceable names sharing prefixes: base-N digits over syllables.
std::vector<std::string> tag_names(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::string> syllables;
  for (const char* c : {"b", "d", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v"}) {
    for (const char* v : {"a", "e", "i", "o", "u"}) syllables.push_back(std::string(c) + v);
  }
  std::shuffle(syllables.begin(), syllables.end(), rng);
  std::size_t width = 2;
  for (std::size_t cap = syllables.size() * syllables.size(); cap < n; cap *= syllables.size()) ++width;
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string name;
    std::size_t x = i;
    for (std::size_t d = 0; d < width; ++d) {
      name += syllables[x % syllables.size()];
      x /= syllables.size();
    }
    out.push_back(std::move(name));
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

SimilarityGraph make_graph(const SyntheticSpec& spec, std::mt19937_64& rng) {
  const std::size_t n = spec.n_users;
  std::vector<WeightedEdge> edges;
  if (spec.graph_model != GraphModel::Empty && n > 1) {
    std::uniform_real_distribution<double> weight(0.1, 1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> any(0, n - 1);
    const std::size_t half = std::max<std::size_t>(1, spec.mean_degree / 2);
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t j = 1; j <= half; ++j) {
        std::size_t v = (u + j) % n;
        if (spec.graph_model == GraphModel::SmallWorld && coin(rng) < spec.rewire) v = any(rng);
        if (v == u) continue;
        edges.push_back({make_id<UserId>(u), make_id<UserId>(v), weight(rng)});
      }
    }
  }
  return SimilarityGraph::from_edges(n, edges);
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n_users == 0 || spec.n_items == 0 || spec.n_tags == 0) throw std::invalid_argument("sizes must be at least 1");
  const long double capacity = static_cast<long double>(spec.n_users) * spec.n_items * spec.n_tags;
  if (static_cast<long double>(spec.n_triples) > capacity / 2) {
    throw std::invalid_argument(fmt::format("{} triples cannot be drawn from {} users x {} items x {} tags",
                                            spec.n_triples, spec.n_users, spec.n_items, spec.n_tags));
  }
  if (spec.communities == 0) throw std::invalid_argument("communities must be at least 1");

  std::mt19937_64 rng(spec.seed);
  const auto names = tag_names(spec.n_tags, rng);
  const std::size_t communities = std::min(spec.communities, std::min(spec.n_users, spec.n_items));
  const std::size_t per_community = (spec.n_items + communities - 1) / communities;

  ZipfSampler item_pop(spec.n_items, spec.zipf_exponent);
  ZipfSampler local_pop(per_community, spec.zipf_exponent);
  ZipfSampler tag_pop(spec.n_tags, spec.zipf_exponent);

  std::vector<std::array<std::uint32_t, 2>> topics(spec.n_items);
  for (auto& t : topics) t = {static_cast<std::uint32_t>(tag_pop(rng)), static_cast<std::uint32_t>(tag_pop(rng))};

  std::uniform_int_distribution<std::size_t> any_user(0, spec.n_users - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  Corpus::Builder b;
  // Intern users first so corpus and graph ids coincide.
  std::vector<std::string> users(spec.n_users);
  for (std::size_t u = 0; u < spec.n_users; ++u) users[u] = fmt::format("u{}", u);

  std::size_t made = 0, attempts = 0;
  const std::size_t max_attempts = 20 * spec.n_triples + 1000;
  while (made < spec.n_triples) {
    if (++attempts > max_attempts) throw std::invalid_argument("could not draw enough distinct triples");
    const std::size_t u = any_user(rng);
    const std::size_t community = u * communities / spec.n_users;
    std::size_t i;
    if (coin(rng) < spec.community_bias) {
      i = community + local_pop(rng) * communities;
      if (i >= spec.n_items) continue;
    } else {
      i = item_pop(rng);
    }
    const std::size_t t = coin(rng) < spec.topic_bias ? topics[i][coin(rng) < 0.5 ? 0 : 1] : tag_pop(rng);
    if (b.add(users[u], fmt::format("i{}", i), names[t])) ++made;
  }
  auto corpus = std::move(b).build();

  // Corpus ids follow first appearance; map ring positions onto them.
  auto ring = make_graph(spec, rng);
  std::vector<WeightedEdge> edges;
  std::vector<std::string> extra;
  std::vector<std::uint32_t> id_of(spec.n_users);
  std::size_t next_extra = corpus.num_users();
  for (std::size_t u = 0; u < spec.n_users; ++u) {
    if (auto id = corpus.find_user(users[u])) {
      id_of[u] = index(*id);
    } else {
      id_of[u] = static_cast<std::uint32_t>(next_extra++);
      extra.push_back(users[u]);
    }
  }
  for (const auto& e : ring.edges()) {
    edges.push_back({make_id<UserId>(id_of[index(e.a)]), make_id<UserId>(id_of[index(e.b)]), e.weight});
  }
  auto graph = SimilarityGraph::from_edges(next_extra, edges);
  graph.set_extra_names(std::move(extra));
  return {std::move(corpus), std::move(graph)};
}

double zipf_slope(const Corpus& c, std::size_t min_count) {
  std::vector<std::size_t> counts;
  for (auto t : c.vocab()) {
    std::size_t n = 0;
    for (const auto& p : c.postings(t)) n += p.tf;
    if (n >= min_count) counts.push_back(n);
  }
  std::sort(counts.rbegin(), counts.rend());
  if (counts.size() < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(counts.size());
  for (std::size_t r = 0; r < counts.size(); ++r) {
    const double x = std::log(static_cast<double>(r + 1));
    const double y = std::log(static_cast<double>(counts[r]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace asyt
