#include "asyt/social_graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "asyt/text.hpp"

namespace asyt {

SimilarityGraph SimilarityGraph::from_edges(std::size_t num_nodes, std::span<const WeightedEdge> edges) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> merged;
  for (const auto& e : edges) {
    auto a = index(e.a), b = index(e.b);
    if (a == b || !(e.weight > 0.0)) continue;
    if (a >= num_nodes || b >= num_nodes) throw std::out_of_range("edge endpoint outside graph");
    auto key = std::minmax(a, b);
    double w = std::min(e.weight, 1.0);
    auto [it, inserted] = merged.emplace(key, w);
    if (!inserted) it->second = std::max(it->second, w);
  }
  SimilarityGraph g;
  g.offsets_.assign(num_nodes + 1, 0);
  for (const auto& [key, w] : merged) {
    ++g.offsets_[key.first + 1];
    ++g.offsets_[key.second + 1];
  }
  for (std::size_t u = 0; u < num_nodes; ++u) g.offsets_[u + 1] += g.offsets_[u];
  g.adjacency_.resize(merged.size() * 2);
  std::vector<std::uint32_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto& [key, w] : merged) {
    g.adjacency_[fill[key.first]++] = {make_id<UserId>(key.second), w};
    g.adjacency_[fill[key.second]++] = {make_id<UserId>(key.first), w};
  }
  return g;
}

std::span<const SimilarityGraph::Neighbor> SimilarityGraph::neighbors(UserId u) const noexcept {
  auto i = index(u);
  if (i >= num_nodes()) return {};
  return std::span<const Neighbor>(adjacency_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
}

std::vector<WeightedEdge> SimilarityGraph::edges() const {
  std::vector<WeightedEdge> out;
  out.reserve(num_edges());
  for (std::size_t u = 0; u < num_nodes(); ++u) {
    for (const auto& n : neighbors(make_id<UserId>(u))) {
      if (index(n.user) > u) out.push_back({make_id<UserId>(u), n.user, n.weight});
    }
  }
  return out;
}

std::vector<double> SimilarityGraph::weights() const {
  std::vector<double> out;
  for (const auto& e : edges()) out.push_back(e.weight);
  return out;
}

GraphLoadResult read_edges(std::istream& in, const Corpus& corpus) {
  GraphLoadResult result;
  std::unordered_map<std::string, std::uint32_t> extra;
  std::vector<std::string> extra_names;
  auto resolve = [&](std::string_view name) -> UserId {
    if (auto u = corpus.find_user(name)) return *u;
    auto [it, inserted] = extra.emplace(std::string(name), static_cast<std::uint32_t>(corpus.num_users() + extra.size()));
    if (inserted) extra_names.emplace_back(name);
    return make_id<UserId>(it->second);
  };
  std::vector<WeightedEdge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (text::trim(view).empty() || view.front() == '#') continue;
    auto fields = text::split(view, '\t');
    if (fields.size() != 3) {
      result.diagnostics.push_back({lineno, "expected userA<TAB>userB<TAB>weight"});
      continue;
    }
    auto a = text::trim(fields[0]);
    auto b = text::trim(fields[1]);
    auto wtext = text::trim(fields[2]);
    double w = 0.0;
    auto [ptr, ec] = std::from_chars(wtext.data(), wtext.data() + wtext.size(), w);
    if (a.empty() || b.empty() || ec != std::errc{} || ptr != wtext.data() + wtext.size() || !(w > 0.0) || w > 1.0) {
      result.diagnostics.push_back({lineno, "malformed edge or weight outside (0,1]"});
      continue;
    }
    if (a == b) {
      result.diagnostics.push_back({lineno, "self-loop ignored"});
      continue;
    }
    edges.push_back({resolve(a), resolve(b), w});
  }
  result.graph = SimilarityGraph::from_edges(corpus.num_users() + extra.size(), edges);
  result.graph.set_extra_names(std::move(extra_names));
  return result;
}

GraphLoadResult load_edges_file(const std::filesystem::path& path, const Corpus& corpus) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open edge file '{}'", path.string()));
  return read_edges(in, corpus);
}

std::string user_display_name(UserId u, const Corpus& corpus, const SimilarityGraph& g) {
  if (index(u) < corpus.num_users()) return corpus.user_name(u);
  auto extra = index(u) - corpus.num_users();
  if (extra < g.extra_names().size()) return g.extra_names()[extra];
  return fmt::format("#{}", index(u));
}

void write_edges(std::ostream& out, const SimilarityGraph& g, const Corpus& corpus) {
  for (const auto& e : g.edges()) {
    out << user_display_name(e.a, corpus, g) << '\t' << user_display_name(e.b, corpus, g) << '\t'
        << fmt::format("{:.17g}", e.weight) << '\n';
  }
}

SimilarityGraph filter_edges(const SimilarityGraph& g, double theta) {
  auto all = g.edges();
  std::erase_if(all, [&](const WeightedEdge& e) { return e.weight < theta; });
  auto out = SimilarityGraph::from_edges(g.num_nodes(), all);
  out.set_extra_names(g.extra_names());
  return out;
}

SimilarityGraph dice_from_features(std::span<const std::vector<std::uint32_t>> features) {
  const std::size_t n = features.size();
  std::uint32_t max_feature = 0;
  for (const auto& f : features) {
    for (auto x : f) max_feature = std::max(max_feature, x + 1);
  }
  std::vector<std::vector<std::uint32_t>> holders(max_feature);
  for (std::size_t u = 0; u < n; ++u) {
    for (auto x : features[u]) holders[x].push_back(static_cast<std::uint32_t>(u));
  }
  std::vector<WeightedEdge> edges;
  std::vector<std::uint32_t> shared(n, 0);
  std::vector<std::uint32_t> touched;
  for (std::size_t u = 0; u < n; ++u) {
    touched.clear();
    for (auto x : features[u]) {
      for (auto v : holders[x]) {
        if (v <= u) continue;
        if (shared[v]++ == 0) touched.push_back(v);
      }
    }
    for (auto v : touched) {
      double w = 2.0 * shared[v] / static_cast<double>(features[u].size() + features[v].size());
      edges.push_back({make_id<UserId>(u), make_id<UserId>(v), w});
      shared[v] = 0;
    }
  }
  return SimilarityGraph::from_edges(n, edges);
}

namespace {
std::vector<std::uint32_t> sorted_unique(std::vector<std::uint32_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}
}  // namespace

SimilarityGraph dice_common_neighbors(const SimilarityGraph& g) {
  std::vector<std::vector<std::uint32_t>> features(g.num_nodes());
  for (std::size_t u = 0; u < g.num_nodes(); ++u) {
    for (const auto& nb : g.neighbors(make_id<UserId>(u))) features[u].push_back(index(nb.user));
    features[u] = sorted_unique(std::move(features[u]));
  }
  auto out = dice_from_features(features);
  out.set_extra_names(g.extra_names());
  return out;
}

SimilarityGraph dice_item_tag_pairs(const Corpus& c) {
  // Pairs are interned into a dense feature space.
  std::unordered_map<std::uint64_t, std::uint32_t> pair_ids;
  std::vector<std::vector<std::uint32_t>> features(c.num_users());
  for (const auto& tr : c.triples()) {
    auto key = (static_cast<std::uint64_t>(index(tr.item)) << 32) | index(tr.tag);
    auto [it, _] = pair_ids.emplace(key, static_cast<std::uint32_t>(pair_ids.size()));
    features[index(tr.user)].push_back(it->second);
  }
  for (auto& f : features) f = sorted_unique(std::move(f));
  return dice_from_features(features);
}

SimilarityGraph dice_tags(const Corpus& c) {
  std::vector<std::vector<std::uint32_t>> features(c.num_users());
  for (const auto& tr : c.triples()) features[index(tr.user)].push_back(index(tr.tag));
  for (auto& f : features) f = sorted_unique(std::move(f));
  return dice_from_features(features);
}

// ---------------------------------------------------------------------------

ProximityAggregator ProximityAggregator::exp_decay(double lambda) {
  if (!(lambda > 0.0) || lambda > 1.0) throw std::invalid_argument("decay factor must lie in (0,1]");
  return {Kind::ExpDecay, lambda};
}

ProximityIterator::ProximityIterator(const SimilarityGraph& g, UserId seeker, ProximityAggregator agg)
    : graph_(&g), agg_(agg) {
  if (!g.contains(seeker)) return;
  settled_.insert(index(seeker));
  relax(index(seeker), 1.0);
}

void ProximityIterator::relax(std::uint32_t u, double label) {
  for (const auto& nb : graph_->neighbors(make_id<UserId>(u))) {
    auto v = index(nb.user);
    if (settled_.contains(v)) continue;
    double cand = agg_.extend(label, nb.weight);
    auto [it, inserted] = best_.emplace(v, cand);
    if (!inserted) {
      if (cand <= it->second) continue;
      it->second = cand;
    }
    heap_.push({cand, v});
  }
}

void ProximityIterator::drop_settled() {
  while (!heap_.empty()) {
    const auto& top = heap_.top();
    if (settled_.contains(top.user) || best_[top.user] != top.label) {
      heap_.pop();
      continue;
    }
    return;
  }
}

Proximity ProximityIterator::peek_bound() {
  drop_settled();
  return heap_.empty() ? 0.0 : agg_.value(heap_.top().label);
}

std::optional<ProximityEntry> ProximityIterator::next() {
  drop_settled();
  if (heap_.empty()) return std::nullopt;
  auto top = heap_.top();
  heap_.pop();
  settled_.insert(top.user);
  best_.erase(top.user);
  relax(top.user, top.label);
  return ProximityEntry{make_id<UserId>(top.user), agg_.value(top.label)};
}

}  // namespace asyt
