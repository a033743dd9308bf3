#include "support/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace asyt::oracle {

namespace {

double step(const ProximityAggregator& agg, double label, double w) {
  return agg.kind == ProximityAggregator::Kind::MaxProduct ? label * w : label * (w * agg.decay);
}
double finish(const ProximityAggregator& agg, double label) {
  return agg.kind == ProximityAggregator::Kind::MaxProduct ? label : label / agg.decay;
}

void dfs(const SimilarityGraph& g, std::uint32_t u, double label, std::vector<bool>& on_path,
         std::vector<double>& best, const ProximityAggregator& agg) {
  for (const auto& nb : g.neighbors(make_id<UserId>(u))) {
    auto v = index(nb.user);
    if (on_path[v]) continue;
    double next = step(agg, label, nb.weight);
    best[v] = std::max(best[v], next);
    on_path[v] = true;
    dfs(g, v, next, on_path, best, agg);
    on_path[v] = false;
  }
}

// Best label per (vertex set, endpoint) over simple paths from the seeker.
// Labels only grow by multiplication, so keeping the best per state loses no
// path maximum.
void subset_paths(const SimilarityGraph& g, std::uint32_t seeker, std::vector<double>& best,
                  const ProximityAggregator& agg) {
  const std::size_t n = g.num_nodes();
  std::vector<double> label((std::size_t{1} << n) * n, 0.0);
  label[(std::size_t{1} << seeker) * n + seeker] = 1.0;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    for (std::uint32_t u = 0; u < n; ++u) {
      const double l = label[mask * n + u];
      if (l == 0.0) continue;
      for (const auto& nb : g.neighbors(make_id<UserId>(u))) {
        auto v = index(nb.user);
        if (mask & (std::size_t{1} << v)) continue;
        const double next = step(agg, l, nb.weight);
        auto& slot = label[(mask | (std::size_t{1} << v)) * n + v];
        slot = std::max(slot, next);
        best[v] = std::max(best[v], next);
      }
    }
  }
}

}  // namespace

std::vector<double> path_proximity(const SimilarityGraph& g, UserId seeker, const ProximityAggregator& agg) {
  std::vector<double> best(g.num_nodes(), 0.0);
  if (!g.contains(seeker)) return best;
  if (g.num_nodes() <= 16) {
    subset_paths(g, index(seeker), best, agg);
  } else {
    std::vector<bool> on_path(g.num_nodes(), false);
    on_path[index(seeker)] = true;
    dfs(g, index(seeker), 1.0, on_path, best, agg);
  }
  best[index(seeker)] = 0.0;
  for (auto& b : best) b = b > 0.0 ? finish(agg, b) : 0.0;
  return best;
}

std::vector<double> relaxed_proximity(const SimilarityGraph& g, UserId seeker, const ProximityAggregator& agg) {
  std::vector<double> label(g.num_nodes(), 0.0);
  if (!g.contains(seeker)) return label;
  label[index(seeker)] = 1.0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t u = 0; u < g.num_nodes(); ++u) {
      if (label[u] == 0.0) continue;
      for (const auto& nb : g.neighbors(make_id<UserId>(u))) {
        auto v = index(nb.user);
        if (v == index(seeker)) continue;
        double next = step(agg, label[u], nb.weight);
        if (next > label[v]) {
          label[v] = next;
          changed = true;
        }
      }
    }
  }
  label[index(seeker)] = 0.0;
  for (auto& l : label) l = l > 0.0 ? finish(agg, l) : 0.0;
  return label;
}

std::vector<ProximityEntry> proximity_order(const SimilarityGraph& g, UserId seeker, const ProximityAggregator& agg) {
  auto prox = relaxed_proximity(g, seeker, agg);
  std::vector<ProximityEntry> out;
  for (std::size_t u = 0; u < prox.size(); ++u) {
    if (prox[u] > 0.0) out.push_back({make_id<UserId>(u), prox[u]});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.proximity != b.proximity ? a.proximity > b.proximity : a.user < b.user;
  });
  return out;
}

namespace {

struct Frequencies {
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> sf;       // (tag, item)
  std::map<std::pair<std::uint32_t, std::uint32_t>, TermFreq> tf;     // (tag, item)
};

Frequencies frequencies(const Corpus& c, const SimilarityGraph& g, std::optional<UserId> seeker,
                        const ProximityAggregator& agg) {
  Frequencies f;
  for (const auto& tr : c.triples()) ++f.tf[{index(tr.tag), index(tr.item)}];
  if (!seeker) return f;
  // Sum in visiting order: proximity desc, user id asc.
  for (const auto& visit : proximity_order(g, *seeker, agg)) {
    if (index(visit.user) >= c.num_users()) continue;
    for (const auto& tr : c.triples()) {
      if (tr.user != visit.user) continue;
      f.sf[{index(tr.tag), index(tr.item)}] += visit.proximity;
    }
  }
  return f;
}

std::string lower(std::string s) {
  for (auto& ch : s) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }
  return s;
}

}  // namespace

std::vector<Scored> full_scan(const Corpus& c, const SimilarityGraph& g, std::optional<UserId> seeker,
                              const Query& q, const EngineConfig& cfg) {
  auto f = frequencies(c, g, seeker, cfg.aggregator);
  auto h = [&](double x) { return cfg.transform == ScoreTransform::Log1p ? std::log1p(x) : x; };
  auto fr = [&](double tf, double sf) { return cfg.alpha * cfg.tf_scale * tf + (1.0 - cfg.alpha) * sf; };
  auto get_sf = [&](std::uint32_t t, std::uint32_t i) {
    auto it = f.sf.find({t, i});
    return it == f.sf.end() ? 0.0 : it->second;
  };
  auto get_tf = [&](std::uint32_t t, std::uint32_t i) -> double {
    auto it = f.tf.find({t, i});
    return it == f.tf.end() ? 0.0 : it->second;
  };

  std::vector<std::string> terms;
  for (const auto& t : q.completed_terms) {
    auto s = lower(t);
    if (!s.empty() && std::find(terms.begin(), terms.end(), s) == terms.end()) terms.push_back(s);
  }
  const std::string prefix = lower(q.active_prefix);
  std::vector<std::uint32_t> completions;
  for (std::size_t t = 0; t < c.num_tags(); ++t) {
    const auto& name = c.tag_name(make_id<TagId>(t));
    if (!prefix.empty() && name.compare(0, prefix.size(), prefix) == 0) completions.push_back(static_cast<std::uint32_t>(t));
  }

  std::vector<Scored> out;
  for (std::size_t i = 0; i < c.num_items(); ++i) {
    const auto ii = static_cast<std::uint32_t>(i);
    double score = 0.0;
    for (const auto& term : terms) {
      auto t = c.find_tag(term);
      double sf = t ? get_sf(index(*t), ii) : 0.0;
      double tf = t ? get_tf(index(*t), ii) : 0.0;
      score += h(fr(tf, sf));
    }
    if (!prefix.empty()) {
      double sf = 0.0, tf = 0.0;
      for (auto t : completions) {
        sf = std::max(sf, get_sf(t, ii));
        tf = std::max(tf, get_tf(t, ii));
      }
      score += h(fr(tf, sf));
    }
    if (score > 0.0) out.push_back({make_id<ItemId>(i), score});
  }
  std::sort(out.begin(), out.end(), [](const Scored& a, const Scored& b) {
    return a.score != b.score ? a.score > b.score : a.item < b.item;
  });
  return out;
}

std::vector<Scored> top_k(const Corpus& c, const SimilarityGraph& g, std::optional<UserId> seeker, const Query& q,
                          const EngineConfig& cfg) {
  auto all = full_scan(c, g, seeker, q, cfg);
  if (all.size() > cfg.k) all.resize(cfg.k);
  return all;
}

double social_frequency(const Corpus& c, const SimilarityGraph& g, UserId seeker, ItemId i, TagId t,
                        const ProximityAggregator& agg) {
  auto f = frequencies(c, g, seeker, agg);
  auto it = f.sf.find({index(t), index(i)});
  return it == f.sf.end() ? 0.0 : it->second;
}

std::vector<Emission> virtual_list(const Corpus& c, std::string_view prefix) {
  std::map<std::uint32_t, Emission> best;
  for (std::size_t t = 0; t < c.num_tags(); ++t) {
    const auto& name = c.tag_name(make_id<TagId>(t));
    if (name.compare(0, prefix.size(), prefix) != 0) continue;
    for (const auto& p : c.postings(make_id<TagId>(t))) {
      auto [it, inserted] = best.emplace(index(p.item), Emission{p.item, name, p.tf});
      if (inserted) continue;
      auto& e = it->second;
      if (p.tf > e.tf || (p.tf == e.tf && name < e.tag)) e = {p.item, name, p.tf};
    }
  }
  std::vector<Emission> out;
  for (auto& [_, e] : best) out.push_back(e);
  std::sort(out.begin(), out.end(), [](const Emission& a, const Emission& b) {
    return a.tf != b.tf ? a.tf > b.tf : a.item < b.item;
  });
  return out;
}

std::vector<Triple> naive_filter(const Corpus& c, std::size_t min_users_per_item, std::size_t min_items_per_user) {
  std::vector<Triple> live(c.triples().begin(), c.triples().end());
  while (true) {
    const auto before = live.size();
    std::map<std::uint32_t, std::set<std::uint32_t>> users_of;
    for (const auto& t : live) users_of[index(t.item)].insert(index(t.user));
    std::erase_if(live, [&](const Triple& t) { return users_of[index(t.item)].size() < min_users_per_item; });
    std::map<std::uint32_t, std::set<std::uint32_t>> items_of;
    for (const auto& t : live) items_of[index(t.user)].insert(index(t.item));
    std::erase_if(live, [&](const Triple& t) { return items_of[index(t.user)].size() < min_items_per_user; });
    if (live.size() == before) return live;
  }
}

}  // namespace asyt::oracle
