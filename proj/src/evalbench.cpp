#include "asyt/evalbench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "asyt/metrics.hpp"
#include "asyt/text.hpp"

namespace asyt {

using nlohmann::json;

namespace {

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

std::string graph_model_name(GraphModel m) {
  switch (m) {
    case GraphModel::SmallWorld: return "small_world";
    case GraphModel::Ring: return "ring";
    case GraphModel::Empty: return "empty";
  }
  return "?";
}

GraphModel parse_graph_model(const std::string& s) {
  if (s == "small_world") return GraphModel::SmallWorld;
  if (s == "ring") return GraphModel::Ring;
  if (s == "empty") return GraphModel::Empty;
  throw std::invalid_argument("unknown graph model: " + s);
}

EngineConfig engine_config(const ExperimentSpec& spec, double tf_scale, std::size_t k) {
  EngineConfig cfg;
  cfg.k = k;
  cfg.alpha = spec.alpha;
  cfg.tf_scale = tf_scale;
  cfg.aggregator = spec.aggregator;
  cfg.transform = spec.transform;
  cfg.time_budget = spec.time_budget;
  return cfg;
}

double resolve_tf_scale(const ExperimentSpec& spec, const PreparedDataset& data, std::span<const Trial> trials) {
  if (spec.tf_scale) return *spec.tf_scale;
  if (spec.alpha <= 0.0 || spec.alpha >= 1.0) return 1.0;
  return calibrate_tf_scale(data.corpus, data.network, trials.first(std::min<std::size_t>(trials.size(), 50)),
                            spec.aggregator);
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : (xs[m - 1] + xs[m]) / 2.0;
}

std::vector<ItemId> items_of(const TopKResult& r) {
  std::vector<ItemId> out;
  out.reserve(r.entries.size());
  for (const auto& e : r.entries) out.push_back(e.item);
  return out;
}

json record(const char* experiment, const ExperimentSpec& spec) {
  return json{{"experiment", experiment}, {"spec", to_json(spec)}};
}

}  // namespace

std::string to_string(NetworkVariant v) {
  switch (v) {
    case NetworkVariant::Social: return "social";
    case NetworkVariant::CommonNeighbors: return "common";
    case NetworkVariant::ItemTag: return "itemtag";
    case NetworkVariant::Tag: return "tag";
  }
  return "?";
}

std::optional<NetworkVariant> parse_network(std::string_view name) {
  if (name == "social") return NetworkVariant::Social;
  if (name == "common") return NetworkVariant::CommonNeighbors;
  if (name == "itemtag") return NetworkVariant::ItemTag;
  if (name == "tag") return NetworkVariant::Tag;
  return std::nullopt;
}

void validate(const ExperimentSpec& spec) {
  if (spec.sample < 1) throw std::invalid_argument("sample size must be at least 1");
  if (spec.ks.empty() || std::count(spec.ks.begin(), spec.ks.end(), 0u) > 0)
    throw std::invalid_argument("k values must be at least 1");
  if (spec.prefix_lengths.empty() || std::count(spec.prefix_lengths.begin(), spec.prefix_lengths.end(), 0u) > 0)
    throw std::invalid_argument("prefix lengths must be at least 1");
  if (spec.alpha < 0.0 || spec.alpha > 1.0) throw std::invalid_argument("alpha must lie in [0,1]");
  if (spec.tf_scale && !(*spec.tf_scale > 0.0)) throw std::invalid_argument("tf_scale must be positive");
  for (double t : spec.thetas)
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("theta must lie in [0,1]");
  if (spec.thetas.empty() && spec.theta_percentiles.empty()) throw std::invalid_argument("no theta given");
  for (double p : spec.theta_percentiles)
    if (p < 0.0 || p > 100.0) throw std::invalid_argument("theta percentile must lie in [0,100]");
  if (spec.ndcg_depth < 1) throw std::invalid_argument("ndcg depth must be at least 1");
  if (spec.chunks < 1) throw std::invalid_argument("chunks must be at least 1");
  if (spec.time_budget && spec.time_budget->count() <= 0) throw std::invalid_argument("budget must be positive");
}

json to_json(const ExperimentSpec& s) {
  json synth = {{"seed", s.synthetic.seed},
                {"n_users", s.synthetic.n_users},
                {"n_items", s.synthetic.n_items},
                {"n_tags", s.synthetic.n_tags},
                {"n_triples", s.synthetic.n_triples},
                {"graph_model", graph_model_name(s.synthetic.graph_model)},
                {"mean_degree", s.synthetic.mean_degree},
                {"rewire", s.synthetic.rewire},
                {"zipf_exponent", s.synthetic.zipf_exponent},
                {"communities", s.synthetic.communities},
                {"community_bias", s.synthetic.community_bias},
                {"topic_bias", s.synthetic.topic_bias}};
  json agg = {{"kind", s.aggregator.kind == ProximityAggregator::Kind::MaxProduct ? "max_product" : "exp_decay"},
              {"decay", s.aggregator.decay}};
  return json{{"triples", s.triples.string()},
              {"edges", s.edges.string()},
              {"cooccurrence", s.cooccurrence.string()},
              {"synthetic", synth},
              {"expand_keywords", s.expand_keywords},
              {"network", to_string(s.network)},
              {"thetas", s.thetas},
              {"theta_percentiles", s.theta_percentiles},
              {"filter", s.filter},
              {"min_users_per_item", s.min_users_per_item},
              {"min_items_per_user", s.min_items_per_user},
              {"alpha", s.alpha},
              {"tf_scale", s.tf_scale ? json(*s.tf_scale) : json(nullptr)},
              {"aggregator", agg},
              {"transform", s.transform == ScoreTransform::Identity ? "identity" : "log1p"},
              {"ks", s.ks},
              {"prefix_lengths", s.prefix_lengths},
              {"budget_ms", s.time_budget ? json(s.time_budget->count() / 1000.0) : json(nullptr)},
              {"sample", s.sample},
              {"seed", s.seed},
              {"two_word", s.two_word},
              {"min_tag_letters", s.min_tag_letters},
              {"threads", s.threads},
              {"visited_checkpoints", s.visited_checkpoints},
              {"time_checkpoints_ms", s.time_checkpoints_ms},
              {"ndcg_depth", s.ndcg_depth},
              {"chunks", s.chunks}};
}

ExperimentSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("experiment spec must be a JSON object");
  ExperimentSpec s;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "triples") s.triples = v.get<std::string>();
      else if (key == "edges") s.edges = v.get<std::string>();
      else if (key == "cooccurrence") s.cooccurrence = v.get<std::string>();
      else if (key == "synthetic") {
        for (const auto& [sk, sv] : v.items()) {
          auto& y = s.synthetic;
          if (sk == "seed") y.seed = sv.get<std::uint64_t>();
          else if (sk == "n_users") y.n_users = sv.get<std::size_t>();
          else if (sk == "n_items") y.n_items = sv.get<std::size_t>();
          else if (sk == "n_tags") y.n_tags = sv.get<std::size_t>();
          else if (sk == "n_triples") y.n_triples = sv.get<std::size_t>();
          else if (sk == "graph_model") y.graph_model = parse_graph_model(sv.get<std::string>());
          else if (sk == "mean_degree") y.mean_degree = sv.get<std::size_t>();
          else if (sk == "rewire") y.rewire = sv.get<double>();
          else if (sk == "zipf_exponent") y.zipf_exponent = sv.get<double>();
          else if (sk == "communities") y.communities = sv.get<std::size_t>();
          else if (sk == "community_bias") y.community_bias = sv.get<double>();
          else if (sk == "topic_bias") y.topic_bias = sv.get<double>();
          else throw std::invalid_argument("unknown synthetic key: " + sk);
        }
      } else if (key == "expand_keywords") s.expand_keywords = v.get<std::size_t>();
      else if (key == "network") {
        auto n = parse_network(v.get<std::string>());
        if (!n) throw std::invalid_argument("unknown network: " + v.get<std::string>());
        s.network = *n;
      } else if (key == "thetas") s.thetas = v.get<std::vector<double>>();
      else if (key == "theta_percentiles") s.theta_percentiles = v.get<std::vector<double>>();
      else if (key == "filter") s.filter = v.get<bool>();
      else if (key == "min_users_per_item") s.min_users_per_item = v.get<std::size_t>();
      else if (key == "min_items_per_user") s.min_items_per_user = v.get<std::size_t>();
      else if (key == "alpha") s.alpha = v.get<double>();
      else if (key == "tf_scale") s.tf_scale = v.is_null() ? std::nullopt : std::optional(v.get<double>());
      else if (key == "aggregator") {
        const auto kind = v.value("kind", std::string("max_product"));
        if (kind == "max_product") s.aggregator = ProximityAggregator::max_product();
        else if (kind == "exp_decay") s.aggregator = ProximityAggregator::exp_decay(v.value("decay", 1.0));
        else throw std::invalid_argument("unknown aggregator: " + kind);
      } else if (key == "transform") {
        const auto t = v.get<std::string>();
        if (t == "identity") s.transform = ScoreTransform::Identity;
        else if (t == "log1p") s.transform = ScoreTransform::Log1p;
        else throw std::invalid_argument("unknown transform: " + t);
      } else if (key == "ks") s.ks = v.get<std::vector<std::size_t>>();
      else if (key == "prefix_lengths") s.prefix_lengths = v.get<std::vector<std::size_t>>();
      else if (key == "budget_ms") {
        if (v.is_null()) s.time_budget.reset();
        else s.time_budget = std::chrono::microseconds(std::llround(v.get<double>() * 1000.0));
      } else if (key == "sample") s.sample = v.get<std::size_t>();
      else if (key == "seed") s.seed = v.get<std::uint64_t>();
      else if (key == "two_word") s.two_word = v.get<bool>();
      else if (key == "min_tag_letters") s.min_tag_letters = v.get<std::size_t>();
      else if (key == "threads") s.threads = v.get<unsigned>();
      else if (key == "visited_checkpoints") s.visited_checkpoints = v.get<std::vector<std::size_t>>();
      else if (key == "time_checkpoints_ms") s.time_checkpoints_ms = v.get<std::vector<double>>();
      else if (key == "ndcg_depth") s.ndcg_depth = v.get<std::size_t>();
      else if (key == "chunks") s.chunks = v.get<std::size_t>();
      else throw std::invalid_argument("unknown spec key: " + key);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(fmt::format("bad experiment spec: {}", e.what()));
  }
  return s;
}

// ---------------------------------------------------------------------------

SimilarityGraph remap_graph(const SimilarityGraph& g, const Corpus& from, const Corpus& to) {
  std::unordered_map<std::string, std::uint32_t> extra_ids;
  std::vector<std::string> extra;
  std::vector<std::uint32_t> id_of(g.num_nodes(), kNoIndex);
  auto map = [&](UserId u) {
    auto& slot = id_of[index(u)];
    if (slot != kNoIndex) return slot;
    const auto name = user_display_name(u, from, g);
    if (auto id = to.find_user(name)) {
      slot = index(*id);
    } else {
      auto [it, fresh] = extra_ids.emplace(name, static_cast<std::uint32_t>(to.num_users() + extra.size()));
      if (fresh) extra.push_back(name);
      slot = it->second;
    }
    return slot;
  };
  std::vector<WeightedEdge> edges;
  for (const auto& e : g.edges()) edges.push_back({make_id<UserId>(map(e.a)), make_id<UserId>(map(e.b)), e.weight});
  auto out = SimilarityGraph::from_edges(to.num_users() + extra.size(), edges);
  out.set_extra_names(std::move(extra));
  return out;
}

double weight_percentile(const SimilarityGraph& g, double p) {
  auto w = g.weights();
  if (w.empty() || p <= 0.0) return 0.0;
  std::sort(w.begin(), w.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(w.size())));
  return w[std::clamp<std::size_t>(rank, 1, w.size()) - 1];
}

std::vector<double> resolve_thetas(const ExperimentSpec& spec, const SimilarityGraph& network) {
  if (spec.theta_percentiles.empty()) return spec.thetas;
  std::vector<double> out;
  for (double p : spec.theta_percentiles) out.push_back(weight_percentile(network, p));
  return out;
}

PreparedDataset prepare_dataset(const ExperimentSpec& spec) {
  validate(spec);
  PreparedDataset out;
  Corpus raw;
  SimilarityGraph source;
  if (!spec.triples.empty()) {
    std::optional<CooccurrenceTable> cooc;
    if (!spec.cooccurrence.empty()) {
      std::ifstream in(spec.cooccurrence);
      if (!in) throw std::runtime_error("cannot open " + spec.cooccurrence.string());
      cooc = read_cooccurrence(in, &out.diagnostics);
    }
    auto loaded = load_triples_file(spec.triples, std::move(cooc));
    raw = std::move(loaded.corpus);
    out.diagnostics.insert(out.diagnostics.end(), loaded.diagnostics.begin(), loaded.diagnostics.end());
    if (!spec.edges.empty()) {
      auto g = load_edges_file(spec.edges, raw);
      source = std::move(g.graph);
      out.diagnostics.insert(out.diagnostics.end(), g.diagnostics.begin(), g.diagnostics.end());
    }
  } else {
    auto synth = generate_synthetic(spec.synthetic);
    raw = std::move(synth.corpus);
    source = std::move(synth.graph);
  }
  out.raw_triples = raw.num_triples();

  Corpus expanded = expand_tags(raw, spec.expand_keywords);
  out.corpus = spec.filter ? filter_corpus(expanded, spec.min_users_per_item, spec.min_items_per_user)
                           : std::move(expanded);
  switch (spec.network) {
    case NetworkVariant::Social: out.network = remap_graph(source, raw, out.corpus); break;
    case NetworkVariant::CommonNeighbors:
      out.network = dice_common_neighbors(remap_graph(source, raw, out.corpus));
      break;
    case NetworkVariant::ItemTag: out.network = dice_item_tag_pairs(out.corpus); break;
    case NetworkVariant::Tag: out.network = dice_tags(out.corpus); break;
  }
  out.index = CtIlIndex::build(out.corpus);
  return out;
}

std::vector<Trial> sample_trials(const Corpus& c, const ExperimentSpec& spec) {
  std::unordered_map<std::uint32_t, std::vector<TagId>> item_tags;
  if (spec.two_word) {
    for (TagId t : c.vocab())
      for (const auto& p : c.postings(t)) item_tags[index(p.item)].push_back(t);
  }
  std::vector<std::size_t> eligible;
  const auto triples = c.triples();
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& tr = triples[i];
    if (text::scalar_count(c.tag_name(tr.tag)) < spec.min_tag_letters) continue;
    if (spec.two_word && item_tags[index(tr.item)].size() < 2) continue;
    eligible.push_back(i);
  }
  if (eligible.empty()) throw std::invalid_argument("corpus too small to sample: no eligible triple");

  std::mt19937_64 rng(spec.seed);
  const std::size_t n = std::min(spec.sample, eligible.size());
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, eligible.size() - 1);
    std::swap(eligible[i], eligible[pick(rng)]);
  }
  std::vector<Trial> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& tr = triples[eligible[i]];
    Trial t{tr.user, tr.item, tr.tag, std::nullopt};
    if (spec.two_word) {
      std::vector<TagId> others;
      for (TagId o : item_tags[index(tr.item)])
        if (o != tr.tag) others.push_back(o);
      std::uniform_int_distribution<std::size_t> pick(0, others.size() - 1);
      t.filter_tag = others[pick(rng)];
    }
    out.push_back(t);
  }
  return out;
}

Query trial_query(const Corpus& c, const Trial& t, std::size_t prefix_length) {
  const auto& name = c.tag_name(t.tag);
  return Query{{}, name.substr(0, text::scalar_prefix_bytes(name, prefix_length))};
}

Corpus trial_corpus(const Corpus& c, const Trial& t) {
  std::unordered_set<ItemId> allowed;
  if (t.filter_tag)
    for (const auto& p : c.postings(*t.filter_tag)) allowed.insert(p.item);
  return c.subset([&](const Triple& tr) {
    if (tr.user == t.seeker && tr.item == t.item && tr.tag == t.tag) return false;
    return !t.filter_tag || allowed.contains(tr.item);
  });
}

double calibrate_tf_scale(const Corpus& c, const SimilarityGraph& g, std::span<const Trial> trials,
                          const ProximityAggregator& agg) {
  double sf_total = 0.0, tf_total = 0.0;
  std::size_t sf_n = 0, tf_n = 0;
  std::set<std::pair<std::uint32_t, std::uint32_t>> done;
  for (const auto& t : trials) {
    if (!done.emplace(index(t.seeker), index(t.tag)).second) continue;
    for (const auto& p : c.postings(t.tag)) {
      tf_total += p.tf;
      ++tf_n;
    }
    if (!g.contains(t.seeker)) continue;
    std::unordered_map<ItemId, double> sf;
    ProximityIterator it(g, t.seeker, agg);
    while (auto e = it.next()) {
      for (const auto& ps : c.p_space(e->user))
        if (ps.tag == t.tag) sf[ps.item] += e->proximity;
    }
    for (const auto& [item, v] : sf) {
      if (v > 0.0) {
        sf_total += v;
        ++sf_n;
      }
    }
  }
  if (sf_n == 0 || tf_n == 0 || tf_total == 0.0) return 1.0;
  return (sf_total / static_cast<double>(sf_n)) / (tf_total / static_cast<double>(tf_n));
}

// ---------------------------------------------------------------------------

PrecisionReport leave_one_out_precision(const ExperimentSpec& spec, const PreparedDataset& data) {
  validate(spec);
  const auto trials = sample_trials(data.corpus, spec);
  const auto thetas = resolve_thetas(spec, data.network);
  std::vector<SimilarityGraph> graphs;
  for (double th : thetas) graphs.push_back(filter_edges(data.network, th));

  PrecisionReport report;
  report.tf_scale = resolve_tf_scale(spec, data, trials);
  const std::size_t kmax = *std::max_element(spec.ks.begin(), spec.ks.end());
  const auto cfg = engine_config(spec, report.tf_scale, kmax);

  report.ranks.assign(thetas.size(), std::vector<std::vector<std::optional<std::size_t>>>(
                                         spec.prefix_lengths.size(),
                                         std::vector<std::optional<std::size_t>>(trials.size())));
  parallel_for(trials.size(), spec.threads, [&](std::size_t ti) {
    const auto& trial = trials[ti];
    const Corpus corpus = trial_corpus(data.corpus, trial);
    const CtIlIndex index = CtIlIndex::build(corpus);
    for (std::size_t g = 0; g < graphs.size(); ++g) {
      for (std::size_t li = 0; li < spec.prefix_lengths.size(); ++li) {
        const auto q = trial_query(data.corpus, trial, spec.prefix_lengths[li]);
        const auto r = execute(corpus, index, graphs[g], trial.seeker, q, cfg);
        for (std::size_t pos = 0; pos < r.entries.size(); ++pos) {
          if (r.entries[pos].item == trial.item) {
            report.ranks[g][li][ti] = pos;
            break;
          }
        }
      }
    }
  });

  for (std::size_t g = 0; g < thetas.size(); ++g) {
    for (std::size_t li = 0; li < spec.prefix_lengths.size(); ++li) {
      for (std::size_t k : spec.ks) {
        report.cells.push_back(
            {thetas[g], spec.prefix_lengths[li], k, precision_at(report.ranks[g][li], k), trials.size()});
      }
    }
  }
  return report;
}

PrecisionReport leave_one_out_precision(const ExperimentSpec& spec) {
  return leave_one_out_precision(spec, prepare_dataset(spec));
}

NdcgTrace ndcg_trace(const ExperimentSpec& spec, const PreparedDataset& data) {
  validate(spec);
  const auto trials = sample_trials(data.corpus, spec);
  const auto graph = filter_edges(data.network, resolve_thetas(spec, data.network).front());
  NdcgTrace trace;
  trace.tf_scale = resolve_tf_scale(spec, data, trials);
  auto exact_cfg = engine_config(spec, trace.tf_scale, spec.ndcg_depth);
  exact_cfg.time_budget.reset();

  auto checkpoints = spec.visited_checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  const auto& times = spec.time_checkpoints_ms;

  for (std::size_t l : spec.prefix_lengths) {
    // Per trial: NDCG at each visited checkpoint, each time checkpoint, and at
    // termination.
    std::vector<std::vector<double>> by_visit(trials.size()), by_time(trials.size());
    std::vector<double> final_ndcg(trials.size());
    parallel_for(trials.size(), spec.threads, [&](std::size_t ti) {
      const auto q = trial_query(data.corpus, trials[ti], l);
      const auto seeker = trials[ti].seeker;
      const auto exact = items_of(execute(data.corpus, data.index, graph, seeker, q, exact_cfg));

      auto& visits = by_visit[ti];
      Session s(data.corpus, data.index, graph, seeker, exact_cfg);
      s.set_query(q);
      auto sample = [&](const Session& cur) {
        while (visits.size() < checkpoints.size() && cur.visited_users() >= checkpoints[visits.size()]) {
          visits.push_back(ndcg_at(items_of(cur.anytime_topk()), exact, spec.ndcg_depth));
        }
      };
      sample(s);
      s.set_observer(sample);
      const auto done = s.run();
      const double last = ndcg_at(items_of(done), exact, spec.ndcg_depth);
      visits.resize(checkpoints.size(), last);
      final_ndcg[ti] = last;

      // Wall-clock checkpoints cannot ride on a single run; each is its own
      // budgeted run.
      for (double ms : times) {
        auto cfg = exact_cfg;
        cfg.time_budget = std::chrono::microseconds(std::llround(ms * 1000.0));
        by_time[ti].push_back(ndcg_at(items_of(execute(data.corpus, data.index, graph, seeker, q, cfg)), exact,
                                      spec.ndcg_depth));
      }
    });

    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      std::vector<double> xs;
      for (const auto& v : by_visit) xs.push_back(v[c]);
      trace.points.push_back({l, "visited", static_cast<double>(checkpoints[c]), mean(xs), trials.size()});
    }
    for (std::size_t c = 0; c < times.size(); ++c) {
      std::vector<double> xs;
      for (const auto& v : by_time) xs.push_back(v[c]);
      trace.points.push_back({l, "time_ms", times[c], mean(xs), trials.size()});
    }
    trace.points.push_back({l, "final", 0.0, mean(final_ndcg), trials.size()});
  }
  return trace;
}

NdcgTrace ndcg_trace(const ExperimentSpec& spec) { return ndcg_trace(spec, prepare_dataset(spec)); }

std::vector<ScaleCell> scalability_sweep(const ExperimentSpec& spec, const PreparedDataset& data) {
  validate(spec);
  const auto graph = filter_edges(data.network, resolve_thetas(spec, data.network).front());
  const std::size_t total = data.corpus.num_triples();

  // Queries come from the first chunk so every chunk can answer them.
  const std::size_t first_n = (total + spec.chunks - 1) / spec.chunks;
  auto head = [&](std::size_t n) {
    std::size_t taken = 0;
    return data.corpus.subset([&](const Triple&) { return taken++ < n; });
  };
  const auto trials = sample_trials(head(first_n), spec);
  const double tf_scale = resolve_tf_scale(spec, data, trials);
  auto cfg = engine_config(spec, tf_scale, *std::max_element(spec.ks.begin(), spec.ks.end()));
  cfg.time_budget.reset();

  std::vector<ScaleCell> cells;
  std::vector<double> first_mean(spec.prefix_lengths.size(), 0.0);
  for (std::size_t chunk = 1; chunk <= spec.chunks; ++chunk) {
    const std::size_t n = (total * chunk + spec.chunks - 1) / spec.chunks;
    const Corpus corpus = head(n);
    const CtIlIndex index = CtIlIndex::build(corpus);
    for (std::size_t li = 0; li < spec.prefix_lengths.size(); ++li) {
      std::vector<double> ms;
      for (const auto& t : trials) {
        const auto q = trial_query(corpus, t, spec.prefix_lengths[li]);
        const auto start = std::chrono::steady_clock::now();
        execute(corpus, index, graph, t.seeker, q, cfg);
        ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
      }
      ScaleCell cell{chunk, n, spec.prefix_lengths[li], mean(ms), median(ms), 1.0, ms.size()};
      if (chunk == 1) first_mean[li] = cell.mean_ms;
      if (first_mean[li] > 0.0) cell.ratio_to_first = cell.mean_ms / first_mean[li];
      cells.push_back(cell);
    }
  }
  return cells;
}

std::vector<ScaleCell> scalability_sweep(const ExperimentSpec& spec) {
  return scalability_sweep(spec, prepare_dataset(spec));
}

void serve_prep(const ExperimentSpec& spec, const std::filesystem::path& dir) {
  const auto data = prepare_dataset(spec);
  const double theta = resolve_thetas(spec, data.network).front();
  const auto graph = filter_edges(data.network, theta);
  double tf_scale = spec.tf_scale.value_or(1.0);
  if (!spec.tf_scale && spec.alpha > 0.0 && spec.alpha < 1.0) {
    const auto trials = sample_trials(data.corpus, spec);
    tf_scale = calibrate_tf_scale(data.corpus, graph, std::span(trials).first(std::min<std::size_t>(trials.size(), 50)),
                                  spec.aggregator);
  }

  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", (dir / name).string()));
    return out;
  };
  {
    auto out = open("triples.tsv");
    write_triples(out, data.corpus);
  }
  {
    auto out = open("edges.tsv");
    write_edges(out, graph, data.corpus);
  }
  auto conf = open("service.conf");
  conf << "# prepared dataset; already expanded, filtered and thresholded\n"
       << "triples=" << (dir / "triples.tsv").string() << '\n'
       << "edges=" << (dir / "edges.tsv").string() << '\n'
       << "network=social\n"
       << "theta=0\n"
       << "filter=false\n"
       << fmt::format("tf_scale={:.17g}\n", tf_scale) << fmt::format("default_alpha={:.17g}\n", spec.alpha)
       << "default_k=10\n"
       << "default_budget_ms=50\n";
}

void write_report(std::ostream& out, const ExperimentSpec& spec, const PrecisionReport& r) {
  for (const auto& c : r.cells) {
    auto j = record("precision", spec);
    j["theta"] = c.theta;
    j["l"] = c.prefix_length;
    j["k"] = c.k;
    j["p_at_k"] = c.precision;
    j["trials"] = c.trials;
    j["tf_scale"] = r.tf_scale;
    out << j.dump() << '\n';
  }
}

void write_report(std::ostream& out, const ExperimentSpec& spec, const NdcgTrace& t) {
  for (const auto& p : t.points) {
    auto j = record("ndcg", spec);
    j["l"] = p.prefix_length;
    j["axis"] = p.axis;
    j["at"] = p.at;
    j["ndcg"] = p.ndcg;
    j["queries"] = p.queries;
    j["tf_scale"] = t.tf_scale;
    out << j.dump() << '\n';
  }
}

void write_report(std::ostream& out, const ExperimentSpec& spec, std::span<const ScaleCell> cells) {
  for (const auto& c : cells) {
    auto j = record("scale", spec);
    j["chunk"] = c.chunk;
    j["triples"] = c.triples;
    j["l"] = c.prefix_length;
    j["mean_ms"] = c.mean_ms;
    j["median_ms"] = c.median_ms;
    j["ratio_to_first"] = c.ratio_to_first;
    j["queries"] = c.queries;
    out << j.dump() << '\n';
  }
}

}  // namespace asyt
