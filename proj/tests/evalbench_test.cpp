#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <unistd.h>

#include "asyt/evalbench.hpp"
#include "support/fixtures.hpp"
#include "support/oracle.hpp"

using namespace asyt;

namespace {

PreparedDataset dataset_from(const char* triples, const char* edges) {
  std::istringstream tin(triples), ein(edges);
  PreparedDataset d;
  d.corpus = ingest_triples(tin).corpus;
  d.network = read_edges(ein, d.corpus).graph;
  d.index = CtIlIndex::build(d.corpus);
  d.raw_triples = d.corpus.num_triples();
  return d;
}

ExperimentSpec small_synthetic() {
  ExperimentSpec s;
  s.synthetic.n_users = 200;
  s.synthetic.n_items = 300;
  s.synthetic.n_tags = 80;
  s.synthetic.n_triples = 4000;
  s.synthetic.communities = 8;
  s.sample = 60;
  s.prefix_lengths = {1, 2, 3};
  s.ks = {1, 5, 10};
  return s;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / fmt::format("asyt_{}_{}", name, ::getpid());
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Evalbench, SelfOnlyTaggerIsNeverRetrieved) {
  // Only Alice's triple has a tag long enough to be sampled.
  auto d = dataset_from("Alice\ti1\tstreet\nBob\ti2\tab\nBob\ti1\tab\n", "Alice\tBob\t1.0\n");
  ExperimentSpec s;
  s.sample = 5;
  s.ks = {1, 5, 20};
  s.prefix_lengths = {1, 3, 6};
  auto r = leave_one_out_precision(s, d);
  for (const auto& c : r.cells) {
    EXPECT_EQ(c.trials, 1u);
    EXPECT_EQ(c.precision, 0.0);
  }
}

TEST(Evalbench, SaturatedCaseHitsEveryTime) {
  auto d = dataset_from(
      "u0\ti0\tstreet\nu1\ti0\tstreet\nu2\ti1\tstreet\nu3\ti1\tstreet\n"
      "u0\ti1\tstyle\nu2\ti0\tstyle\nu1\ti1\tstyle\nu3\ti0\tstyle\n",
      "u0\tu1\t1.0\nu2\tu3\t1.0\n");
  ExperimentSpec s;
  s.sample = 100;
  s.ks = {5};
  s.prefix_lengths = {1, 2, 3};
  auto r = leave_one_out_precision(s, d);
  for (const auto& c : r.cells) {
    EXPECT_EQ(c.trials, 8u);
    EXPECT_EQ(c.precision, 1.0) << "l=" << c.prefix_length;
  }
}

TEST(Evalbench, PerTrialRankMatchesOracle) {
  auto s = small_synthetic();
  s.sample = 800;
  s.alpha = 0.5;
  s.ks = {1, 5, 10};
  const auto d = prepare_dataset(s);
  const auto r = leave_one_out_precision(s, d);
  const auto trials = sample_trials(d.corpus, s);
  ASSERT_EQ(trials.size(), 800u);
  EngineConfig cfg;
  cfg.k = 10;
  cfg.alpha = s.alpha;
  cfg.tf_scale = r.tf_scale;
  cfg.time_budget.reset();
  for (std::size_t ti = 0; ti < trials.size(); ++ti) {
    const auto corpus = trial_corpus(d.corpus, trials[ti]);
    for (std::size_t li = 0; li < s.prefix_lengths.size(); ++li) {
      const auto truth = oracle::top_k(corpus, d.network, trials[ti].seeker,
                                       trial_query(d.corpus, trials[ti], s.prefix_lengths[li]), cfg);
      std::optional<std::size_t> want;
      for (std::size_t p = 0; p < truth.size(); ++p)
        if (truth[p].item == trials[ti].item) want = p;
      ASSERT_EQ(r.ranks[0][li][ti], want) << "trial " << ti << " l=" << s.prefix_lengths[li];
    }
  }
  for (const auto& c : r.cells) {
    std::vector<std::optional<std::size_t>> ranks = r.ranks[0][c.prefix_length - 1];
    std::size_t hits = 0;
    for (const auto& x : ranks) hits += x && *x < c.k;
    EXPECT_DOUBLE_EQ(c.precision, static_cast<double>(hits) / 800.0);
  }
}

TEST(Evalbench, PrecisionMonotoneInK) {
  auto s = small_synthetic();
  s.ks = {1, 5, 20};
  const auto r = leave_one_out_precision(s);
  for (std::size_t i = 0; i + 2 < r.cells.size(); i += 3) {
    EXPECT_LE(r.cells[i].precision, r.cells[i + 1].precision);
    EXPECT_LE(r.cells[i + 1].precision, r.cells[i + 2].precision);
    for (std::size_t j = i; j < i + 3; ++j) {
      EXPECT_GE(r.cells[j].precision, 0.0);
      EXPECT_LE(r.cells[j].precision, 1.0);
    }
  }
}

TEST(Evalbench, ReportsAreSeedDeterministic) {
  auto s = small_synthetic();
  s.alpha = 0.3;
  s.threads = 1;
  std::ostringstream a, b, c;
  write_report(a, s, leave_one_out_precision(s));
  s.threads = 4;
  write_report(b, s, leave_one_out_precision(s));
  s.threads = 1;
  write_report(c, s, leave_one_out_precision(s));
  EXPECT_EQ(a.str(), c.str());
  // The thread count is echoed, so compare the measured fields only.
  std::istringstream ia(a.str()), ib(b.str());
  std::string la, lb;
  while (std::getline(ia, la) && std::getline(ib, lb)) {
    auto ja = nlohmann::json::parse(la), jb = nlohmann::json::parse(lb);
    ja.erase("spec");
    jb.erase("spec");
    EXPECT_EQ(ja, jb);
  }
}

TEST(Evalbench, ThetaSweepUsesPercentiles) {
  auto s = small_synthetic();
  s.theta_percentiles = {0, 33, 66};
  const auto d = prepare_dataset(s);
  const auto thetas = resolve_thetas(s, d.network);
  ASSERT_EQ(thetas.size(), 3u);
  EXPECT_EQ(thetas[0], 0.0);
  EXPECT_LT(thetas[1], thetas[2]);
  const double kept = static_cast<double>(filter_edges(d.network, thetas[1]).num_edges());
  EXPECT_NEAR(kept / static_cast<double>(d.network.num_edges()), 0.67, 0.02);
}

TEST(Evalbench, WeightPercentileNearestRank) {
  std::vector<WeightedEdge> e;
  for (int i = 0; i < 10; ++i) e.push_back({make_id<UserId>(i), make_id<UserId>(i + 1), 0.1 * (i + 1)});
  auto g = SimilarityGraph::from_edges(11, e);
  EXPECT_EQ(weight_percentile(g, 0), 0.0);
  EXPECT_DOUBLE_EQ(weight_percentile(g, 30), 0.30000000000000004);
  EXPECT_DOUBLE_EQ(weight_percentile(g, 100), 1.0);
  EXPECT_EQ(weight_percentile(SimilarityGraph{}, 50), 0.0);
}

TEST(Evalbench, TooSmallCorpusIsAnError) {
  auto d = dataset_from("a\ti\tab\n", "");
  ExperimentSpec s;
  EXPECT_THROW(leave_one_out_precision(s, d), std::invalid_argument);
}

TEST(Evalbench, TwoWordTrialsFilterByTheOtherTag) {
  auto s = small_synthetic();
  s.two_word = true;
  const auto d = prepare_dataset(s);
  const auto trials = sample_trials(d.corpus, s);
  ASSERT_FALSE(trials.empty());
  for (const auto& t : trials) {
    ASSERT_TRUE(t.filter_tag);
    EXPECT_NE(*t.filter_tag, t.tag);
    EXPECT_GT(d.corpus.tf(*t.filter_tag, t.item), 0u);
    const auto c = trial_corpus(d.corpus, t);
    EXPECT_EQ(c.num_triples() + 1 <= d.corpus.num_triples(), true);
    for (const auto& tr : c.triples()) EXPECT_GT(c.tf(*t.filter_tag, tr.item), 0u);
  }
  const auto r = leave_one_out_precision(s, d);
  EXPECT_EQ(r.cells.front().trials, trials.size());
}

TEST(Evalbench, NdcgEndsAtOneAndStartsEmpty) {
  auto s = small_synthetic();
  s.sample = 30;
  s.time_checkpoints_ms = {0.001, 1000};
  const auto t = ndcg_trace(s);
  for (const auto& p : t.points) {
    EXPECT_GE(p.ndcg, 0.0);
    EXPECT_LE(p.ndcg, 1.0);
    if (p.axis == "final") EXPECT_EQ(p.ndcg, 1.0);
    if (p.axis == "visited" && p.at == 0) EXPECT_EQ(p.ndcg, 0.0);
    if (p.axis == "time_ms" && p.at == 1000) EXPECT_EQ(p.ndcg, 1.0);
  }
}

TEST(Evalbench, NdcgNonDecreasingInVisitedUsers) {
  auto s = small_synthetic();
  s.sample = 100;
  s.prefix_lengths = {2};
  const auto t = ndcg_trace(s);
  double prev = -1.0;
  for (const auto& p : t.points) {
    if (p.axis != "visited") continue;
    EXPECT_GE(p.ndcg, prev) << "at " << p.at;
    prev = p.ndcg;
  }
}

TEST(Evalbench, ScalabilitySingleChunk) {
  auto s = small_synthetic();
  s.chunks = 1;
  s.sample = 10;
  const auto cells = scalability_sweep(s);
  ASSERT_EQ(cells.size(), s.prefix_lengths.size());
  for (const auto& c : cells) {
    EXPECT_EQ(c.chunk, 1u);
    EXPECT_EQ(c.ratio_to_first, 1.0);
  }
}

TEST(Evalbench, ScalabilityTimingsArePositive) {
  auto s = small_synthetic();
  s.sample = 10;
  const auto cells = scalability_sweep(s);
  ASSERT_EQ(cells.size(), 5 * s.prefix_lengths.size());
  std::size_t prev = 0;
  for (const auto& c : cells) {
    EXPECT_GT(c.mean_ms, 0.0);
    EXPECT_TRUE(std::isfinite(c.mean_ms));
    EXPECT_TRUE(std::isfinite(c.ratio_to_first));
    EXPECT_GE(c.triples, prev);
    prev = c.triples;
  }
  EXPECT_EQ(cells.back().triples, prepare_dataset(s).corpus.num_triples());
}

TEST(Evalbench, SpecJsonRoundTrip) {
  ExperimentSpec s;
  s.triples = "/data/t.tsv";
  s.network = NetworkVariant::ItemTag;
  s.thetas = {0.1, 0.2};
  s.alpha = 0.25;
  s.tf_scale = 0.5;
  s.aggregator = ProximityAggregator::exp_decay(0.5);
  s.transform = ScoreTransform::Log1p;
  s.time_budget = std::chrono::milliseconds(50);
  s.two_word = true;
  s.synthetic.graph_model = GraphModel::Ring;
  const auto j = to_json(s);
  EXPECT_EQ(to_json(spec_from_json(j)), j);
  EXPECT_EQ(j["budget_ms"], 50.0);
  EXPECT_THROW(spec_from_json(nlohmann::json{{"bogus", 1}}), std::invalid_argument);
  EXPECT_THROW(spec_from_json(nlohmann::json{{"alpha", "x"}}), std::invalid_argument);
}

TEST(Evalbench, ReportEchoesSpec) {
  auto d = dataset_from("Alice\ti1\tstreet\nBob\ti2\tab\n", "");
  ExperimentSpec s;
  s.ks = {5};
  s.prefix_lengths = {2};
  std::ostringstream out;
  write_report(out, s, leave_one_out_precision(s, d));
  auto j = nlohmann::json::parse(out.str());
  EXPECT_EQ(j["experiment"], "precision");
  EXPECT_EQ(j["spec"], to_json(s));
  EXPECT_EQ(j["k"], 5);
  EXPECT_EQ(j["l"], 2);
}

TEST(Evalbench, RemapGraphFollowsNames) {
  auto d = asyt::testing::running_example();
  auto filtered = filter_corpus(d.corpus, 1, 2);
  auto g = remap_graph(d.graph, d.corpus, filtered);
  ASSERT_EQ(g.num_edges(), d.graph.num_edges());
  for (const auto& e : g.edges()) {
    const auto a = user_display_name(e.a, filtered, g), b = user_display_name(e.b, filtered, g);
    bool found = false;
    for (const auto& o : d.graph.edges()) {
      const auto oa = user_display_name(o.a, d.corpus, d.graph), ob = user_display_name(o.b, d.corpus, d.graph);
      if (((oa == a && ob == b) || (oa == b && ob == a)) && o.weight == e.weight) found = true;
    }
    EXPECT_TRUE(found) << a << " " << b;
  }
}

TEST(Evalbench, ServePrepWritesLoadableFiles) {
  auto s = small_synthetic();
  s.theta_percentiles = {33};
  const auto dir = scratch_dir("serveprep");
  serve_prep(s, dir);
  auto loaded = load_triples_file(dir / "triples.tsv");
  const auto d = prepare_dataset(s);
  EXPECT_EQ(loaded.corpus.num_triples(), d.corpus.num_triples());
  auto g = load_edges_file(dir / "edges.tsv", loaded.corpus);
  EXPECT_EQ(g.graph.num_edges(), filter_edges(d.network, resolve_thetas(s, d.network)[0]).num_edges());
  std::ifstream conf(dir / "service.conf");
  std::string all((std::istreambuf_iterator<char>(conf)), {});
  EXPECT_NE(all.find("triples="), std::string::npos);
  EXPECT_NE(all.find("edges="), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Evalbench, InvalidSpecRejected) {
  ExperimentSpec s;
  s.sample = 0;
  EXPECT_THROW(validate(s), std::invalid_argument);
  s = {};
  s.prefix_lengths = {0};
  EXPECT_THROW(validate(s), std::invalid_argument);
  s = {};
  s.thetas = {1.5};
  EXPECT_THROW(validate(s), std::invalid_argument);
}
