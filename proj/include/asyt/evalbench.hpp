#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "asyt/corpus.hpp"
#include "asyt/ctil.hpp"
#include "asyt/engine.hpp"
#include "asyt/social_graph.hpp"
#include "asyt/synthetic.hpp"

namespace asyt {

enum class NetworkVariant {
  Social,           // edge file weights as given
  CommonNeighbors,  // Dice over neighbour sets of the edge file graph
  ItemTag,          // Dice over (item, tag) pairs
  Tag,              // Dice over tag sets
};

std::string to_string(NetworkVariant v);
std::optional<NetworkVariant> parse_network(std::string_view name);

struct ExperimentSpec {
  // Data source: files when `triples` is set, otherwise the synthetic spec.
  std::filesystem::path triples;
  std::filesystem::path edges;
  std::filesystem::path cooccurrence;
  SyntheticSpec synthetic;
  std::size_t expand_keywords = 5;

  NetworkVariant network = NetworkVariant::Social;
  std::vector<double> thetas = {0.0};
  // When non-empty, replaces `thetas` by these edge-weight percentiles.
  std::vector<double> theta_percentiles;

  bool filter = true;
  std::size_t min_users_per_item = 2;  // eta_u(i)
  std::size_t min_items_per_user = 2;  // eta_i(u)

  double alpha = 0.0;
  std::optional<double> tf_scale;  // calibrated when unset and 0 < alpha < 1
  ProximityAggregator aggregator;
  ScoreTransform transform = ScoreTransform::Identity;
  std::vector<std::size_t> ks = {1, 5, 10, 20};
  std::vector<std::size_t> prefix_lengths = {1, 2, 3, 4, 5};
  std::optional<std::chrono::microseconds> time_budget;  // unbounded by default

  std::size_t sample = 100;
  std::uint64_t seed = 1;
  bool two_word = false;
  std::size_t min_tag_letters = 3;
  unsigned threads = 0;  // 0 picks the hardware concurrency

  // NDCG checkpoints.
  std::vector<std::size_t> visited_checkpoints = {0, 1, 2, 5, 10, 20, 50, 100, 200, 500, 1000};
  std::vector<double> time_checkpoints_ms = {};
  std::size_t ndcg_depth = 20;

  // Scalability sweep.
  std::size_t chunks = 5;
};

// Throws std::invalid_argument when a field is out of range.
void validate(const ExperimentSpec& spec);
nlohmann::json to_json(const ExperimentSpec& spec);
// Missing keys keep their defaults; throws std::invalid_argument on unknown
// keys or wrong types.
ExperimentSpec spec_from_json(const nlohmann::json& j);

// Corpus after expansion and filtering, the chosen network remapped onto it
// (before theta), and the index.
struct PreparedDataset {
  Corpus corpus;
  SimilarityGraph network;
  CtIlIndex index;
  std::size_t raw_triples = 0;
  std::vector<Diagnostic> diagnostics;
};

PreparedDataset prepare_dataset(const ExperimentSpec& spec);

// Same graph over the node names of `to`; nodes unknown there become extra
// nodes.
SimilarityGraph remap_graph(const SimilarityGraph& g, const Corpus& from, const Corpus& to);

// Edge weight at percentile p in [0, 100] (nearest rank); 0 for an empty graph.
double weight_percentile(const SimilarityGraph& g, double p);
std::vector<double> resolve_thetas(const ExperimentSpec& spec, const SimilarityGraph& network);

// One leave-one-out trial: triple (seeker, item, tag), plus the filter tag in
// two-word mode.
struct Trial {
  UserId seeker;
  ItemId item;
  TagId tag;
  std::optional<TagId> filter_tag;
};

// Seed-deterministic sample of triples whose tag has at least
// `min_tag_letters` scalars. Throws std::invalid_argument when none qualify.
std::vector<Trial> sample_trials(const Corpus& c, const ExperimentSpec& spec);

// mean sf over items with sf > 0 at alpha = 0, divided by mean tf, over the
// full tags of the sampled trials. 1 when no social signal is found.
double calibrate_tf_scale(const Corpus& c, const SimilarityGraph& g, std::span<const Trial> trials,
                          const ProximityAggregator& agg);

struct PrecisionCell {
  double theta = 0.0;
  std::size_t prefix_length = 0;
  std::size_t k = 0;
  double precision = 0.0;
  std::size_t trials = 0;
};

struct PrecisionReport {
  double tf_scale = 1.0;
  std::vector<PrecisionCell> cells;
  // Zero-based rank of the target per (theta, l, trial), nullopt when missed.
  std::vector<std::vector<std::vector<std::optional<std::size_t>>>> ranks;
};

PrecisionReport leave_one_out_precision(const ExperimentSpec& spec, const PreparedDataset& data);
PrecisionReport leave_one_out_precision(const ExperimentSpec& spec);

// Query of one trial at prefix length l.
Query trial_query(const Corpus& c, const Trial& t, std::size_t prefix_length);
// Corpus a trial searches: the triple removed, and in two-word mode only the
// items carrying the filter tag.
Corpus trial_corpus(const Corpus& c, const Trial& t);

struct NdcgPoint {
  std::size_t prefix_length = 0;
  std::string axis;  // "visited", "time_ms" or "final"
  double at = 0.0;
  double ndcg = 0.0;
  std::size_t queries = 0;
};

struct NdcgTrace {
  double tf_scale = 1.0;
  std::vector<NdcgPoint> points;
};

NdcgTrace ndcg_trace(const ExperimentSpec& spec, const PreparedDataset& data);
NdcgTrace ndcg_trace(const ExperimentSpec& spec);

struct ScaleCell {
  std::size_t chunk = 0;  // 1-based, cumulative
  std::size_t triples = 0;
  std::size_t prefix_length = 0;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double ratio_to_first = 1.0;  // mean_ms over the first chunk's mean_ms
  std::size_t queries = 0;
};

// Time to the exact top-k on cumulative line-order chunks of the triples.
std::vector<ScaleCell> scalability_sweep(const ExperimentSpec& spec, const PreparedDataset& data);
std::vector<ScaleCell> scalability_sweep(const ExperimentSpec& spec);

// Writes triples.tsv, edges.tsv and service.conf under `dir` for the first
// theta of the experiment.
void serve_prep(const ExperimentSpec& spec, const std::filesystem::path& dir);

// JSON-lines writers: one record per cell, the experiment settings echoed in each.
void write_report(std::ostream& out, const ExperimentSpec& spec, const PrecisionReport& r);
void write_report(std::ostream& out, const ExperimentSpec& spec, const NdcgTrace& t);
void write_report(std::ostream& out, const ExperimentSpec& spec, std::span<const ScaleCell> cells);

}  // namespace asyt
