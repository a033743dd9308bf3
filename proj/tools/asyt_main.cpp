// Command-line front end. Talks to the engine only through the C interface.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "asyt/asyt.h"

namespace {

struct DataFlags {
  std::string spec_file;
  std::string triples, edges, cooccurrence;
  std::string network = "social";
  std::vector<double> thetas;
  std::vector<double> theta_percentiles;
  bool no_filter = false;
  std::size_t users = 1000, items = 2000, tags = 500, n_triples = 20000;
  std::string graph_model = "small_world";
};

struct RunFlags {
  double alpha = 0.0;
  std::optional<double> tf_scale;
  std::vector<std::size_t> ks;
  std::vector<std::size_t> lengths;
  std::optional<double> budget_ms;
  std::uint64_t seed = 1;
  std::size_t sample = 100;
  bool two_word = false;
  unsigned threads = 0;
  std::vector<std::size_t> visited;
  std::vector<double> times;
  std::size_t chunks = 5;
};

void add_data_flags(CLI::App* app, DataFlags& d) {
  app->add_option("--spec", d.spec_file, "JSON experiment spec; flags override its fields");
  app->add_option("--triples", d.triples, "user<TAB>item<TAB>tag file (synthetic data when absent)");
  app->add_option("--edges", d.edges, "userA<TAB>userB<TAB>weight file");
  app->add_option("--cooccurrence", d.cooccurrence, "tag<TAB>keyword<TAB>count file for tag expansion");
  app->add_option("--network", d.network, "social | common | itemtag | tag")
      ->check(CLI::IsMember({"social", "common", "itemtag", "tag"}));
  app->add_option("--theta", d.thetas, "edge weight thresholds")->check(CLI::Range(0.0, 1.0));
  app->add_option("--theta-percentile", d.theta_percentiles, "thresholds as edge-weight percentiles")
      ->check(CLI::Range(0.0, 100.0));
  app->add_flag("--no-filter", d.no_filter, "keep sparse items and users");
  app->add_option("--users", d.users, "synthetic users");
  app->add_option("--items", d.items, "synthetic items");
  app->add_option("--tags", d.tags, "synthetic tags");
  app->add_option("--n-triples", d.n_triples, "synthetic triples");
  app->add_option("--graph", d.graph_model, "synthetic graph model")
      ->check(CLI::IsMember({"small_world", "ring", "empty"}));
}

void add_run_flags(CLI::App* app, RunFlags& r) {
  app->add_option("--alpha", r.alpha, "weight of the textual score")->check(CLI::Range(0.0, 1.0));
  app->add_option("--tf-scale", r.tf_scale, "tf multiplier (calibrated when omitted)");
  app->add_option("--k", r.ks, "result sizes");
  app->add_option("--l", r.lengths, "prefix lengths");
  app->add_option("--budget-ms", r.budget_ms, "per-query time budget (unbounded when omitted)");
  app->add_option("--seed", r.seed, "seed for sampling and the synthetic generator");
  app->add_option("--sample", r.sample, "number of sampled triples");
  app->add_flag("--two-word", r.two_word, "filter items by a second tag before searching");
  app->add_option("--threads", r.threads, "worker threads (0: all cores)");
  app->add_option("--visited", r.visited, "NDCG checkpoints in visited users");
  app->add_option("--time-ms", r.times, "NDCG checkpoints in milliseconds");
  app->add_option("--chunks", r.chunks, "cumulative chunks for the scalability sweep");
}

nlohmann::json build_spec(const DataFlags& d, const RunFlags* r) {
  nlohmann::json j = nlohmann::json::object();
  if (!d.spec_file.empty()) {
    std::ifstream in(d.spec_file);
    if (!in) throw std::runtime_error("cannot open " + d.spec_file);
    j = nlohmann::json::parse(in);
  }
  if (!d.triples.empty()) j["triples"] = d.triples;
  if (!d.edges.empty()) j["edges"] = d.edges;
  if (!d.cooccurrence.empty()) j["cooccurrence"] = d.cooccurrence;
  j["network"] = d.network;
  if (!d.thetas.empty()) j["thetas"] = d.thetas;
  if (!d.theta_percentiles.empty()) j["theta_percentiles"] = d.theta_percentiles;
  if (d.no_filter) j["filter"] = false;
  auto& s = j["synthetic"];
  if (!s.is_object()) s = nlohmann::json::object();
  s["n_users"] = d.users;
  s["n_items"] = d.items;
  s["n_tags"] = d.tags;
  s["n_triples"] = d.n_triples;
  s["graph_model"] = d.graph_model;
  if (r) {
    s["seed"] = r->seed;
    j["seed"] = r->seed;
    j["alpha"] = r->alpha;
    if (r->tf_scale) j["tf_scale"] = *r->tf_scale;
    if (!r->ks.empty()) j["ks"] = r->ks;
    if (!r->lengths.empty()) j["prefix_lengths"] = r->lengths;
    if (r->budget_ms) j["budget_ms"] = *r->budget_ms;
    j["sample"] = r->sample;
    j["two_word"] = r->two_word;
    j["threads"] = r->threads;
    if (!r->visited.empty()) j["visited_checkpoints"] = r->visited;
    if (!r->times.empty()) j["time_checkpoints_ms"] = r->times;
    j["chunks"] = r->chunks;
  }
  return j;
}

int report(asyt_status s) {
  if (s == ASYT_OK) return 0;
  std::fprintf(stderr, "error: %s\n", asyt_last_error());
  return s == ASYT_ERR_INVALID_ARGUMENT ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"As-you-type social search: experiments, data tools and the HTTP service"};
  app.set_version_flag("--version", std::string(asyt_version()));
  app.require_subcommand(1);

  DataFlags data;
  RunFlags run;
  std::string out;

  std::vector<std::pair<CLI::App*, const char*>> experiments;
  for (const char* kind : {"precision", "ndcg", "scale"}) {
    const char* help = kind == std::string("precision") ? "leave-one-out P@k per prefix length and theta"
                       : kind == std::string("ndcg")    ? "NDCG of anytime results against the exact top-k"
                                                        : "time to exact top-k over cumulative data chunks";
    auto* sub = app.add_subcommand(kind, help);
    add_data_flags(sub, data);
    add_run_flags(sub, run);
    sub->add_option("--out", out, "JSON-lines report (stdout when omitted)");
    experiments.emplace_back(sub, kind);
  }

  auto* synth = app.add_subcommand("synth", "write a synthetic corpus and graph");
  std::string synth_triples = "triples.tsv", synth_edges = "edges.tsv";
  add_data_flags(synth, data);
  synth->add_option("--seed", run.seed, "generator seed");
  synth->add_option("--out", synth_triples, "triples output");
  synth->add_option("--out-edges", synth_edges, "edges output");

  auto* prep = app.add_subcommand("serve-prep", "write the prepared dataset and a service config");
  add_data_flags(prep, data);
  add_run_flags(prep, run);
  prep->add_option("--out", out, "output directory")->required();

  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  std::string config;
  int port = 0;
  serve->add_option("--config", config, "key=value service config")->required()->check(CLI::ExistingFile);
  serve->add_option("--port", port, "overrides the configured port");

  auto* query = app.add_subcommand("query", "type a query for one seeker and print the result");
  std::string seeker, text;
  std::size_t k = 10;
  double budget = 0.0;
  add_data_flags(query, data);
  query->add_option("--seeker", seeker, "seeker name (none when omitted)");
  query->add_option("--alpha", run.alpha, "weight of the textual score")->check(CLI::Range(0.0, 1.0));
  query->add_option("--k", k, "result size")->check(CLI::PositiveNumber);
  query->add_option("--budget-ms", budget, "time budget (0: run to termination)");
  query->add_option("text", text, "typed text; spaces separate terms")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& [sub, kind] : experiments) {
      if (sub->parsed()) {
        const auto spec = build_spec(data, &run).dump();
        return report(asyt_experiment_run(kind, spec.c_str(), out.c_str()));
      }
    }
    if (synth->parsed()) {
      const auto spec = build_spec(data, &run).dump();
      return report(asyt_synth_write(spec.c_str(), synth_triples.c_str(), synth_edges.c_str()));
    }
    if (prep->parsed()) {
      const auto spec = build_spec(data, &run).dump();
      return report(asyt_serve_prep(spec.c_str(), out.c_str()));
    }
    if (serve->parsed()) return report(asyt_serve(config.c_str(), port));
    if (query->parsed()) {
      const auto spec = build_spec(data, nullptr).dump();
      asyt_dataset* d = nullptr;
      if (int rc = report(asyt_dataset_prepare(spec.c_str(), &d))) return rc;
      asyt_session_config cfg;
      asyt_session_config_default(&cfg);
      cfg.k = k;
      cfg.alpha = run.alpha;
      cfg.budget_ms = budget;
      asyt_session* s = nullptr;
      asyt_result* r = nullptr;
      char* json = nullptr;
      asyt_status st = asyt_session_create(d, seeker.empty() ? nullptr : seeker.c_str(), &cfg, &s);
      if (st == ASYT_OK) st = asyt_session_type(s, text.c_str(), &r);
      if (st == ASYT_OK) st = asyt_result_json(r, &json);
      if (st == ASYT_OK) std::cout << json << '\n';
      const int rc = report(st);
      asyt_string_free(json);
      asyt_result_free(r);
      asyt_session_free(s);
      asyt_dataset_free(d);
      return rc;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
