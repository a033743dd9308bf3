#include "asyt/asyt.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <string>

#include <fmt/format.h>
#include <json.hpp>

#include "asyt/evalbench.hpp"
#include "asyt/service.hpp"
#include "asyt/synthetic.hpp"
#include "asyt/text.hpp"

using namespace asyt;

struct asyt_dataset {
  PreparedDataset data;
};

struct asyt_session {
  const asyt_dataset* dataset;
  ReplaySession replay;
};

struct asyt_result {
  TopKResult result;
  std::vector<std::string> items;
  Query query;
};

namespace {

thread_local std::string last_error;

asyt_status fail(asyt_status s, std::string message) {
  last_error = std::move(message);
  return s;
}

// Maps exceptions escaping the core onto status codes.
template <class Fn>
asyt_status guarded(Fn&& fn) noexcept {
  try {
    last_error.clear();
    return fn();
  } catch (const std::invalid_argument& e) {
    return fail(ASYT_ERR_INVALID_ARGUMENT, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(ASYT_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::ios_base::failure& e) {
    return fail(ASYT_ERR_IO, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(ASYT_ERR_IO, e.what());
  } catch (const std::runtime_error& e) {
    // Loaders report unreadable files this way.
    return fail(ASYT_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(ASYT_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(ASYT_ERR_INTERNAL, "unknown error");
  }
}

ExperimentSpec parse_spec(const char* spec_json) {
  if (spec_json == nullptr || *spec_json == '\0') return {};
  return spec_from_json(nlohmann::json::parse(spec_json));
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

asyt_result* wrap(TopKResult r, const asyt_dataset& d, Query q) {
  auto* out = new asyt_result{std::move(r), {}, std::move(q)};
  out->items.reserve(out->result.entries.size());
  for (const auto& e : out->result.entries) out->items.push_back(d.data.corpus.item_name(e.item));
  return out;
}

}  // namespace

extern "C" {

const char* asyt_version(void) { return "1.0.0"; }

const char* asyt_last_error(void) { return last_error.c_str(); }

void asyt_string_free(char* s) { std::free(s); }

asyt_status asyt_dataset_load(const asyt_dataset_options* options, asyt_dataset** out) {
  return guarded([&] {
    if (options == nullptr || out == nullptr) return fail(ASYT_ERR_INVALID_ARGUMENT, "null argument");
    if (options->triples == nullptr || *options->triples == '\0')
      return fail(ASYT_ERR_INVALID_ARGUMENT, "triples path is required");
    ServiceConfig cfg;
    cfg.triples = options->triples;
    if (options->edges) cfg.edges = options->edges;
    if (options->cooccurrence) cfg.cooccurrence = options->cooccurrence;
    if (options->network && *options->network) {
      auto n = parse_network(options->network);
      if (!n) return fail(ASYT_ERR_INVALID_ARGUMENT, std::string("unknown network ") + options->network);
      cfg.network = *n;
    }
    if (options->theta < 0.0 || options->theta > 1.0)
      return fail(ASYT_ERR_INVALID_ARGUMENT, "theta must lie in [0,1]");
    cfg.theta = options->theta;
    cfg.filter = options->filter != 0;
    *out = new asyt_dataset{load_service_data(cfg)};
    return ASYT_OK;
  });
}

asyt_status asyt_dataset_prepare(const char* spec_json, asyt_dataset** out) {
  return guarded([&] {
    if (out == nullptr) return fail(ASYT_ERR_INVALID_ARGUMENT, "null argument");
    const auto spec = parse_spec(spec_json);
    auto data = prepare_dataset(spec);
    data.network = filter_edges(data.network, resolve_thetas(spec, data.network).front());
    *out = new asyt_dataset{std::move(data)};
    return ASYT_OK;
  });
}

void asyt_dataset_free(asyt_dataset* d) { delete d; }

asyt_status asyt_dataset_stats_get(const asyt_dataset* d, asyt_dataset_stats* out) {
  if (d == nullptr || out == nullptr) return fail(ASYT_ERR_INVALID_ARGUMENT, "null argument");
  const auto& x = d->data;
  *out = {x.corpus.num_triples(), x.corpus.num_users(),     x.corpus.num_items(),  x.corpus.vocab().size(),
          x.network.num_edges(),  x.network.num_nodes(), x.index.num_nodes()};
  return ASYT_OK;
}

void asyt_session_config_default(asyt_session_config* out) {
  if (out == nullptr) return;
  *out = {};
  out->k = 10;
  out->alpha = 0.0;
  out->tf_scale = 1.0;
  out->budget_ms = 50.0;
  out->aggregator = ASYT_AGG_MAX_PRODUCT;
  out->decay = 1.0;
  out->transform = ASYT_TRANSFORM_IDENTITY;
  out->max_visited_users = 0;
  out->allow_unknown = 0;
}

asyt_status asyt_session_create(const asyt_dataset* d, const char* seeker, const asyt_session_config* config,
                                asyt_session** out) {
  return guarded([&] {
    if (d == nullptr || out == nullptr) return fail(ASYT_ERR_INVALID_ARGUMENT, "null argument");
    asyt_session_config c;
    asyt_session_config_default(&c);
    if (config) c = *config;
    EngineConfig cfg;
    cfg.k = c.k;
    cfg.alpha = c.alpha;
    cfg.tf_scale = c.tf_scale;
    cfg.time_budget.reset();
    if (c.budget_ms > 0.0) cfg.time_budget = std::chrono::microseconds(std::max<long long>(1, std::llround(c.budget_ms * 1000.0)));
    if (c.aggregator == ASYT_AGG_EXP_DECAY) cfg.aggregator = ProximityAggregator::exp_decay(c.decay);
    else if (c.aggregator != ASYT_AGG_MAX_PRODUCT) return fail(ASYT_ERR_INVALID_ARGUMENT, "unknown aggregator");
    if (c.transform == ASYT_TRANSFORM_LOG1P) cfg.transform = ScoreTransform::Log1p;
    else if (c.transform != ASYT_TRANSFORM_IDENTITY) return fail(ASYT_ERR_INVALID_ARGUMENT, "unknown transform");
    if (c.max_visited_users > 0) cfg.max_visited_users = c.max_visited_users;
    validate(cfg);

    std::optional<UserId> user;
    if (seeker != nullptr) {
      user = d->data.corpus.find_user(seeker);
      if (!user) {
        const auto& extra = d->data.network.extra_names();
        for (std::size_t i = 0; i < extra.size(); ++i)
          if (extra[i] == seeker) user = make_id<UserId>(d->data.corpus.num_users() + i);
      }
      if (!user && !c.allow_unknown) return fail(ASYT_ERR_NOT_FOUND, std::string("unknown seeker ") + seeker);
    }
    *out = new asyt_session{d, ReplaySession(d->data, user, cfg)};
    return ASYT_OK;
  });
}

void asyt_session_free(asyt_session* s) { delete s; }

asyt_status asyt_session_keystroke(asyt_session* s, asyt_key_kind kind, const char* value, asyt_result** out) {
  return guarded([&] {
    if (s == nullptr || out == nullptr) return fail(ASYT_ERR_INVALID_ARGUMENT, "null argument");
    TopKResult r;
    switch (kind) {
      case ASYT_KEY_CHAR: {
        if (value == nullptr || *value == '\0') return fail(ASYT_ERR_INVALID_ARGUMENT, "empty char");
        if (text::scalar_count(value) != 1) return fail(ASYT_ERR_INVALID_ARGUMENT, "char must be one character");
        if (text::trim(value).empty()) return fail(ASYT_ERR_INVALID_ARGUMENT, "whitespace separates terms");
        r = s->replay.keystroke(KeystrokeEvent::append(value));
        break;
      }
      case ASYT_KEY_NEW_TERM: r = s->replay.keystroke(KeystrokeEvent::new_term()); break;
      case ASYT_KEY_BACKSPACE: r = s->replay.backspace(); break;
      default: return fail(ASYT_ERR_INVALID_ARGUMENT, "unknown keystroke kind");
    }
    *out = wrap(std::move(r), *s->dataset, s->replay.session().query());
    return ASYT_OK;
  });
}

asyt_status asyt_session_type(asyt_session* s, const char* typed, asyt_result** out) {
  return guarded([&] {
    if (s == nullptr || typed == nullptr || out == nullptr) return fail(ASYT_ERR_INVALID_ARGUMENT, "null argument");
    const auto events = events_for_text(typed);
    TopKResult r = events.empty() ? s->replay.current() : TopKResult{};
    for (const auto& ev : events) r = s->replay.keystroke(ev);
    *out = wrap(std::move(r), *s->dataset, s->replay.session().query());
    return ASYT_OK;
  });
}

size_t asyt_result_size(const asyt_result* r) { return r ? r->result.entries.size() : 0; }

asyt_status asyt_result_entry_get(const asyt_result* r, size_t i, asyt_result_entry* out) {
  if (r == nullptr || out == nullptr) return fail(ASYT_ERR_INVALID_ARGUMENT, "null argument");
  if (i >= r->result.entries.size()) return fail(ASYT_ERR_INVALID_ARGUMENT, "entry index out of range");
  const auto& e = r->result.entries[i];
  *out = {r->items[i].c_str(), e.min, e.max, e.status == EntryStatus::Guaranteed};
  return ASYT_OK;
}

int asyt_result_exact(const asyt_result* r) { return r && r->result.exact; }

double asyt_result_elapsed_ms(const asyt_result* r) { return r ? r->result.elapsed_ms : 0.0; }

size_t asyt_result_visited_users(const asyt_result* r) { return r ? r->result.visited_users : 0; }

asyt_status asyt_result_json(const asyt_result* r, char** out) {
  return guarded([&] {
    if (r == nullptr || out == nullptr) return fail(ASYT_ERR_INVALID_ARGUMENT, "null argument");
    // Item names are stored on the result; render without the corpus.
    std::string body = R"({"items":[)";
    for (std::size_t i = 0; i < r->items.size(); ++i) {
      const auto& e = r->result.entries[i];
      if (i) body += ',';
      body += fmt::format(R"({{"item":{},"min":{:.6f},"max":{:.6f},"status":"{}"}})",
                          nlohmann::json(r->items[i]).dump(), e.min, e.max,
                          e.status == EntryStatus::Guaranteed ? "guaranteed" : "possible");
    }
    body += fmt::format(R"(],"exact":{},"elapsed_ms":{:.3f},"visited_users":{},"query":{{"terms":{},"prefix":{}}}}})",
                        r->result.exact ? "true" : "false", r->result.elapsed_ms, r->result.visited_users,
                        nlohmann::json(r->query.completed_terms).dump(),
                        nlohmann::json(r->query.active_prefix).dump());
    *out = dup_string(body);
    return ASYT_OK;
  });
}

void asyt_result_free(asyt_result* r) { delete r; }

asyt_status asyt_experiment_run(const char* kind, const char* spec_json, const char* out_path) {
  return guarded([&] {
    if (kind == nullptr) return fail(ASYT_ERR_INVALID_ARGUMENT, "null experiment kind");
    const std::string k = kind;
    if (k != "precision" && k != "ndcg" && k != "scale")
      return fail(ASYT_ERR_INVALID_ARGUMENT, "unknown experiment " + k);
    const auto spec = parse_spec(spec_json);
    std::ofstream file;
    if (out_path && *out_path) {
      file.open(out_path);
      if (!file) return fail(ASYT_ERR_IO, std::string("cannot write ") + out_path);
    }
    std::ostream& out = file.is_open() ? static_cast<std::ostream&>(file) : std::cout;
    const auto data = prepare_dataset(spec);
    if (k == "precision") write_report(out, spec, leave_one_out_precision(spec, data));
    else if (k == "ndcg") write_report(out, spec, ndcg_trace(spec, data));
    else write_report(out, spec, std::span<const ScaleCell>(scalability_sweep(spec, data)));
    out.flush();
    if (!out) return fail(ASYT_ERR_IO, "write failed");
    return ASYT_OK;
  });
}

asyt_status asyt_synth_write(const char* spec_json, const char* triples_path, const char* edges_path) {
  return guarded([&] {
    if (triples_path == nullptr || edges_path == nullptr) return fail(ASYT_ERR_INVALID_ARGUMENT, "null path");
    const auto spec = parse_spec(spec_json);
    const auto data = generate_synthetic(spec.synthetic);
    std::ofstream t(triples_path), e(edges_path);
    if (!t || !e) return fail(ASYT_ERR_IO, "cannot open output files");
    write_triples(t, data.corpus);
    write_edges(e, data.graph, data.corpus);
    if (!t.flush() || !e.flush()) return fail(ASYT_ERR_IO, "write failed");
    return ASYT_OK;
  });
}

asyt_status asyt_serve_prep(const char* spec_json, const char* dir) {
  return guarded([&] {
    if (dir == nullptr || *dir == '\0') return fail(ASYT_ERR_INVALID_ARGUMENT, "output directory is required");
    serve_prep(parse_spec(spec_json), dir);
    return ASYT_OK;
  });
}

asyt_status asyt_serve(const char* config_path, int port) {
  return guarded([&] {
    if (config_path == nullptr) return fail(ASYT_ERR_INVALID_ARGUMENT, "config path is required");
    auto cfg = load_service_config(config_path);
    if (port > 0) cfg.port = port;
    return run_service(cfg) == 0 ? ASYT_OK : fail(ASYT_ERR_IO, "server stopped with an error");
  });
}

}  // extern "C"
