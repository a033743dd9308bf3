#include "asyt/service.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "asyt/text.hpp"

namespace asyt {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

bool parse_bool(std::string_view v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw std::invalid_argument(fmt::format("not a boolean: {}", v));
}

double parse_double(std::string_view v) {
  std::size_t used = 0;
  const std::string s(v);
  double d = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("not a number: " + s);
  return d;
}

long long parse_int(std::string_view v) {
  std::size_t used = 0;
  const std::string s(v);
  long long x = std::stoll(s, &used);
  if (used != s.size()) throw std::invalid_argument("not an integer: " + s);
  return x;
}

std::optional<UserId> find_seeker(const PreparedDataset& d, std::string_view name) {
  if (auto u = d.corpus.find_user(name)) return u;
  const auto& extra = d.network.extra_names();
  for (std::size_t i = 0; i < extra.size(); ++i) {
    if (extra[i] == name) return make_id<UserId>(d.corpus.num_users() + i);
  }
  return std::nullopt;
}

Service::Response error(int status, std::string_view message) {
  return {status, json{{"error", message}}.dump()};
}

}  // namespace

ServiceConfig parse_service_config(std::istream& in, const std::filesystem::path& base_dir) {
  ServiceConfig c;
  auto path = [&](std::string_view v) {
    std::filesystem::path p{std::string(v)};
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto s = text::trim(line);
    if (s.empty() || s.front() == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument(fmt::format("line {}: expected key=value", lineno));
    const auto key = text::trim(s.substr(0, eq));
    const auto value = text::trim(s.substr(eq + 1));
    try {
      if (key == "triples") c.triples = path(value);
      else if (key == "edges") c.edges = path(value);
      else if (key == "cooccurrence") c.cooccurrence = path(value);
      else if (key == "network") {
        auto n = parse_network(value);
        if (!n) throw std::invalid_argument(fmt::format("unknown network {}", value));
        c.network = *n;
      } else if (key == "theta") c.theta = parse_double(value);
      else if (key == "filter") c.filter = parse_bool(value);
      else if (key == "ttl_seconds") c.ttl = std::chrono::seconds(parse_int(value));
      else if (key == "default_k") c.default_k = static_cast<std::size_t>(parse_int(value));
      else if (key == "default_alpha") c.default_alpha = parse_double(value);
      else if (key == "default_budget_ms") {
        if (value == "none") c.default_budget_ms.reset();
        else c.default_budget_ms = parse_double(value);
      } else if (key == "allow_unknown") c.allow_unknown = parse_bool(value);
      else if (key == "tf_scale") c.tf_scale = parse_double(value);
      else if (key == "host") c.host = std::string(value);
      else if (key == "port") c.port = static_cast<int>(parse_int(value));
      else throw std::invalid_argument(fmt::format("unknown key {}", key));
    } catch (const std::logic_error& e) {
      throw std::invalid_argument(fmt::format("line {}: {}", lineno, e.what()));
    }
  }
  if (c.theta < 0.0 || c.theta > 1.0) throw std::invalid_argument("theta must lie in [0,1]");
  if (c.ttl.count() <= 0) throw std::invalid_argument("ttl_seconds must be positive");
  if (c.default_k == 0) throw std::invalid_argument("default_k must be at least 1");
  if (c.default_alpha < 0.0 || c.default_alpha > 1.0) throw std::invalid_argument("default_alpha must lie in [0,1]");
  if (c.default_budget_ms && !(*c.default_budget_ms > 0.0))
    throw std::invalid_argument("default_budget_ms must be positive");
  if (!(c.tf_scale > 0.0)) throw std::invalid_argument("tf_scale must be positive");
  return c;
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_service_config(in, path.parent_path());
}

PreparedDataset load_service_data(const ServiceConfig& config) {
  if (config.triples.empty()) throw std::invalid_argument("no triples file configured");
  ExperimentSpec spec;
  spec.triples = config.triples;
  spec.edges = config.edges;
  spec.cooccurrence = config.cooccurrence;
  spec.network = config.network;
  spec.filter = config.filter;
  auto data = prepare_dataset(spec);
  data.network = filter_edges(data.network, config.theta);
  return data;
}

// ---------------------------------------------------------------------------

ReplaySession::ReplaySession(const PreparedDataset& data, std::optional<UserId> seeker, EngineConfig config)
    : data_(&data),
      seeker_(seeker),
      config_(config),
      session_(data.corpus, data.index, data.network, seeker, config) {}

TopKResult ReplaySession::keystroke(const KeystrokeEvent& ev) {
  log_.push_back(ev);
  return session_.keystroke(ev);
}

TopKResult ReplaySession::backspace() {
  if (!log_.empty()) log_.pop_back();
  session_ = Session(data_->corpus, data_->index, data_->network, seeker_, config_);
  for (const auto& ev : log_) session_.apply(ev);
  return session_.run();
}

TopKResult ReplaySession::current() { return session_.run(); }

std::string result_json(const TopKResult& r, const Corpus& corpus, const Query* query) {
  std::string out = R"({"items":[)";
  for (std::size_t i = 0; i < r.entries.size(); ++i) {
    const auto& e = r.entries[i];
    if (i) out += ',';
    out += fmt::format(R"({{"item":{},"min":{:.6f},"max":{:.6f},"status":"{}"}})",
                       json(corpus.item_name(e.item)).dump(), e.min, e.max,
                       e.status == EntryStatus::Guaranteed ? "guaranteed" : "possible");
  }
  out += fmt::format(R"(],"exact":{},"elapsed_ms":{:.3f},"visited_users":{})", r.exact ? "true" : "false",
                     r.elapsed_ms, r.visited_users);
  if (query) {
    out += fmt::format(R"(,"query":{{"terms":{},"prefix":{}}})", json(query->completed_terms).dump(),
                       json(query->active_prefix).dump());
  }
  out += '}';
  return out;
}

// ---------------------------------------------------------------------------

struct Service::Impl {
  struct Entry {
    std::mutex mu;  // serializes this session's requests
    std::unique_ptr<ReplaySession> session;
    std::string last_body;
    std::atomic<Clock::rep> last_active{0};
  };

  mutable std::shared_mutex mu;
  std::unordered_map<std::string, std::shared_ptr<Entry>> sessions;
  std::mt19937_64 rng{std::random_device{}()};
  std::atomic<Clock::rep> last_sweep{0};
  httplib::Server server;

  std::shared_ptr<Entry> find(std::string_view id, std::chrono::seconds ttl) {
    std::shared_lock lock(mu);
    auto it = sessions.find(std::string(id));
    if (it == sessions.end()) return nullptr;
    const auto idle = Clock::now() - Clock::time_point(Clock::duration(it->second->last_active.load()));
    if (idle > ttl) return nullptr;
    return it->second;
  }
};

Service::Service(ServiceConfig config, PreparedDataset data)
    : config_(std::move(config)), data_(std::move(data)), impl_(std::make_unique<Impl>()) {
  auto& srv = impl_->server;
  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  srv.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  srv.Post("/sessions", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, create_session(req.body));
  });
  srv.Post(R"(/sessions/([^/]+)/keystroke)", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, keystroke(req.matches[1].str(), req.body));
  });
  srv.Get(R"(/sessions/([^/]+)/result)", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, result(req.matches[1].str()));
  });
  srv.Get("/health", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, health()); });
}

Service::~Service() { stop(); }

Service::Response Service::create_session(std::string_view body) {
  // Opportunistic sweep, at most once a second.
  const auto now = Clock::now();
  if (now.time_since_epoch().count() - impl_->last_sweep.load() >
      std::chrono::duration_cast<Clock::duration>(std::chrono::seconds(1)).count()) {
    impl_->last_sweep = now.time_since_epoch().count();
    sweep_expired(now);
  }

  json req;
  try {
    req = body.empty() ? json::object() : json::parse(body);
  } catch (const json::exception&) {
    return error(400, "malformed JSON");
  }
  if (!req.is_object()) return error(400, "body must be a JSON object");

  EngineConfig cfg;
  cfg.k = config_.default_k;
  cfg.alpha = config_.default_alpha;
  cfg.tf_scale = config_.tf_scale;
  cfg.time_budget.reset();
  if (config_.default_budget_ms)
    cfg.time_budget = std::chrono::microseconds(std::llround(*config_.default_budget_ms * 1000.0));

  std::optional<UserId> seeker;
  std::string seeker_name;
  try {
    if (!req.contains("seeker") || !req["seeker"].is_string()) return error(400, "seeker must be a string");
    seeker_name = req["seeker"].get<std::string>();
    if (req.contains("k")) {
      const auto& k = req["k"];
      if (!k.is_number_integer() || k.get<long long>() < 1) return error(400, "k must be a positive integer");
      cfg.k = k.get<std::size_t>();
    }
    if (req.contains("alpha")) {
      if (!req["alpha"].is_number()) return error(400, "alpha must be a number");
      cfg.alpha = req["alpha"].get<double>();
    }
    if (req.contains("budget_ms")) {
      const auto& b = req["budget_ms"];
      if (b.is_null()) {
        cfg.time_budget.reset();
      } else {
        if (!b.is_number() || !(b.get<double>() > 0.0)) return error(400, "budget_ms must be positive or null");
        cfg.time_budget = std::chrono::microseconds(std::max<long long>(1, std::llround(b.get<double>() * 1000.0)));
      }
    }
    validate(cfg);
  } catch (const std::exception& e) {
    return error(400, e.what());
  }
  seeker = find_seeker(data_, seeker_name);
  if (!seeker && !config_.allow_unknown) return error(404, fmt::format("unknown seeker {}", seeker_name));

  auto entry = std::make_shared<Impl::Entry>();
  entry->session = std::make_unique<ReplaySession>(data_, seeker, cfg);
  const auto q = entry->session->session().query();
  entry->last_body = result_json(entry->session->current(), data_.corpus, &q);
  entry->last_active = Clock::now().time_since_epoch().count();

  std::string id;
  {
    std::unique_lock lock(impl_->mu);
    do {
      id = fmt::format("{:016x}{:016x}", impl_->rng(), impl_->rng());
    } while (impl_->sessions.contains(id));
    impl_->sessions.emplace(id, std::move(entry));
  }
  json out = {{"session_id", id},
              {"seeker", seeker_name},
              {"k", cfg.k},
              {"alpha", cfg.alpha},
              {"budget_ms", cfg.time_budget ? json(cfg.time_budget->count() / 1000.0) : json(nullptr)}};
  return {201, out.dump()};
}

Service::Response Service::keystroke(std::string_view id, std::string_view body) {
  auto entry = impl_->find(id, config_.ttl);
  if (!entry) return error(404, "unknown or expired session");
  json req;
  try {
    req = json::parse(body);
  } catch (const json::exception&) {
    return error(400, "malformed JSON");
  }
  if (!req.is_object() || !req.contains("event") || !req["event"].is_string())
    return error(400, "event must be a string");
  const auto event = req["event"].get<std::string>();

  std::optional<KeystrokeEvent> ev;
  if (event == "char") {
    if (!req.contains("value") || !req["value"].is_string()) return error(400, "char needs a string value");
    const auto value = req["value"].get<std::string>();
    if (value.empty()) return error(400, "empty char");
    if (text::scalar_count(value) != 1) return error(400, "char must be a single character");
    if (text::trim(value).empty()) return error(400, "whitespace separates terms; send new_term");
    ev = KeystrokeEvent::append(value);
  } else if (event == "new_term") {
    ev = KeystrokeEvent::new_term();
  } else if (event != "backspace") {
    return error(400, fmt::format("unknown event {}", event));
  }

  std::lock_guard lock(entry->mu);
  const auto r = ev ? entry->session->keystroke(*ev) : entry->session->backspace();
  const auto q = entry->session->session().query();
  entry->last_body = result_json(r, data_.corpus, &q);
  entry->last_active = Clock::now().time_since_epoch().count();
  return {200, entry->last_body};
}

Service::Response Service::result(std::string_view id) {
  auto entry = impl_->find(id, config_.ttl);
  if (!entry) return error(404, "unknown or expired session");
  std::lock_guard lock(entry->mu);
  entry->last_active = Clock::now().time_since_epoch().count();
  return {200, entry->last_body};
}

Service::Response Service::health() {
  json out = {{"status", "ok"},
              {"triples", data_.corpus.num_triples()},
              {"users", data_.corpus.num_users()},
              {"items", data_.corpus.num_items()},
              {"tags", data_.corpus.vocab().size()},
              {"edges", data_.network.num_edges()},
              {"graph_nodes", data_.network.num_nodes()},
              {"trie_nodes", data_.index.num_nodes()},
              {"sessions", num_sessions()}};
  return {200, out.dump()};
}

std::size_t Service::sweep_expired(Clock::time_point now) {
  std::unique_lock lock(impl_->mu);
  return std::erase_if(impl_->sessions, [&](const auto& kv) {
    return now - Clock::time_point(Clock::duration(kv.second->last_active.load())) > config_.ttl;
  });
}

std::size_t Service::num_sessions() const {
  std::shared_lock lock(impl_->mu);
  return impl_->sessions.size();
}

int Service::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool Service::serve() { return impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

int run_service(const ServiceConfig& config) {
  auto data = load_service_data(config);
  fmt::print(stderr, "loaded {} triples, {} users, {} edges\n", data.corpus.num_triples(), data.corpus.num_users(),
             data.network.num_edges());
  Service service(config, std::move(data));
  const int port = service.bind(config.host, config.port);
  if (port < 0) {
    fmt::print(stderr, "cannot bind {}:{}\n", config.host, config.port);
    return 1;
  }
  fmt::print(stderr, "listening on http://{}:{}\n", config.host, port);
  return service.serve() ? 0 : 1;
}

}  // namespace asyt
