#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "asyt/engine.hpp"
#include "asyt/evalbench.hpp"

namespace asyt {

struct ServiceConfig {
  std::filesystem::path triples;
  std::filesystem::path edges;
  std::filesystem::path cooccurrence;
  NetworkVariant network = NetworkVariant::Social;
  double theta = 0.0;
  bool filter = false;
  std::chrono::seconds ttl{600};
  std::size_t default_k = 10;
  double default_alpha = 0.0;
  std::optional<double> default_budget_ms = 50.0;  // nullopt: run to termination
  bool allow_unknown = false;
  double tf_scale = 1.0;
  std::string host = "127.0.0.1";
  int port = 8080;
};

// Flat `key=value` lines; '#' starts a comment. Relative paths resolve
// against `base_dir`. Throws std::invalid_argument on unknown keys or bad
// values.
ServiceConfig parse_service_config(std::istream& in, const std::filesystem::path& base_dir = {});
ServiceConfig load_service_config(const std::filesystem::path& path);

// Corpus, thresholded graph and index the service answers from.
PreparedDataset load_service_data(const ServiceConfig& config);

// A session plus its keystroke log. Backspace drops the last event and
// replays the rest against fresh state.
class ReplaySession {
 public:
  ReplaySession(const PreparedDataset& data, std::optional<UserId> seeker, EngineConfig config);

  TopKResult keystroke(const KeystrokeEvent& ev);
  TopKResult backspace();
  TopKResult current();

  const std::vector<KeystrokeEvent>& log() const noexcept { return log_; }
  const Session& session() const noexcept { return session_; }

 private:
  const PreparedDataset* data_;
  std::optional<UserId> seeker_;
  EngineConfig config_;
  Session session_;
  std::vector<KeystrokeEvent> log_;
};

// JSON body of a result; scores carry six fractional digits.
std::string result_json(const TopKResult& r, const Corpus& corpus, const Query* query = nullptr);

class Service {
 public:
  struct Response {
    int status = 200;
    std::string body;
  };

  Service(ServiceConfig config, PreparedDataset data);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Transport-free handlers, also used by the HTTP routes.
  Response create_session(std::string_view body);
  Response keystroke(std::string_view id, std::string_view body);
  Response result(std::string_view id);
  Response health();

  // Drops sessions idle for longer than the TTL; returns how many.
  std::size_t sweep_expired(std::chrono::steady_clock::time_point now = std::chrono::steady_clock::now());
  std::size_t num_sessions() const;

  // Binds the HTTP server; port 0 picks a free port. Returns the bound port or
  // -1 on failure.
  int bind(const std::string& host, int port);
  // Serves until stop(); requires a successful bind().
  bool serve();
  void stop();

  const PreparedDataset& data() const noexcept { return data_; }
  const ServiceConfig& config() const noexcept { return config_; }

 private:
  struct Impl;
  ServiceConfig config_;
  PreparedDataset data_;
  std::unique_ptr<Impl> impl_;
};

// Loads the data named by the config and serves until the process ends.
int run_service(const ServiceConfig& config);

}  // namespace asyt
