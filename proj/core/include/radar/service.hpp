#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radar/adaptive.hpp"
#include "radar/costing.hpp"
#include "radar/embed.hpp"
#include "radar/error.hpp"
#include "radar/irt.hpp"
#include "radar/types.hpp"

namespace radar {

/// Everything needed to route: fitted parameters, pool costs and prices.
/// Immutable once published.
struct EngineSnapshot {
  IrtParameters params;
  CostTable costs;
  std::vector<ModelConfiguration> pool;
  std::shared_ptr<const EmbeddingSource> embed_source;
  std::uint64_t version = 0;
  /// Embeddings were L2-normalized at calibration; routing does the same.
  bool l2_normalize = false;

  std::vector<std::string> config_ids() const;
  /// Every pool entry needs an ability and a cost; throws Error(Validation).
  void validate() const;
};

/// Parameter snapshot document extended with "configs" and "costs"; readers
/// of the bare parameter format ignore the extra keys.
nlohmann::json snapshot_to_json(const EngineSnapshot& snapshot);
EngineSnapshot snapshot_from_json(const nlohmann::json& doc);
void save_snapshot_file(const std::filesystem::path& path, const EngineSnapshot& snapshot);
EngineSnapshot load_snapshot_file(const std::filesystem::path& path);

/// Builds a snapshot from a calibration run. Pool abilities are filled in
/// from the parameters.
EngineSnapshot make_snapshot(IrtParameters params, CostTable costs,
                             std::vector<ModelConfiguration> pool);

/// The snapshot with one more configuration (or a replaced one): ability
/// from the adaptive session, cost renormalized over the enlarged pool.
EngineSnapshot with_configuration(const EngineSnapshot& base, ModelConfiguration config,
                                  const SessionResult& session, double raw_cost);

struct Onboarding {
  EngineSnapshot snapshot;
  SessionResult session;
  double raw_cost = 0.0;
};

/// Adaptive onboarding against recorded responses: candidates are the
/// queries the new configuration has cells for, answers come from those
/// cells, and its cost is the mean token count over the selected queries
/// times its price. Budget defaults to default_adaptive_budget.
Onboarding onboard_from_recorded(const EngineSnapshot& base, ModelConfiguration config,
                                 const ResponseMatrix& recorded, const EmbeddingStore& embeddings,
                                 std::optional<std::size_t> budget = {});

struct RouteRequest {
  std::optional<Embedding> embedding;
  std::optional<std::string> query_id;
  std::optional<std::string> text;
  TradeoffProfile profile;
};

struct RouteTiming {
  double embed_ms = 0.0;
  double route_ms = 0.0;
};

struct RouteResponse {
  RoutingDecision decision;
  RouteTiming timing;
  std::uint64_t snapshot_version = 0;
};

struct CalibrateRequest {
  std::filesystem::path matrix;
  std::filesystem::path embeddings;
  std::filesystem::path prices;
  TrainingConfig training;
  bool l2_normalize = false;
};

struct AddConfigRequest {
  std::string config_id;
  double price_per_token = 0.0;
  /// Recorded responses of the new configuration (matrix format).
  std::filesystem::path responses;
  /// Embeddings for the candidate queries; defaults to the snapshot's store.
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::size_t> budget;
};

struct AddConfigResult {
  SessionResult session;
  std::uint64_t version = 0;
};

/// Status plus JSON body, independent of any transport.
struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

/// Routing engine front end. Readers take a reference to the current
/// snapshot and finish against it; a single writer publishes replacements.
class RoutingService {
 public:
  struct Options {
    std::filesystem::path snapshot_dir;  // empty: no persistence
    std::shared_ptr<const EmbeddingSource> embed_source;
    std::filesystem::path default_prices;  // used when /calibrate names none
  };

  explicit RoutingService(Options options);

  /// Publishes atomically and returns the assigned version (strictly greater
  /// than any earlier one). Persists when a snapshot directory is set.
  std::uint64_t publish_snapshot(EngineSnapshot snapshot);
  std::shared_ptr<const EngineSnapshot> snapshot() const;

  /// Loads the newest snapshot-*.json from the snapshot directory, if any.
  bool recover();

  RouteResponse route(const RouteRequest& request) const;
  nlohmann::json list_configs() const;
  std::uint64_t calibrate(const CalibrateRequest& request);
  AddConfigResult add_config(const AddConfigRequest& request);

  // JSON endpoints; errors map to HTTP-style statuses.
  ApiResponse handle_route(const std::string& body) const;
  ApiResponse handle_configs() const;
  ApiResponse handle_calibrate(const std::string& body);
  ApiResponse handle_add_config(const std::string& body);
  ApiResponse handle_healthz() const;

 private:
  Options options_;
  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const EngineSnapshot> current_;
  std::mutex writer_mutex_;
};

/// HTTP status for an error kind.
int http_status(ErrorKind kind) noexcept;

RouteRequest parse_route_request(const nlohmann::json& body);
nlohmann::json to_json(const RouteResponse& response);

/// Serves /route, /configs, /calibrate, /add-config and /healthz.
class HttpServer {
 public:
  explicit HttpServer(RoutingService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop() is called.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace radar
