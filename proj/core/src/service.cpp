#include "radar/service.hpp"

#include <algorithm>
#include <chrono>
#include <regex>

#include <fmt/format.h>
#include <httplib.h>

#include "radar/error.hpp"
#include "radar/matrix_io.hpp"
#include "radar/scalarize.hpp"

namespace radar {

using nlohmann::json;

// EngineSnapshot

std::vector<std::string> EngineSnapshot::config_ids() const {
  std::vector<std::string> ids;
  ids.reserve(pool.size());
  for (const auto& c : pool) ids.push_back(c.id);
  return ids;
}

void EngineSnapshot::validate() const {
  params.validate();
  if (pool.empty()) throw Error(ErrorKind::EmptyPool, "snapshot has no configurations");
  for (const auto& config : pool) {
    if (!params.theta.contains(config.id)) {
      throw Error(ErrorKind::Validation, fmt::format("pool entry '{}' has no ability", config.id));
    }
    if (!costs.normalized_cost.contains(config.id)) {
      throw Error(ErrorKind::Validation, fmt::format("pool entry '{}' has no cost", config.id));
    }
  }
}

json snapshot_to_json(const EngineSnapshot& snapshot) {
  json doc = to_json(snapshot.params);
  doc["version"] = snapshot.version;
  auto configs = json::array();
  for (const auto& c : snapshot.pool) {
    configs.push_back({{"id", c.id},
                       {"model", c.model_name},
                       {"budget", budget_to_string(c.budget)},
                       {"price_per_token", c.price_per_token}});
  }
  doc["configs"] = std::move(configs);
  doc["costs"] = to_json(snapshot.costs);
  if (snapshot.l2_normalize) doc["embedding_normalization"] = "l2";
  return doc;
}

EngineSnapshot snapshot_from_json(const json& doc) {
  std::vector<ModelConfiguration> pool;
  CostTable costs;
  try {
    for (const auto& c : doc.at("configs")) {
      ModelConfiguration config;
      config.id = c.at("id").get<std::string>();
      config.model_name = c.at("model").get<std::string>();
      config.budget = parse_budget(c.at("budget").get<std::string>());
      config.price_per_token = c.at("price_per_token").get<double>();
      pool.push_back(std::move(config));
    }
    costs = cost_table_from_json(doc.at("costs"));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, fmt::format("engine snapshot: {}", e.what()));
  }
  auto snapshot = make_snapshot(parameters_from_json(doc), std::move(costs), std::move(pool));
  snapshot.version = snapshot.params.version;
  snapshot.l2_normalize = doc.value("embedding_normalization", std::string("none")) == "l2";
  return snapshot;
}

void save_snapshot_file(const std::filesystem::path& path, const EngineSnapshot& snapshot) {
  auto tmp = path;
  tmp += ".tmp";
  {
    auto out = open_output(tmp);
    out << snapshot_to_json(snapshot).dump() << '\n';
    if (!out) throw Error(ErrorKind::Io, fmt::format("failed writing '{}'", tmp.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, fmt::format("cannot move snapshot into '{}'", path.string()));
}

EngineSnapshot load_snapshot_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, fmt::format("{}: {}", path.string(), e.what()));
  }
  return snapshot_from_json(doc);
}

EngineSnapshot make_snapshot(IrtParameters params, CostTable costs,
                             std::vector<ModelConfiguration> pool) {
  EngineSnapshot snapshot;
  for (auto& config : pool) {
    if (auto it = params.theta.find(config.id); it != params.theta.end()) {
      config.ability = it->second;
      config.calibrated = true;
    }
  }
  snapshot.version = params.version;
  snapshot.params = std::move(params);
  snapshot.costs = std::move(costs);
  snapshot.pool = std::move(pool);
  snapshot.validate();
  return snapshot;
}

EngineSnapshot with_configuration(const EngineSnapshot& base, ModelConfiguration config,
                                  const SessionResult& session, double raw_cost) {
  auto raw = base.costs.raw_cost;
  raw[config.id] = raw_cost;
  auto pool = base.pool;
  std::erase_if(pool, [&](const ModelConfiguration& c) { return c.id == config.id; });
  pool.push_back(std::move(config));

  auto params = session.params;
  params.version = std::max(params.version, base.version + 1);
  auto snapshot = make_snapshot(std::move(params), normalize_costs(std::move(raw), base.version + 1),
                                std::move(pool));
  snapshot.embed_source = base.embed_source;
  snapshot.l2_normalize = base.l2_normalize;
  return snapshot;
}

Onboarding onboard_from_recorded(const EngineSnapshot& base, ModelConfiguration config,
                                 const ResponseMatrix& recorded, const EmbeddingStore& embeddings,
                                 std::optional<std::size_t> budget) {
  std::map<std::string, const ResponseCell*> cells;
  std::vector<std::string> candidates;
  for (const auto& cell : recorded.cells) {
    if (cell.config_id != config.id) {
      // Accept alternative spellings of the same (model, budget) pair.
      auto key = parse_config_id(cell.config_id);
      if (key.model_name != config.model_name || key.budget != config.budget) continue;
    }
    if (cells.emplace(cell.query_id, &cell).second) candidates.push_back(cell.query_id);
  }
  if (candidates.empty()) {
    throw Error(ErrorKind::Validation,
                fmt::format("no recorded responses for configuration '{}'", config.id));
  }

  ResponseOracle oracle = [&cells](const std::string&, const std::string& query_id) {
    return cells.at(query_id)->correct;
  };
  Onboarding out;
  out.session = run_session(base.params, config.id, oracle, candidates,
                            budget.value_or(default_adaptive_budget(candidates.size())), embeddings);
  double tokens = 0.0;
  for (const auto& id : out.session.session.selected) {
    tokens += static_cast<double>(cells.at(id)->total_tokens());
  }
  out.raw_cost = tokens / static_cast<double>(out.session.session.selected.size()) *
                 config.price_per_token;
  out.snapshot = with_configuration(base, std::move(config), out.session, out.raw_cost);
  return out;
}

// RoutingService

RoutingService::RoutingService(Options options) : options_(std::move(options)) {}

std::shared_ptr<const EngineSnapshot> RoutingService::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return current_;
}

std::uint64_t RoutingService::publish_snapshot(EngineSnapshot snapshot) {
  snapshot.validate();
  if (!snapshot.embed_source) snapshot.embed_source = options_.embed_source;
  const auto previous = this->snapshot();
  const std::uint64_t floor = previous ? previous->version + 1 : 1;
  const std::uint64_t version = std::max(snapshot.version, floor);
  snapshot.version = version;
  snapshot.params.version = version;
  snapshot.costs.pool_version = version;

  if (!options_.snapshot_dir.empty()) {
    std::filesystem::create_directories(options_.snapshot_dir);
    save_snapshot_file(options_.snapshot_dir / fmt::format("snapshot-{:010}.json", version), snapshot);
  }
  auto published = std::make_shared<const EngineSnapshot>(std::move(snapshot));
  std::lock_guard lock(snapshot_mutex_);
  current_ = std::move(published);
  return version;
}

bool RoutingService::recover() {
  if (options_.snapshot_dir.empty() || !std::filesystem::is_directory(options_.snapshot_dir)) {
    return false;
  }
  static const std::regex pattern(R"(snapshot-(\d+)\.json)");
  std::optional<std::filesystem::path> newest;
  std::uint64_t newest_version = 0;
  for (const auto& entry : std::filesystem::directory_iterator(options_.snapshot_dir)) {
    std::smatch match;
    const auto name = entry.path().filename().string();
    if (!std::regex_match(name, match, pattern)) continue;
    const auto version = std::stoull(match[1].str());
    if (!newest || version > newest_version) {
      newest = entry.path();
      newest_version = version;
    }
  }
  if (!newest) return false;
  auto snapshot = load_snapshot_file(*newest);
  snapshot.embed_source = options_.embed_source;
  auto published = std::make_shared<const EngineSnapshot>(std::move(snapshot));
  std::lock_guard lock(snapshot_mutex_);
  current_ = std::move(published);
  return true;
}

RouteResponse RoutingService::route(const RouteRequest& request) const {
  using clock = std::chrono::steady_clock;
  const auto snap = snapshot();
  if (!snap) throw Error(ErrorKind::NoSnapshot, "no calibrated snapshot has been published");
  request.profile.validate();

  RouteResponse response;
  response.snapshot_version = snap->version;

  const auto t0 = clock::now();
  Embedding computed;
  std::span<const double> embedding;
  if (request.embedding) {
    check_embedding(*request.embedding, snap->params.dim, "request");
    embedding = *request.embedding;
    if (snap->l2_normalize) {
      computed = *request.embedding;
      l2_normalize(computed);
      embedding = computed;
    }
  } else {
    if (!snap->embed_source) {
      throw Error(ErrorKind::MalformedRequest,
                  "no embedding source is configured; supply the embedding inline");
    }
    const auto& source = *snap->embed_source;
    const std::optional<std::string>& key =
        source.kind() == EmbeddingKind::Store && request.query_id ? request.query_id : request.text;
    if (!key) throw Error(ErrorKind::MalformedRequest, "request needs embedding, query_id or text");
    computed = embed_query(source, *key);
    if (snap->l2_normalize) l2_normalize(computed);
    if (computed.size() != snap->params.dim) {
      throw Error(ErrorKind::DimensionMismatch, "embedding source dimension differs from the model");
    }
    embedding = computed;
  }
  const auto t1 = clock::now();

  const auto ids = snap->config_ids();
  const auto pool = build_pool(snap->params, snap->costs, ids, embedding);
  response.decision = radar::route(request.profile, pool);
  const auto t2 = clock::now();

  response.timing.embed_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  response.timing.route_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();
  return response;
}

json RoutingService::list_configs() const {
  const auto snap = snapshot();
  if (!snap) throw Error(ErrorKind::NoSnapshot, "no calibrated snapshot has been published");
  auto configs = json::array();
  for (const auto& id : ability_ordering(snap->params)) {
    auto it = std::find_if(snap->pool.begin(), snap->pool.end(),
                           [&](const auto& c) { return c.id == id; });
    if (it == snap->pool.end()) continue;
    configs.push_back({{"id", it->id},
                       {"model", it->model_name},
                       {"budget", budget_to_string(it->budget)},
                       {"ability", snap->params.ability(id)},
                       {"price_per_token", it->price_per_token},
                       {"raw_cost", snap->costs.raw(id)},
                       {"normalized_cost", snap->costs.normalized(id)}});
  }
  return {{"version", snap->version}, {"configs", std::move(configs)}};
}

std::uint64_t RoutingService::calibrate(const CalibrateRequest& request) {
  std::lock_guard writer(writer_mutex_);
  auto matrix = read_matrix_file(request.matrix);
  auto queries = read_queries_file(request.embeddings, matrix.dim == 0 ? std::nullopt : std::optional(matrix.dim));
  if (request.l2_normalize) {
    for (auto& q : queries) l2_normalize(q.embedding);
  }
  auto store = std::make_shared<EmbeddingStore>(EmbeddingStore::from_queries(queries, matrix.dim));
  auto configs = configurations_from_prices(matrix.configs, read_prices_file(request.prices));
  auto trained = train(matrix, *store, request.training);
  auto costs = compute_costs(matrix, configs);
  auto snapshot = make_snapshot(std::move(trained.params), std::move(costs), std::move(configs));
  snapshot.embed_source = options_.embed_source ? options_.embed_source : store;
  snapshot.l2_normalize = request.l2_normalize;
  return publish_snapshot(std::move(snapshot));
}

AddConfigResult RoutingService::add_config(const AddConfigRequest& request) {
  std::lock_guard writer(writer_mutex_);
  const auto base = snapshot();
  if (!base) throw Error(ErrorKind::NoSnapshot, "no calibrated snapshot has been published");

  auto config = ModelConfiguration::from_id(request.config_id, request.price_per_token);
  const auto recorded = read_matrix_file(request.responses);

  std::shared_ptr<const EmbeddingStore> store;
  if (request.embeddings) {
    auto queries = read_queries_file(*request.embeddings, base->params.dim);
    if (base->l2_normalize) {
      for (auto& q : queries) l2_normalize(q.embedding);
    }
    store = std::make_shared<EmbeddingStore>(EmbeddingStore::from_queries(queries, base->params.dim));
  } else {
    store = std::dynamic_pointer_cast<const EmbeddingStore>(base->embed_source);
    if (!store) {
      throw Error(ErrorKind::MalformedRequest,
                  "candidate embeddings are required when the service has no embedding store");
    }
  }

  auto onboarding = onboard_from_recorded(*base, std::move(config), recorded, *store, request.budget);
  AddConfigResult result;
  result.session = std::move(onboarding.session);
  result.version = publish_snapshot(std::move(onboarding.snapshot));
  return result;
}

// JSON endpoints

int http_status(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NoSnapshot: return 503;
    case ErrorKind::UnknownConfiguration:
    case ErrorKind::LookupMiss: return 404;
    case ErrorKind::RemoteUnavailable: return 502;
    case ErrorKind::Io:
    case ErrorKind::Numerical: return 500;
    default: return 400;
  }
}

namespace {

ApiResponse error_response(ErrorKind kind, const std::string& message) {
  return {http_status(kind), {{"error", to_string(kind)}, {"message", message}}};
}

template <typename Fn>
ApiResponse guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return error_response(e.kind(), e.what());
  } catch (const json::exception& e) {
    return error_response(ErrorKind::MalformedRequest, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return error_response(ErrorKind::Io, e.what());
  }
}

json parse_body(const std::string& body) {
  try {
    auto doc = json::parse(body);
    if (!doc.is_object()) throw Error(ErrorKind::MalformedRequest, "request body must be an object");
    return doc;
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::MalformedRequest, e.what());
  }
}

TrainingConfig training_from_json(const json& doc) {
  TrainingConfig config;
  config.epochs = doc.value("epochs", config.epochs);
  config.learning_rate = doc.value("learning_rate", config.learning_rate);
  config.batch_size = doc.value("batch_size", config.batch_size);
  config.grad_clip_norm = doc.value("grad_clip_norm", config.grad_clip_norm);
  config.seed = doc.value("seed", config.seed);
  if (doc.value("discrimination", std::string("linear")) == "softplus") {
    config.link = DiscriminationLink::Softplus;
  }
  return config;
}

json transcript_json(const SessionResult& result) {
  auto steps = json::array();
  for (const auto& s : result.transcript) {
    steps.push_back({{"step", s.step},
                     {"query_id", s.query_id},
                     {"correct", s.correct ? 1 : 0},
                     {"theta_hat", s.theta_hat}});
  }
  return steps;
}

}  // namespace

RouteRequest parse_route_request(const json& body) {
  RouteRequest request;
  try {
    if (auto it = body.find("embedding"); it != body.end() && !it->is_null()) {
      request.embedding = it->get<Embedding>();
    }
    if (auto it = body.find("query_id"); it != body.end() && !it->is_null()) {
      request.query_id = it->get<std::string>();
    }
    if (auto it = body.find("text"); it != body.end() && !it->is_null()) {
      request.text = it->get<std::string>();
    }
    request.profile.w1 = body.at("w1").get<double>();
    request.profile.scalarization =
        parse_scalarization(body.value("scalarization", std::string("linear")));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedRequest, e.what());
  } catch (const Error& e) {
    throw Error(ErrorKind::MalformedRequest, e.what());
  }
  if (!request.embedding && !request.query_id && !request.text) {
    throw Error(ErrorKind::MalformedRequest, "request needs embedding, query_id or text");
  }
  return request;
}

json to_json(const RouteResponse& response) {
  const auto& d = response.decision;
  return {{"config_id", d.config_id},
          {"predicted_performance", d.predicted_performance},
          {"predicted_cost", d.predicted_cost},
          {"scalar_score", d.scalar_score},
          {"w1", d.profile.w1},
          {"scalarization", to_string(d.profile.scalarization)},
          {"snapshot_version", response.snapshot_version},
          {"timing", {{"embed_ms", response.timing.embed_ms}, {"route_ms", response.timing.route_ms}}}};
}

ApiResponse RoutingService::handle_route(const std::string& body) const {
  return guarded([&] { return ApiResponse{200, to_json(route(parse_route_request(parse_body(body))))}; });
}

ApiResponse RoutingService::handle_configs() const {
  return guarded([&] { return ApiResponse{200, list_configs()}; });
}

ApiResponse RoutingService::handle_calibrate(const std::string& body) {
  return guarded([&] {
    const auto doc = parse_body(body);
    CalibrateRequest request;
    request.matrix = doc.at("matrix").get<std::string>();
    request.embeddings = doc.at("embeddings").get<std::string>();
    if (auto it = doc.find("prices"); it != doc.end()) {
      request.prices = it->get<std::string>();
    } else if (!options_.default_prices.empty()) {
      request.prices = options_.default_prices;
    } else {
      throw Error(ErrorKind::MalformedRequest, "calibrate request needs \"prices\"");
    }
    if (auto it = doc.find("training"); it != doc.end()) request.training = training_from_json(*it);
    request.l2_normalize = doc.value("normalize_embeddings", false);
    const auto version = calibrate(request);
    const auto snap = snapshot();
    return ApiResponse{200, {{"version", version}, {"ability_ordering", ability_ordering(snap->params)}}};
  });
}

ApiResponse RoutingService::handle_add_config(const std::string& body) {
  return guarded([&] {
    const auto doc = parse_body(body);
    AddConfigRequest request;
    request.config_id = doc.at("config").get<std::string>();
    request.price_per_token = doc.at("price_per_token").get<double>();
    request.responses = doc.at("responses").get<std::string>();
    if (auto it = doc.find("embeddings"); it != doc.end()) request.embeddings = it->get<std::string>();
    if (auto it = doc.find("budget"); it != doc.end()) request.budget = it->get<std::size_t>();
    auto result = add_config(request);
    return ApiResponse{200,
                       {{"version", result.version},
                        {"config_id", result.session.session.config_id},
                        {"theta_hat", result.session.session.theta_hat},
                        {"at_bound", result.session.at_bound},
                        {"transcript", transcript_json(result.session)}}};
  });
}

ApiResponse RoutingService::handle_healthz() const {
  const auto snap = snapshot();
  json body = {{"status", "ok"}, {"snapshot_version", snap ? json(snap->version) : json(nullptr)}};
  return {200, std::move(body)};
}

// HttpServer

struct HttpServer::Impl {
  explicit Impl(RoutingService& svc) : service(svc) {}
  RoutingService& service;
  httplib::Server server;
};

namespace {

void reply(httplib::Response& res, const ApiResponse& api) {
  res.status = api.status;
  res.set_content(api.body.dump(), "application/json");
}

}  // namespace

HttpServer::HttpServer(RoutingService& service)
    : impl_(std::make_unique<Impl>(service)) {
  auto& s = impl_->server;
  auto& svc = impl_->service;
  s.Post("/route", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.handle_route(req.body));
  });
  s.Get("/configs", [&svc](const httplib::Request&, httplib::Response& res) {
    reply(res, svc.handle_configs());
  });
  s.Post("/calibrate", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.handle_calibrate(req.body));
  });
  s.Post("/add-config", [&svc](const httplib::Request& req, httplib::Response& res) {
    reply(res, svc.handle_add_config(req.body));
  });
  s.Get("/healthz", [&svc](const httplib::Request&, httplib::Response& res) {
    reply(res, svc.handle_healthz());
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorKind::Io, fmt::format("cannot bind {}", host));
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorKind::Io, fmt::format("cannot bind {}:{}", host, port));
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace radar
