#include "commands.hpp"

#include <csignal>
#include <cstdlib>
#include <ostream>

#include <fmt/format.h>

#include "radar/adaptive.hpp"
#include "radar/costing.hpp"
#include "radar/embed.hpp"
#include "radar/ingest.hpp"
#include "radar/matrix_io.hpp"
#include "radar/metrics.hpp"
#include "radar/scalarize.hpp"
#include "radar/service.hpp"
#include "radar/synth.hpp"

namespace radar::cli {

using nlohmann::json;

void Logger::info(const std::string& event, const json& fields) const {
  if (json_) {
    json record = {{"level", "info"}, {"event", event}};
    for (const auto& [key, value] : fields.items()) record[key] = value;
    out_ << record.dump() << '\n';
    return;
  }
  std::string line = event;
  for (const auto& [key, value] : fields.items()) {
    line += fmt::format(" {}={}", key, value.is_string() ? value.get<std::string>() : value.dump());
  }
  out_ << line << '\n';
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Io: return kIoError;
    case ErrorKind::Numerical: return kNumericalFailure;
    default: return kValidationError;
  }
}

json error_record(const Error& error) {
  return {{"error", to_string(error.kind())},
          {"message", error.what()},
          {"exit_code", exit_code(error.kind())}};
}

namespace {

EmbeddingStore load_store(const std::filesystem::path& path, std::size_t dim, bool normalize) {
  auto queries = read_queries_file(path, dim == 0 ? std::nullopt : std::optional(dim));
  if (normalize) {
    for (auto& q : queries) l2_normalize(q.embedding);
  }
  return EmbeddingStore::from_queries(queries, dim);
}

json transcript_record(const TranscriptStep& step) {
  return {{"step", step.step},
          {"query_id", step.query_id},
          {"correct", step.correct ? 1 : 0},
          {"theta_hat", step.theta_hat}};
}

}  // namespace

void cmd_simulate(const SimulateOptions& options, const Logger& log) {
  const auto world = generate_world(options.configs, options.queries, options.dim, options.seed);
  const auto matrix = sample_matrix(world);
  const auto split = split_queries(matrix.queries, options.train_fraction, options.seed);

  const auto& dir = options.out_dir;
  std::filesystem::create_directories(dir);
  write_matrix_file(dir / "matrix.jsonl", matrix);
  write_matrix_file(dir / "train.jsonl", select_queries(matrix, split.train));
  write_matrix_file(dir / "test.jsonl", select_queries(matrix, split.test));
  write_queries_file(dir / "embeddings.jsonl", world.queries);
  write_prices_file(dir / "prices.json", world.prices());
  auto manifest = open_output(dir / "world.json");
  manifest << to_json(world).dump(2) << '\n';

  log.info("simulate", {{"configs", options.configs},
                        {"queries", options.queries},
                        {"dim", options.dim},
                        {"train_queries", split.train.size()},
                        {"test_queries", split.test.size()},
                        {"out", dir.string()}});
}

CalibrateSummary cmd_calibrate(const CalibrateOptions& options, const Logger& log) {
  auto matrix = read_matrix_file(options.matrix);
  if (options.query_fraction < 1.0) {
    const auto split = split_queries(matrix.queries, options.query_fraction, options.training.seed);
    matrix = select_queries(matrix, split.train);
    log.info("subsample", {{"fraction", options.query_fraction}, {"queries", matrix.queries.size()}});
  }
  const auto store = load_store(options.embeddings, matrix.dim, options.normalize_embeddings);
  auto configs = configurations_from_prices(matrix.configs, read_prices_file(options.prices));

  log.info("train", {{"configs", matrix.configs.size()},
                     {"queries", matrix.queries.size()},
                     {"cells", matrix.cells.size()},
                     {"epochs", options.training.epochs}});
  auto trained = train(matrix, store, options.training);
  auto costs = compute_costs(matrix, configs);

  CalibrateSummary summary;
  summary.final_loss = trained.report.final_loss;
  summary.ability_ordering = ability_ordering(trained.params);

  auto snapshot = make_snapshot(std::move(trained.params), std::move(costs), std::move(configs));
  snapshot.l2_normalize = options.normalize_embeddings;
  save_snapshot_file(options.out, snapshot);

  if (options.report) {
    json report = {{"epoch_losses", trained.report.epoch_losses},
                   {"initial_loss", trained.report.initial_loss},
                   {"final_loss", trained.report.final_loss},
                   {"steps", trained.report.steps},
                   {"sign_flipped", trained.report.sign_flipped},
                   {"ability_ordering", summary.ability_ordering}};
    auto out = open_output(*options.report);
    out << report.dump(2) << '\n';
  }
  log.info("calibrated", {{"initial_loss", trained.report.initial_loss},
                          {"final_loss", trained.report.final_loss},
                          {"snapshot", options.out.string()}});
  return summary;
}

void cmd_route(const RouteOptions& options, const Logger& log) {
  options.profile.validate();
  const auto snapshot = load_snapshot_file(options.snapshot);
  auto queries = read_queries_file(options.queries, snapshot.params.dim);
  const auto ids = snapshot.config_ids();

  auto out = open_output(options.out);
  for (auto& query : queries) {
    if (snapshot.l2_normalize) l2_normalize(query.embedding);
    const auto pool = build_pool(snapshot.params, snapshot.costs, ids, query.embedding);
    const auto decision = route(options.profile, pool);
    json record = {{"query_id", query.id},
                   {"config_id", decision.config_id},
                   {"predicted_performance", decision.predicted_performance},
                   {"predicted_cost", decision.predicted_cost},
                   {"scalar_score", decision.scalar_score},
                   {"w1", decision.profile.w1},
                   {"scalarization", to_string(decision.profile.scalarization)}};
    out << record.dump() << '\n';
  }
  log.info("routed", {{"queries", queries.size()}, {"out", options.out.string()}});
}

json cmd_evaluate(const EvaluateOptions& options, const Logger& log) {
  const auto snapshot = load_snapshot_file(options.snapshot);
  const auto truth = read_matrix_file(options.matrix);
  const auto store = load_store(options.embeddings, snapshot.params.dim, snapshot.l2_normalize);
  const auto ids = snapshot.config_ids();

  std::vector<std::vector<PoolEntry>> pools;
  pools.reserve(truth.queries.size());
  for (const auto& q : truth.queries) {
    pools.push_back(build_pool(snapshot.params, snapshot.costs, ids, store.view(q)));
  }
  const auto grid = weight_grid(options.grid_points);
  const auto decisions = sweep(grid, options.scalarization, pools);
  const auto curve = realize_curve(decisions, truth.queries, truth, snapshot.costs);

  const auto reference = select_reference(truth, snapshot.costs, options.reference);
  json cpt_table = json::object();
  for (double level : options.cpt_levels) {
    const auto key = fmt::format("{:g}", level);
    try {
      cpt_table[key] = cpt(curve, level, reference.performance, reference.raw_cost);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ThresholdUnreachable) throw;
      cpt_table[key] = nullptr;
    }
  }

  // Cheapest correct configuration per query, for context.
  const auto oracle = oracle_router_baseline(truth, snapshot.costs);
  double oracle_perf = 0.0;
  double oracle_cost = 0.0;
  std::map<std::pair<std::string, std::string>, bool> cells;
  for (const auto& cell : truth.cells) cells[{cell.config_id, cell.query_id}] = cell.correct;
  for (const auto& [query, config] : oracle) {
    oracle_perf += cells.at({config, query}) ? 1.0 : 0.0;
    oracle_cost += snapshot.costs.normalized(config);
  }
  const double n_oracle = static_cast<double>(std::max<std::size_t>(oracle.size(), 1));

  json report = {{"scalarization", to_string(options.scalarization)},
                 {"snapshot_version", snapshot.version},
                 {"n_queries", truth.queries.size()},
                 {"points", to_json(curve)},
                 {"hypervolume", hypervolume(curve)},
                 {"cpt", std::move(cpt_table)},
                 {"reference",
                  {{"config_id", reference.config_id},
                   {"performance", reference.performance},
                   {"raw_cost", reference.raw_cost}}},
                 {"oracle", {{"performance", oracle_perf / n_oracle}, {"cost", oracle_cost / n_oracle}}}};

  auto out = open_output(options.out);
  out << report.dump(2) << '\n';
  if (options.csv) {
    auto csv = open_output(*options.csv);
    write_curve_csv(csv, curve);
  }
  log.info("evaluated", {{"points", curve.points.size()},
                         {"hypervolume", report["hypervolume"]},
                         {"out", options.out.string()}});
  return report;
}

json cmd_add_config(const AddConfigOptions& options, const Logger& log) {
  const auto base = load_snapshot_file(options.snapshot);
  const auto store = load_store(options.embeddings, base.params.dim, base.l2_normalize);
  auto config = ModelConfiguration::from_id(options.config_id, options.price_per_token);

  Onboarding onboarding;
  if (options.responses == "oracle") {
    if (!options.world) {
      throw Error(ErrorKind::Validation, "--responses oracle needs --world <world.json>");
    }
    auto manifest = open_input(*options.world);
    json doc;
    try {
      doc = json::parse(manifest);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::Parse, fmt::format("{}: {}", options.world->string(), e.what()));
    }
    const auto world = world_from_json(doc);
    const auto oracle = simulated_oracle(world.true_parameters(), store, options.true_theta, options.seed);
    const auto& candidates = store.ids();
    const auto budget = options.budget.value_or(default_adaptive_budget(candidates.size()));
    onboarding.session = run_session(base.params, config.id, oracle, candidates, budget, store);
    onboarding.raw_cost = options.mean_tokens * config.price_per_token;
    onboarding.snapshot = with_configuration(base, std::move(config), onboarding.session, onboarding.raw_cost);
  } else {
    const auto recorded = read_matrix_file(options.responses);
    onboarding = onboard_from_recorded(base, std::move(config), recorded, store, options.budget);
  }
  save_snapshot_file(options.out, onboarding.snapshot);

  if (options.transcript) {
    auto out = open_output(*options.transcript);
    for (const auto& step : onboarding.session.transcript) out << transcript_record(step).dump() << '\n';
  }
  json summary = {{"config_id", onboarding.session.session.config_id},
                  {"theta_hat", onboarding.session.session.theta_hat},
                  {"at_bound", onboarding.session.at_bound},
                  {"queries_asked", onboarding.session.transcript.size()},
                  {"raw_cost", onboarding.raw_cost},
                  {"version", onboarding.snapshot.version}};
  log.info("add-config", summary);
  return summary;
}

void cmd_ingest(const IngestOptions& options, const Logger& log) {
  if (options.dim == 0) throw Error(ErrorKind::Validation, "--dim must be positive");
  auto in = open_input(options.log);
  const auto result = build_matrix(in, options.dim);
  write_matrix_file(options.out, result.matrix);
  log.info("ingest", {{"configs", result.matrix.configs.size()},
                      {"queries", result.matrix.queries.size()},
                      {"cells", result.matrix.cells.size()},
                      {"duplicates", result.duplicates}});

  std::optional<QuerySplit> split;
  if (!options.holdout_tags.empty()) {
    split = holdout_by_tag(result.query_tags,
                           {options.holdout_tags.begin(), options.holdout_tags.end()},
                           {options.exclude_tags.begin(), options.exclude_tags.end()});
  } else if (options.split_fraction) {
    split = split_queries(result.matrix.queries, *options.split_fraction, options.seed);
  }
  if (!split) return;
  for (const auto& warning : split->warnings) log.info("warning", {{"message", warning}});

  auto sibling = [&](const char* suffix) {
    auto path = options.out;
    path.replace_filename(options.out.stem().string() + suffix);
    return path;
  };
  write_matrix_file(sibling(".train.jsonl"), select_queries(result.matrix, split->train));
  write_matrix_file(sibling(".test.jsonl"), select_queries(result.matrix, split->test));
  log.info("split", {{"train", split->train.size()},
                     {"test", split->test.size()},
                     {"excluded", split->excluded.size()}});
}

namespace {

HttpServer* g_server = nullptr;

extern "C" void handle_stop_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

}  // namespace

void cmd_serve(const ServeOptions& options, const Logger& log) {
  json config = json::object();
  if (options.config) {
    auto in = open_input(*options.config);
    try {
      config = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::Parse, fmt::format("{}: {}", options.config->string(), e.what()));
    }
  }

  RoutingService::Options service_options;
  service_options.snapshot_dir = options.snapshot_dir;
  if (service_options.snapshot_dir.empty()) {
    service_options.snapshot_dir = config.value("snapshot_dir", std::string());
  }
  if (service_options.snapshot_dir.empty()) {
    if (const char* env = std::getenv("RADAR_SNAPSHOT_DIR"); env != nullptr) {
      service_options.snapshot_dir = env;
    }
  }

  service_options.default_prices = config.value("prices", std::string());

  std::string endpoint = config.value("embed_endpoint", std::string());
  if (endpoint.empty()) {
    if (const char* env = std::getenv("RADAR_EMBED_ENDPOINT"); env != nullptr) endpoint = env;
  }
  if (!endpoint.empty()) {
    RemoteEmbeddingOptions remote;
    remote.endpoint = endpoint;
    remote.dim = config.value("embed_dim", std::size_t{0});
    if (remote.dim == 0) throw Error(ErrorKind::Validation, "embed_dim is required with an embedding endpoint");
    remote.max_in_flight = config.value("embed_max_in_flight", std::ptrdiff_t{8});
    service_options.embed_source = std::make_shared<RemoteEmbeddingService>(remote);
  }

  RoutingService service(service_options);
  const bool recovered = service.recover();
  HttpServer server(service);
  const int port = server.bind(config.value("host", options.host), config.value("port", options.port));
  log.info("serve", {{"port", port},
                     {"recovered_snapshot", recovered},
                     {"snapshot_dir", service_options.snapshot_dir.string()}});
  g_server = &server;
  std::signal(SIGINT, handle_stop_signal);
  std::signal(SIGTERM, handle_stop_signal);
  server.listen();
  g_server = nullptr;
}

}  // namespace radar::cli
