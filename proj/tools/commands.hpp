#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radar/error.hpp"
#include "radar/irt.hpp"
#include "radar/types.hpp"

namespace radar::cli {

/// Progress records on stderr, either "event key=value" text or JSON lines.
class Logger {
 public:
  Logger(std::ostream& out, bool json) : out_(out), json_(json) {}
  void info(const std::string& event, const nlohmann::json& fields = nlohmann::json::object()) const;

 private:
  std::ostream& out_;
  bool json_;
};

enum ExitCode : int {
  kSuccess = 0,
  kValidationError = 2,
  kIoError = 3,
  kNumericalFailure = 4,
};

int exit_code(ErrorKind kind) noexcept;
/// {"error": kind, "message": ..., "exit_code": n}
nlohmann::json error_record(const Error& error);

struct SimulateOptions {
  std::size_t configs = 40;
  std::size_t queries = 2000;
  std::size_t dim = 16;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
};

/// Writes matrix.jsonl, train.jsonl, test.jsonl, embeddings.jsonl,
/// prices.json and world.json into out_dir.
void cmd_simulate(const SimulateOptions& options, const Logger& log);

struct CalibrateOptions {
  std::filesystem::path matrix;
  std::filesystem::path embeddings;
  std::filesystem::path prices;
  std::filesystem::path out;             // snapshot file
  std::optional<std::filesystem::path> report;
  TrainingConfig training;
  double query_fraction = 1.0;  // train on a seeded subsample of the queries
  bool normalize_embeddings = false;
};

struct CalibrateSummary {
  double final_loss = 0.0;
  std::vector<std::string> ability_ordering;
};

CalibrateSummary cmd_calibrate(const CalibrateOptions& options, const Logger& log);

struct RouteOptions {
  std::filesystem::path snapshot;
  std::filesystem::path queries;  // embedding file
  TradeoffProfile profile;
  std::filesystem::path out;      // decisions, line-delimited JSON
};

void cmd_route(const RouteOptions& options, const Logger& log);

struct EvaluateOptions {
  std::filesystem::path snapshot;
  std::filesystem::path matrix;      // ground truth for the test queries
  std::filesystem::path embeddings;
  std::size_t grid_points = 101;
  Scalarization scalarization = Scalarization::Linear;
  std::optional<std::string> reference;
  std::vector<double> cpt_levels{90.0};
  std::filesystem::path out;         // JSON report
  std::optional<std::filesystem::path> csv;
};

nlohmann::json cmd_evaluate(const EvaluateOptions& options, const Logger& log);

struct AddConfigOptions {
  std::filesystem::path snapshot;
  std::string config_id;
  double price_per_token = 0.0;
  std::string responses;  // matrix file, or "oracle" to simulate from a world manifest
  std::filesystem::path embeddings;
  std::optional<std::size_t> budget;
  std::filesystem::path out;  // updated snapshot
  std::optional<std::filesystem::path> transcript;
  // oracle mode
  std::optional<std::filesystem::path> world;
  double true_theta = 0.0;
  double mean_tokens = 1000.0;
  std::uint64_t seed = 0;
};

nlohmann::json cmd_add_config(const AddConfigOptions& options, const Logger& log);

struct IngestOptions {
  std::filesystem::path log;
  std::size_t dim = 0;
  std::filesystem::path out;
  std::optional<double> split_fraction;
  std::vector<std::string> holdout_tags;
  std::vector<std::string> exclude_tags;
  std::uint64_t seed = 0;
};

/// Writes the full matrix and, when splitting, <out stem>.train/.test files.
void cmd_ingest(const IngestOptions& options, const Logger& log);

struct ServeOptions {
  std::optional<std::filesystem::path> config;  // JSON: embed_endpoint, embed_dim, prices, snapshot_dir, host, port
  std::filesystem::path snapshot_dir;
  std::string host = "127.0.0.1";
  int port = 8080;
};

void cmd_serve(const ServeOptions& options, const Logger& log);

}  // namespace radar::cli
