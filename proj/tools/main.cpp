#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using radar::cli::Logger;

radar::Scalarization scalarization_from(const std::string& name) {
  return radar::parse_scalarization(name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"radar: cost-aware routing across reasoning model configurations"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  bool json_logs = false;
  app.add_option("--seed", seed, "Seed for every random draw")->capture_default_str();
  app.add_flag("--json-logs", json_logs, "Log progress as JSON lines on stderr");

  radar::cli::SimulateOptions simulate;
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic known-truth dataset");
  sim->add_option("--configs", simulate.configs)->capture_default_str();
  sim->add_option("--queries", simulate.queries)->capture_default_str();
  sim->add_option("--dim", simulate.dim)->capture_default_str();
  sim->add_option("--train-fraction", simulate.train_fraction)->capture_default_str();
  sim->add_option("--out", simulate.out_dir, "Output directory")->required();

  radar::cli::CalibrateOptions calibrate;
  int epochs = calibrate.training.epochs;
  double learning_rate = calibrate.training.learning_rate;
  int batch = calibrate.training.batch_size;
  std::string link = "linear";
  auto* cal = app.add_subcommand("calibrate", "Fit the IRT model and write a snapshot");
  cal->add_option("--matrix", calibrate.matrix, "Response matrix (JSONL)")->required();
  cal->add_option("--embeddings", calibrate.embeddings, "Query embeddings (JSONL)")->required();
  cal->add_option("--prices", calibrate.prices, "Price list (JSON)")->required();
  cal->add_option("--out", calibrate.out, "Snapshot file")->required();
  cal->add_option("--report", calibrate.report, "Training report (JSON)");
  cal->add_option("--epochs", epochs)->capture_default_str();
  cal->add_option("--lr", learning_rate)->capture_default_str();
  cal->add_option("--batch", batch)->capture_default_str();
  cal->add_option("--link", link, "Discrimination link")
      ->check(CLI::IsMember({"linear", "softplus"}))
      ->capture_default_str();
  cal->add_option("--query-fraction", calibrate.query_fraction, "Train on a subsample of queries")
      ->capture_default_str();
  cal->add_flag("--normalize-embeddings", calibrate.normalize_embeddings,
                "L2-normalize embeddings (recorded in the snapshot)");

  radar::cli::RouteOptions route;
  double route_w1 = 0.5;
  std::string route_scalarization = "linear";
  auto* rt = app.add_subcommand("route", "Route queries under a trade-off profile");
  rt->add_option("--snapshot", route.snapshot)->required();
  rt->add_option("--queries", route.queries, "Query embeddings (JSONL)")->required();
  rt->add_option("--w1", route_w1, "Performance weight in [0,1]")->required();
  rt->add_option("--scalarization", route_scalarization)
      ->check(CLI::IsMember({"linear", "chebyshev"}))
      ->capture_default_str();
  rt->add_option("--out", route.out, "Decisions (JSONL)")->required();

  radar::cli::EvaluateOptions evaluate;
  std::string eval_scalarization = "linear";
  auto* ev = app.add_subcommand("evaluate", "Sweep the trade-off curve on held-out queries");
  ev->add_option("--snapshot", evaluate.snapshot)->required();
  ev->add_option("--matrix", evaluate.matrix, "Ground-truth response matrix")->required();
  ev->add_option("--embeddings", evaluate.embeddings)->required();
  ev->add_option("--grid", evaluate.grid_points, "Number of w1 grid points")->capture_default_str();
  ev->add_option("--scalarization", eval_scalarization)
      ->check(CLI::IsMember({"linear", "chebyshev"}))
      ->capture_default_str();
  ev->add_option("--reference", evaluate.reference, "Reference configuration for CPT");
  ev->add_option("--cpt", evaluate.cpt_levels, "CPT levels in percent")->capture_default_str();
  ev->add_option("--out", evaluate.out, "Report (JSON)")->required();
  ev->add_option("--csv", evaluate.csv, "Curve points (CSV)");

  radar::cli::AddConfigOptions add;
  auto* ac = app.add_subcommand("add-config", "Onboard a configuration by adaptive testing");
  ac->add_option("--snapshot", add.snapshot)->required();
  ac->add_option("--config", add.config_id, "Configuration id, model@budget")->required();
  ac->add_option("--price", add.price_per_token, "Dollars per token")->required();
  ac->add_option("--responses", add.responses, "Recorded responses (JSONL) or \"oracle\"")->required();
  ac->add_option("--embeddings", add.embeddings)->required();
  ac->add_option("--budget", add.budget, "Number of queries to ask");
  ac->add_option("--out", add.out, "Updated snapshot")->required();
  ac->add_option("--transcript", add.transcript, "Session transcript (JSONL)");
  ac->add_option("--world", add.world, "World manifest for --responses oracle");
  ac->add_option("--true-theta", add.true_theta)->capture_default_str();
  ac->add_option("--mean-tokens", add.mean_tokens)->capture_default_str();

  radar::cli::IngestOptions ingest;
  auto* in = app.add_subcommand("ingest", "Build a response matrix from a raw response log");
  in->add_option("--log", ingest.log)->required();
  in->add_option("--dim", ingest.dim, "Embedding dimension")->required();
  in->add_option("--out", ingest.out)->required();
  in->add_option("--split", ingest.split_fraction, "Train fraction for a seeded split");
  in->add_option("--holdout-tag", ingest.holdout_tags, "Hold out queries with this tag");
  in->add_option("--exclude-tag", ingest.exclude_tags, "Drop queries with this tag from training");

  radar::cli::ServeOptions serve;
  auto* sv = app.add_subcommand("serve", "Run the HTTP routing service");
  sv->add_option("--config", serve.config, "Service configuration (JSON)");
  sv->add_option("--snapshot-dir", serve.snapshot_dir);
  sv->add_option("--host", serve.host)->capture_default_str();
  sv->add_option("--port", serve.port)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : radar::cli::kValidationError;
  }

  Logger log(std::cerr, json_logs);
  try {
    if (*sim) {
      simulate.seed = seed;
      radar::cli::cmd_simulate(simulate, log);
    } else if (*cal) {
      calibrate.training.seed = seed;
      calibrate.training.epochs = epochs;
      calibrate.training.learning_rate = learning_rate;
      calibrate.training.batch_size = batch;
      calibrate.training.link =
          link == "softplus" ? radar::DiscriminationLink::Softplus : radar::DiscriminationLink::Linear;
      const auto summary = radar::cli::cmd_calibrate(calibrate, log);
      std::cout << nlohmann::json{{"final_loss", summary.final_loss},
                                  {"ability_ordering", summary.ability_ordering}}
                       .dump()
                << '\n';
    } else if (*rt) {
      route.profile = {route_w1, scalarization_from(route_scalarization)};
      radar::cli::cmd_route(route, log);
    } else if (*ev) {
      evaluate.scalarization = scalarization_from(eval_scalarization);
      const auto report = radar::cli::cmd_evaluate(evaluate, log);
      std::cout << nlohmann::json{{"hypervolume", report["hypervolume"]}, {"cpt", report["cpt"]}}.dump()
                << '\n';
    } else if (*ac) {
      add.seed = seed;
      std::cout << radar::cli::cmd_add_config(add, log).dump() << '\n';
    } else if (*in) {
      ingest.seed = seed;
      radar::cli::cmd_ingest(ingest, log);
    } else if (*sv) {
      radar::cli::cmd_serve(serve, log);
    }
  } catch (const radar::Error& e) {
    std::cerr << radar::cli::error_record(e).dump() << '\n';
    return radar::cli::exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << nlohmann::json{{"error", "io"}, {"message", e.what()}, {"exit_code", radar::cli::kIoError}}.dump()
              << '\n';
    return radar::cli::kIoError;
  }
  return radar::cli::kSuccess;
}
