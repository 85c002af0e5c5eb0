#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "radar/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(const std::string& args) {
  const auto cmd = fmt::format("{} {} >/dev/null 2>&1", RADAR_CLI_PATH, args);
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

fs::path fresh_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

// simulate -> calibrate -> evaluate into dir/tag.json
void pipeline(const fs::path& dir, const std::string& tag, const std::string& extra_eval = "") {
  const auto d = dir.string();
  REQUIRE(run(fmt::format("--seed 5 simulate --configs 6 --queries 120 --dim 4 --out {}", d)) == 0);
  REQUIRE(run(fmt::format("--seed 5 calibrate --matrix {0}/train.jsonl --embeddings {0}/embeddings.jsonl "
                          "--prices {0}/prices.json --out {0}/snap.json --epochs 20",
                          d)) == 0);
  REQUIRE(run(fmt::format("evaluate --snapshot {0}/snap.json --matrix {0}/test.jsonl "
                          "--embeddings {0}/embeddings.jsonl --out {0}/{1}.json {2}",
                          d, tag, extra_eval)) == 0);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("pipeline is byte-for-byte reproducible") {
  const auto a = fresh_dir("radar_cli_run_a");
  const auto b = fresh_dir("radar_cli_run_b");
  pipeline(a, "report");
  pipeline(b, "report");
  const auto first = slurp(a / "report.json");
  CHECK_FALSE(first.empty());
  CHECK(first == slurp(b / "report.json"));
  CHECK(slurp(a / "snap.json") == slurp(b / "snap.json"));
  const auto report = json::parse(first);
  CHECK(report.at("points").size() == 101);
  CHECK(report.at("hypervolume").get<double>() > 0.0);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("single-point grid gives a single point") {
  const auto dir = fresh_dir("radar_cli_grid1");
  pipeline(dir, "one", "--grid 1");
  const auto report = json::parse(slurp(dir / "one.json"));
  REQUIRE(report.at("points").size() == 1);
  CHECK(report.at("points")[0].at("w1") == 1.0);
  fs::remove_all(dir);
}

TEST_CASE("routing at w1 = 0 always picks the cheapest configuration") {
  const auto dir = fresh_dir("radar_cli_route");
  pipeline(dir, "r");
  const auto d = dir.string();
  REQUIRE(run(fmt::format("route --snapshot {0}/snap.json --queries {0}/embeddings.jsonl --w1 0 "
                          "--out {0}/decisions.jsonl",
                          d)) == 0);
  const auto snapshot = radar::load_snapshot_file(dir / "snap.json");
  std::string cheapest;
  double best = 2.0;
  for (const auto& [id, c] : snapshot.costs.normalized_cost) {
    if (c < best) {
      best = c;
      cheapest = id;
    }
  }
  std::ifstream in(dir / "decisions.jsonl");
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    CHECK(json::parse(line).at("config_id") == cheapest);
    ++n;
  }
  CHECK(n == 120);
  fs::remove_all(dir);
}

TEST_CASE("exit codes") {
  CHECK(run("route --snapshot /nonexistent/snap.json --queries x --w1 0.5 --out /tmp/x") == 3);
  CHECK(run("bogus-command") == 2);
  const auto dir = fresh_dir("radar_cli_exit");
  pipeline(dir, "e");
  CHECK(run(fmt::format("route --snapshot {0}/snap.json --queries {0}/embeddings.jsonl --w1 1.5 --out {0}/d",
                        dir.string())) == 2);
  CHECK(run(fmt::format("calibrate --matrix {0}/train.jsonl --embeddings {0}/embeddings.jsonl "
                        "--prices {0}/prices.json --out {0}/s.json --lr 0",
                        dir.string())) == 2);
  fs::remove_all(dir);
}

TEST_CASE("adaptive onboarding from a simulated respondent") {
  const auto dir = fresh_dir("radar_cli_add");
  pipeline(dir, "base");
  const auto d = dir.string();
  REQUIRE(run(fmt::format("--seed 2 add-config --snapshot {0}/snap.json --config fresh@1024 --price 1e-6 "
                          "--responses oracle --world {0}/world.json --embeddings {0}/embeddings.jsonl "
                          "--true-theta 0.5 --budget 15 --out {0}/snap2.json --transcript {0}/t.jsonl",
                          d)) == 0);
  const auto snapshot = radar::load_snapshot_file(dir / "snap2.json");
  CHECK(snapshot.params.theta.count("fresh@1024") == 1);
  std::ifstream in(dir / "t.jsonl");
  std::string line;
  int steps = 0;
  while (std::getline(in, line)) ++steps;
  CHECK(steps == 15);
  fs::remove_all(dir);
}

TEST_CASE("ingest with a split") {
  const auto dir = fresh_dir("radar_cli_ingest");
  fs::create_directories(dir);
  {
    std::ofstream log(dir / "raw.jsonl");
    for (int q = 0; q < 10; ++q) {
      for (const char* model : {"a", "b"}) {
        log << json{{"model", model}, {"budget", "low"}, {"query_id", fmt::format("q{}", q)},
                    {"correct", q % 2}, {"reasoning_tokens", 5}, {"completion_tokens", 5}}
                   .dump()
            << '\n';
      }
    }
  }
  const auto d = dir.string();
  REQUIRE(run(fmt::format("--seed 1 ingest --log {0}/raw.jsonl --dim 4 --out {0}/m.jsonl --split 0.8", d)) == 0);
  CHECK(fs::exists(dir / "m.train.jsonl"));
  CHECK(fs::exists(dir / "m.test.jsonl"));
  fs::remove_all(dir);
}

TEST_CASE("error records") {
  const radar::Error e(radar::ErrorKind::ThresholdUnreachable, "nope");
  const auto record = radar::cli::error_record(e);
  CHECK(record.at("error") == "threshold-unreachable");
  CHECK(record.at("exit_code") == 2);
  CHECK(radar::cli::exit_code(radar::ErrorKind::Io) == 3);
  CHECK(radar::cli::exit_code(radar::ErrorKind::Numerical) == 4);
}

}
