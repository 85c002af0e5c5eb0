#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>
#include <fmt/format.h>

#include "radar/adaptive.hpp"
#include "radar/costing.hpp"
#include "radar/metrics.hpp"
#include "radar/scalarize.hpp"
#include "radar/service.hpp"
#include "radar/synth.hpp"

using namespace radar;

namespace {

EngineSnapshot wide_snapshot(std::size_t dim, std::size_t n_configs) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 1.0);
  IrtParameters params;
  params.dim = dim;
  for (std::size_t i = 0; i < dim; ++i) {
    params.w_a.push_back(normal(rng) / 64.0);
    params.w_b.push_back(normal(rng) / 64.0);
  }
  std::vector<ModelConfiguration> pool;
  std::map<std::string, double> raw;
  for (std::size_t j = 0; j < n_configs; ++j) {
    const auto id = fmt::format("m{}@{}", j / 5, 1024 * (j % 5));
    pool.push_back(ModelConfiguration::from_id(id, 1e-6));
    params.theta[id] = normal(rng);
    raw[id] = 0.001 * static_cast<double>(j + 1);
  }
  return make_snapshot(std::move(params), normalize_costs(raw), std::move(pool));
}

void BM_ServiceRoute(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  RoutingService service({});
  service.publish_snapshot(wide_snapshot(dim, 35));
  RouteRequest request;
  request.embedding = Embedding(dim, 0.01);
  request.profile = {0.6, Scalarization::Linear};
  for (auto _ : state) benchmark::DoNotOptimize(service.route(request));
}
BENCHMARK(BM_ServiceRoute)->Arg(16)->Arg(1024)->Arg(4096);

void BM_Route(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<PoolEntry> pool;
  for (int i = 0; i < state.range(0); ++i) pool.push_back({fmt::format("c{}", i), unit(rng), unit(rng)});
  const TradeoffProfile profile{0.5, Scalarization::Chebyshev};
  for (auto _ : state) benchmark::DoNotOptimize(route_index(profile, pool));
}
BENCHMARK(BM_Route)->Arg(35)->Arg(1000);

void BM_TrainingEpoch(benchmark::State& state) {
  const auto world = generate_world(40, 500, 16, 3);
  const auto matrix = sample_matrix(world);
  const auto store = world.embedding_store();
  TrainingConfig config;
  config.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train(matrix, store, config));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(matrix.cells.size()));
}
BENCHMARK(BM_TrainingEpoch)->Unit(benchmark::kMillisecond);

void BM_Hypervolume(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<PerfCost> points(static_cast<std::size_t>(state.range(0)));
  for (auto& p : points) p = {unit(rng), unit(rng)};
  for (auto _ : state) benchmark::DoNotOptimize(hypervolume(points));
}
BENCHMARK(BM_Hypervolume)->Arg(101)->Arg(10000);

void BM_SelectNext(benchmark::State& state) {
  const auto world = generate_world(4, static_cast<std::size_t>(state.range(0)), 16, 5);
  const auto params = world.true_parameters();
  const auto store = world.embedding_store();
  const auto ids = world.query_ids();
  const auto bank = ItemBank::build(params, ids, store);
  AdaptiveSession session;
  session.config_id = "new@0";
  session.theta_hat = 0.3;
  for (auto _ : state) benchmark::DoNotOptimize(select_next(bank, session));
}
BENCHMARK(BM_SelectNext)->Arg(500)->Arg(5000);

}  // namespace

BENCHMARK_MAIN();
