#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radar/adaptive.hpp"
#include "radar/costing.hpp"
#include "radar/embed.hpp"
#include "radar/irt.hpp"
#include "radar/matrix_io.hpp"
#include "radar/scalarize.hpp"
#include "radar/types.hpp"

namespace radar {

struct SyntheticConfig {
  std::string id;
  std::string model_name;
  std::int64_t budget = 0;
  double price_per_token = 0.0;
  double mean_reasoning_tokens = 0.0;
  double mean_completion_tokens = 0.0;
};

/// Known-truth 2PL world. Embeddings carry a constant final coordinate so
/// that discriminations can centre on 1 while the remaining coordinates stay
/// standard normal.
struct SyntheticWorld {
  std::size_t dim = 0;
  std::vector<double> true_w_a;
  std::vector<double> true_w_b;
  std::vector<SyntheticConfig> configs;
  std::map<std::string, double> true_theta;
  std::vector<Query> queries;
  std::uint64_t seed = 0;

  std::vector<std::string> config_ids() const;
  std::vector<std::string> query_ids() const;
  PriceList prices() const;
  IrtParameters true_parameters() const;
  EmbeddingStore embedding_store() const;
};

/// Deterministic per seed. Discriminations have mean ~1 (sd 0.4),
/// difficulties sd ~1, abilities i.i.d. standard normal. Configurations are
/// models of increasing price crossed with a ladder of reasoning budgets;
/// mean token counts grow with the budget.
SyntheticWorld generate_world(std::size_t n_configs, std::size_t k_queries, std::size_t dim,
                              std::uint64_t seed);

/// Dense matrix with Bernoulli(sigma(a (theta - b))) outcomes and Poisson
/// token counts. The stream seed defaults to one derived from world.seed.
ResponseMatrix sample_matrix(const SyntheticWorld& world);
ResponseMatrix sample_matrix(const SyntheticWorld& world, std::uint64_t stream_seed);

/// Reference implementation of routing by exhaustive enumeration, written
/// independently of route(). Test use only.
std::string oracle_route(std::span<const PoolEntry> pool, const TradeoffProfile& profile);

/// Per query, the cheapest configuration among those with the best
/// ground-truth correctness (ties: smaller id). Keys are query ids.
std::map<std::string, std::string> oracle_router_baseline(const ResponseMatrix& ground_truth,
                                                          const CostTable& costs);

/// Simulated respondent with ability `theta` answering items under `truth`.
/// Each answer is a deterministic function of (seed, query id), independent
/// of the order in which queries are asked.
ResponseOracle simulated_oracle(IrtParameters truth, const EmbeddingStore& embeddings,
                                double theta, std::uint64_t seed);

nlohmann::json to_json(const SyntheticWorld& world);
SyntheticWorld world_from_json(const nlohmann::json& doc);

}  // namespace radar
