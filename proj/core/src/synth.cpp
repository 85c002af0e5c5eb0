#include "radar/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "radar/error.hpp"

namespace radar {

namespace {

constexpr std::int64_t kBudgetLadder[] = {0, 512, 1024, 2048, 4096};
constexpr std::size_t kBudgetsPerModel = std::size(kBudgetLadder);
constexpr std::uint64_t kMatrixStream = 0x5851f42d4c957f2dULL;

void scale_to_norm(std::span<double> v, double norm) {
  double current = 0.0;
  for (double x : v) current += x * x;
  current = std::sqrt(current);
  if (current == 0.0) return;
  for (double& x : v) x *= norm / current;
}

}  // namespace

std::vector<std::string> SyntheticWorld::config_ids() const {
  std::vector<std::string> ids;
  for (const auto& c : configs) ids.push_back(c.id);
  return ids;
}

std::vector<std::string> SyntheticWorld::query_ids() const {
  std::vector<std::string> ids;
  for (const auto& q : queries) ids.push_back(q.id);
  return ids;
}

PriceList SyntheticWorld::prices() const {
  PriceList prices;
  for (const auto& c : configs) prices[c.model_name] = c.price_per_token;
  return prices;
}

IrtParameters SyntheticWorld::true_parameters() const {
  IrtParameters params;
  params.dim = dim;
  params.w_a = true_w_a;
  params.w_b = true_w_b;
  params.theta = true_theta;
  return params;
}

EmbeddingStore SyntheticWorld::embedding_store() const {
  return EmbeddingStore::from_queries(queries, dim);
}

SyntheticWorld generate_world(std::size_t n_configs, std::size_t k_queries, std::size_t dim,
                              std::uint64_t seed) {
  if (n_configs == 0 || k_queries == 0 || dim == 0) {
    throw Error(ErrorKind::Validation, "synthetic world sizes must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  SyntheticWorld world;
  world.dim = dim;
  world.seed = seed;
  const std::size_t free = dim - 1;  // the last coordinate is the constant 1

  world.true_w_a.assign(dim, 0.0);
  world.true_w_b.assign(dim, 0.0);
  for (std::size_t i = 0; i < free; ++i) world.true_w_a[i] = normal(rng);
  for (std::size_t i = 0; i < free; ++i) world.true_w_b[i] = normal(rng);
  scale_to_norm(std::span(world.true_w_a).first(free), 0.4);
  scale_to_norm(std::span(world.true_w_b).first(free), 1.0);
  world.true_w_a[dim - 1] = 1.0;
  world.true_w_b[dim - 1] = 0.0;

  for (std::size_t i = 0; i < n_configs; ++i) {
    const std::size_t model = i / kBudgetsPerModel;
    SyntheticConfig config;
    config.model_name = fmt::format("synth-m{}", model);
    config.budget = kBudgetLadder[i % kBudgetsPerModel];
    config.id = canonical_config_id(config.model_name, config.budget);
    config.price_per_token = 2e-7 * static_cast<double>((model + 1) * (model + 1));
    config.mean_reasoning_tokens = 40.0 + 0.75 * static_cast<double>(config.budget);
    config.mean_completion_tokens = 120.0 + 10.0 * static_cast<double>(model);
    world.true_theta[config.id] = normal(rng);
    world.configs.push_back(std::move(config));
  }

  world.queries.reserve(k_queries);
  for (std::size_t j = 0; j < k_queries; ++j) {
    Query query;
    query.id = fmt::format("q{:06}", j);
    query.embedding.resize(dim);
    for (std::size_t i = 0; i < free; ++i) query.embedding[i] = normal(rng);
    query.embedding[dim - 1] = 1.0;
    world.queries.push_back(std::move(query));
  }
  return world;
}

ResponseMatrix sample_matrix(const SyntheticWorld& world) {
  return sample_matrix(world, world.seed ^ kMatrixStream);
}

ResponseMatrix sample_matrix(const SyntheticWorld& world, std::uint64_t stream_seed) {
  std::mt19937_64 rng(stream_seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const auto truth = world.true_parameters();

  std::vector<ItemParams> items;
  items.reserve(world.queries.size());
  for (const auto& q : world.queries) items.push_back(item_params(truth, q.embedding));

  ResponseMatrix matrix;
  matrix.dim = world.dim;
  matrix.configs = world.config_ids();
  matrix.queries = world.query_ids();
  matrix.cells.reserve(world.configs.size() * world.queries.size());
  for (const auto& config : world.configs) {
    const double theta = world.true_theta.at(config.id);
    std::poisson_distribution<std::uint64_t> reasoning(std::max(config.mean_reasoning_tokens, 1e-9));
    std::poisson_distribution<std::uint64_t> completion(std::max(config.mean_completion_tokens, 1e-9));
    for (std::size_t j = 0; j < world.queries.size(); ++j) {
      ResponseCell cell;
      cell.config_id = config.id;
      cell.query_id = world.queries[j].id;
      cell.correct = uniform(rng) < sigmoid(items[j].a * (theta - items[j].b));
      cell.reasoning_tokens = reasoning(rng);
      cell.completion_tokens = completion(rng);
      matrix.cells.push_back(std::move(cell));
    }
  }
  return matrix;
}

std::string oracle_route(std::span<const PoolEntry> pool, const TradeoffProfile& profile) {
  if (pool.empty()) throw Error(ErrorKind::EmptyPool, "oracle_route over an empty pool");
  const double w1 = profile.w1;
  const bool maximize = profile.scalarization == Scalarization::Linear;

  std::vector<double> scores;
  scores.reserve(pool.size());
  for (const auto& entry : pool) {
    double s = 0.0;
    if (maximize) {
      s = w1 * entry.p - (1.0 - w1) * entry.c;
    } else {
      const double shortfall = w1 * std::fabs(1.0 - entry.p);
      const double spend = (1.0 - w1) * entry.c;
      s = shortfall < spend ? spend : shortfall;
    }
    scores.push_back(s);
  }
  const double target = maximize ? *std::max_element(scores.begin(), scores.end())
                                 : *std::min_element(scores.begin(), scores.end());

  std::vector<const PoolEntry*> tied;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (scores[i] == target) tied.push_back(&pool[i]);
  }
  const auto* winner = *std::min_element(tied.begin(), tied.end(), [](auto* x, auto* y) {
    return std::tie(x->c, y->p, x->config_id) < std::tie(y->c, x->p, y->config_id);
  });
  return winner->config_id;
}

std::map<std::string, std::string> oracle_router_baseline(const ResponseMatrix& ground_truth,
                                                          const CostTable& costs) {
  struct Best {
    bool correct = false;
    double cost = std::numeric_limits<double>::infinity();
    std::string config_id;
  };
  std::map<std::string, Best> best;
  for (const auto& cell : ground_truth.cells) {
    const double cost = costs.raw(cell.config_id);
    auto [it, inserted] = best.try_emplace(cell.query_id);
    auto& incumbent = it->second;
    const bool replace =
        inserted || (cell.correct && !incumbent.correct) ||
        (cell.correct == incumbent.correct &&
         (cost < incumbent.cost || (cost == incumbent.cost && cell.config_id < incumbent.config_id)));
    if (replace) incumbent = {cell.correct, cost, cell.config_id};
  }
  std::map<std::string, std::string> out;
  for (auto& [query, b] : best) out.emplace(query, std::move(b.config_id));
  return out;
}

ResponseOracle simulated_oracle(IrtParameters truth, const EmbeddingStore& embeddings,
                                double theta, std::uint64_t seed) {
  return [truth = std::move(truth), &embeddings, theta, seed](const std::string&,
                                                             const std::string& query_id) {
    const auto item = item_params(truth, embeddings.view(query_id));
    const double u = static_cast<double>(seeded_hash64(query_id, seed) >> 11) * 0x1.0p-53;
    return u < sigmoid(item.a * (theta - item.b));
  };
}

nlohmann::json to_json(const SyntheticWorld& world) {
  auto configs = nlohmann::json::array();
  for (const auto& c : world.configs) {
    configs.push_back({{"id", c.id},
                       {"model", c.model_name},
                       {"budget", c.budget},
                       {"price_per_token", c.price_per_token},
                       {"mean_reasoning_tokens", c.mean_reasoning_tokens},
                       {"mean_completion_tokens", c.mean_completion_tokens},
                       {"true_theta", world.true_theta.at(c.id)}});
  }
  return {{"seed", world.seed},
          {"dim", world.dim},
          {"n_queries", world.queries.size()},
          {"true_w_a", world.true_w_a},
          {"true_w_b", world.true_w_b},
          {"configs", std::move(configs)}};
}

SyntheticWorld world_from_json(const nlohmann::json& doc) {
  SyntheticWorld world;
  try {
    world.seed = doc.at("seed").get<std::uint64_t>();
    world.dim = doc.at("dim").get<std::size_t>();
    world.true_w_a = doc.at("true_w_a").get<std::vector<double>>();
    world.true_w_b = doc.at("true_w_b").get<std::vector<double>>();
    for (const auto& c : doc.at("configs")) {
      SyntheticConfig config;
      config.id = c.at("id").get<std::string>();
      config.model_name = c.at("model").get<std::string>();
      config.budget = c.at("budget").get<std::int64_t>();
      config.price_per_token = c.at("price_per_token").get<double>();
      config.mean_reasoning_tokens = c.at("mean_reasoning_tokens").get<double>();
      config.mean_completion_tokens = c.at("mean_completion_tokens").get<double>();
      world.true_theta[config.id] = c.at("true_theta").get<double>();
      world.configs.push_back(std::move(config));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, fmt::format("world manifest: {}", e.what()));
  }
  if (world.true_w_a.size() != world.dim || world.true_w_b.size() != world.dim) {
    throw Error(ErrorKind::DimensionMismatch, "world manifest vectors do not match its dimension");
  }
  return world;
}

}  // namespace radar
