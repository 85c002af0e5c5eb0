#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "radar/synth.hpp"

using namespace radar;

TEST_SUITE("synth") {

TEST_CASE("world shape") {
  const auto world = generate_world(12, 50, 6, 1);
  CHECK(world.configs.size() == 12);
  CHECK(world.queries.size() == 50);
  CHECK(world.true_w_a.size() == 6);
  for (const auto& q : world.queries) {
    REQUIRE(q.embedding.size() == 6);
    CHECK(q.embedding.back() == 1.0);
  }
  for (const auto& c : world.configs) CHECK(c.price_per_token > 0.0);
  const auto prices = world.prices();
  CHECK_FALSE(prices.empty());
}

TEST_CASE("theta equal to difficulty gives coin flips") {
  // a = 1 and b = 0.3 on every query; every ability is 0.3.
  auto world = generate_world(10, 10000, 4, 2);
  std::fill(world.true_w_a.begin(), world.true_w_a.end(), 0.0);
  std::fill(world.true_w_b.begin(), world.true_w_b.end(), 0.0);
  world.true_w_a.back() = 1.0;
  world.true_w_b.back() = 0.3;
  for (auto& [id, theta] : world.true_theta) theta = 0.3;
  const auto m = sample_matrix(world);
  REQUIRE(m.cells.size() == 100000);
  double correct = 0.0;
  for (const auto& c : m.cells) correct += c.correct;
  CHECK(std::abs(correct / 1e5 - 0.5) <= 0.01);
}

TEST_CASE("a saturated ability answers nearly everything") {
  auto world = generate_world(4, 20000, 8, 3);
  const auto strong = world.configs.front().id;
  world.true_theta[strong] = 8.0;
  // Unit discrimination; difficulties stay standard normal.
  std::fill(world.true_w_a.begin(), world.true_w_a.end(), 0.0);
  world.true_w_a.back() = 1.0;
  const auto m = sample_matrix(world);
  double correct = 0.0, total = 0.0;
  for (const auto& c : m.cells) {
    if (c.config_id != strong) continue;
    correct += c.correct;
    total += 1;
  }
  CHECK(correct / total >= 0.999);
}

TEST_CASE("sampling is deterministic per seed") {
  const auto world = generate_world(5, 40, 4, 9);
  CHECK(sample_matrix(world) == sample_matrix(world));
  CHECK_FALSE(sample_matrix(world, 1) == sample_matrix(world, 2));
  const auto again = generate_world(5, 40, 4, 9);
  CHECK(to_json(again) == to_json(world));
}

TEST_CASE("manifest round-trip keeps the truth") {
  const auto world = generate_world(6, 30, 5, 4);
  const auto back = world_from_json(to_json(world));
  CHECK(back.true_w_a == world.true_w_a);
  CHECK(back.true_w_b == world.true_w_b);
  CHECK(back.true_theta == world.true_theta);
  CHECK(back.config_ids() == world.config_ids());
}

TEST_CASE("cheapest correct baseline") {
  ResponseMatrix truth;
  truth.configs = {"cheap@0", "mid@0", "dear@0"};
  truth.queries = {"q1", "q2"};
  truth.cells = {{"cheap@0", "q1", false, 0, 0}, {"mid@0", "q1", true, 0, 0}, {"dear@0", "q1", true, 0, 0},
                 {"cheap@0", "q2", false, 0, 0}, {"mid@0", "q2", false, 0, 0}, {"dear@0", "q2", false, 0, 0}};
  const auto costs = normalize_costs({{"cheap@0", 0.1}, {"mid@0", 0.2}, {"dear@0", 0.3}});
  const auto pick = oracle_router_baseline(truth, costs);
  CHECK(pick.at("q1") == "mid@0");
  CHECK(pick.at("q2") == "cheap@0");
}

TEST_CASE("simulated respondent is order independent") {
  const auto world = generate_world(3, 20, 4, 5);
  const auto store = world.embedding_store();
  const auto oracle = simulated_oracle(world.true_parameters(), store, 0.5, 42);
  std::vector<bool> first, second;
  for (const auto& q : world.query_ids()) first.push_back(oracle("new@0", q));
  for (auto it = world.queries.rbegin(); it != world.queries.rend(); ++it) second.push_back(oracle("new@0", it->id));
  std::reverse(second.begin(), second.end());
  CHECK(first == second);
}

}
