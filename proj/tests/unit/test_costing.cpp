#include <doctest.h>

#include "radar/costing.hpp"
#include "radar/error.hpp"

using namespace radar;

TEST_SUITE("costing") {

TEST_CASE("single configuration") {
  ResponseMatrix m;
  m.configs = {"m@0"};
  m.queries = {"q1", "q2"};
  m.cells = {{"m@0", "q1", true, 60, 40}, {"m@0", "q2", false, 250, 50}};
  const auto table = compute_costs(m, {ModelConfiguration::from_id("m@0", 0.00001)});
  CHECK(table.raw("m@0") == doctest::Approx(0.002).epsilon(1e-12));
  CHECK(table.normalized("m@0") == 0.0);
}

TEST_CASE("min-max normalization") {
  const auto two = normalize_costs({{"a", 0.002}, {"b", 0.010}});
  CHECK(two.normalized("a") == 0.0);
  CHECK(two.normalized("b") == 1.0);

  const auto three = normalize_costs({{"a", 0.002}, {"b", 0.006}, {"c", 0.010}});
  CHECK(three.normalized("a") == 0.0);
  CHECK(three.normalized("b") == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(three.normalized("c") == 1.0);

  const auto flat = normalize_costs({{"a", 0.5}, {"b", 0.5}});
  CHECK(flat.normalized("a") == 0.0);
  CHECK(flat.normalized("b") == 0.0);
}

TEST_CASE("normalization is invariant to price scale") {
  const auto base = normalize_costs({{"a", 1.0}, {"b", 3.0}, {"c", 2.0}});
  const auto scaled = normalize_costs({{"a", 1000.0}, {"b", 3000.0}, {"c", 2000.0}});
  for (const auto& id : {"a", "b", "c"}) {
    CHECK(base.normalized(id) == doctest::Approx(scaled.normalized(id)).epsilon(1e-12));
  }
}

TEST_CASE("costing errors") {
  ResponseMatrix m;
  m.configs = {"m@0"};
  m.queries = {"q1"};
  m.cells = {{"m@0", "q1", true, 0, 0}};
  try {
    compute_costs(m, {});
    FAIL("expected empty pool");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyPool);
  }
  try {
    compute_costs(m, {ModelConfiguration::from_id("other@0", 1e-6)});
    FAIL("expected missing token data");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingTokenData);
  }
  const auto table = normalize_costs({{"a", 1.0}});
  CHECK_THROWS_AS(table.normalized("zzz"), Error);
}

TEST_CASE("prices resolve by model name") {
  const auto configs = configurations_from_prices({"m@low", "n@512"}, {{"m", 1e-6}, {"n", 2e-6}});
  REQUIRE(configs.size() == 2);
  CHECK(configs[0].price_per_token == 1e-6);
  CHECK(configs[1].price_per_token == 2e-6);
  CHECK_THROWS_AS(configurations_from_prices({"x@0"}, {{"m", 1e-6}}), Error);
}

TEST_CASE("cost table round-trips through JSON") {
  const auto table = normalize_costs({{"a", 0.25}, {"b", 0.75}}, 7);
  const auto back = cost_table_from_json(to_json(table));
  CHECK(back.raw_cost == table.raw_cost);
  CHECK(back.normalized_cost == table.normalized_cost);
  CHECK(back.pool_version == 7);
}

}
