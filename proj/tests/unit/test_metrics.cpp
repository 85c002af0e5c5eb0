#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "radar/error.hpp"
#include "radar/metrics.hpp"

using namespace radar;

namespace {

RoutingDecision to(const std::string& id) {
  RoutingDecision d;
  d.config_id = id;
  return d;
}

TradeoffCurve curve_of(std::vector<std::pair<double, double>> perf_raw) {
  TradeoffCurve c;
  double w = 0.0;
  for (auto [p, r] : perf_raw) c.points.push_back({w += 0.1, p, r, r});
  return c;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("realized points") {
  ResponseMatrix truth;
  truth.configs = {"good@0", "half@0", "bad@0"};
  truth.queries = {"q1", "q2"};
  truth.cells = {{"good@0", "q1", true, 0, 0}, {"good@0", "q2", true, 0, 0},
                 {"half@0", "q1", true, 0, 0}, {"half@0", "q2", false, 0, 0},
                 {"bad@0", "q1", false, 0, 0}, {"bad@0", "q2", false, 0, 0}};
  CostTable costs;
  costs.raw_cost = {{"good@0", 0.0}, {"half@0", 0.4}, {"bad@0", 1.0}};
  costs.normalized_cost = costs.raw_cost;
  const std::vector<std::string> qs{"q1", "q2"};

  const auto perfect = realize_curve({{to("good@0"), to("good@0")}}, qs, truth, costs);
  REQUIRE(perfect.points.size() == 1);
  CHECK(perfect.points[0].performance == 1.0);
  CHECK(perfect.points[0].cost == 0.0);

  const auto halfway = realize_curve({{to("half@0"), to("half@0")}}, qs, truth, costs);
  CHECK(halfway.points[0].performance == 0.5);
  CHECK(halfway.points[0].cost == doctest::Approx(0.4));

  // q1 -> half (correct, 0.4), q2 -> bad (wrong, 1.0); then q1 -> bad, q2 -> good.
  const auto mixed = realize_curve({{to("half@0"), to("bad@0")}, {to("bad@0"), to("good@0")}}, qs, truth, costs);
  REQUIRE(mixed.points.size() == 2);
  CHECK(mixed.points[0].performance == 0.5);
  CHECK(mixed.points[0].cost == doctest::Approx(0.7));
  CHECK(mixed.points[1].performance == 0.5);
  CHECK(mixed.points[1].cost == doctest::Approx(0.5));

  try {
    realize_curve({{to("good@0"), to("ghost@0")}}, qs, truth, costs);
    FAIL("expected missing ground truth");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingGroundTruth);
  }
}

TEST_CASE("hypervolume examples") {
  const std::vector<PerfCost> ideal{{1.0, 0.0}};
  CHECK(hypervolume(ideal) == 1.0);
  const std::vector<PerfCost> centre{{0.5, 0.5}};
  CHECK(hypervolume(centre) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(testing::grid_hypervolume(centre, 1000) == doctest::Approx(0.25).epsilon(1e-3));
  const std::vector<PerfCost> two{{0.4, 0.1}, {0.8, 0.6}};
  CHECK(hypervolume(two) == doctest::Approx(0.52).epsilon(1e-12));
  CHECK(testing::grid_hypervolume(two, 1000) == doctest::Approx(0.52).epsilon(1e-3));
}

TEST_CASE("hypervolume ignores dominated points and order") {
  const std::vector<PerfCost> base{{0.4, 0.1}, {0.8, 0.6}};
  const std::vector<PerfCost> more{{0.8, 0.6}, {0.3, 0.3}, {0.4, 0.1}, {0.8, 0.9}};
  CHECK(hypervolume(more) == hypervolume(base));
  CHECK(pareto_front(more).size() == 2);
}

TEST_CASE("hypervolume agrees with grid integration") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    std::vector<PerfCost> pts(1 + i);
    for (auto& p : pts) p = {unit(rng), unit(rng)};
    CHECK(hypervolume(pts) == doctest::Approx(testing::grid_hypervolume(pts, 400)).epsilon(5e-3));
  }
}

TEST_CASE("hypervolume errors") {
  try {
    hypervolume(std::span<const PerfCost>{});
    FAIL("expected empty curve");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyCurve);
  }
  const std::vector<PerfCost> outside{{1.2, 0.0}};
  CHECK_THROWS_AS(hypervolume(outside), Error);
}

TEST_CASE("cost to reach a performance level") {
  // Reference: perf 0.8 at $2.00.
  const auto curve = curve_of({{0.72, 0.2}, {0.70, 0.1}, {0.80, 2.0}, {0.5, 0.01}});
  CHECK(cpt(curve, 90, 0.8, 2.0) == doctest::Approx(0.10).epsilon(1e-12));
  CHECK(cpt(curve, 100, 0.8, 2.0) <= 1.0);
  try {
    cpt(curve, 110, 0.8, 2.0);
    FAIL("expected unreachable threshold");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ThresholdUnreachable);
  }
}

TEST_CASE("reference selection") {
  ResponseMatrix truth;
  truth.configs = {"a@0", "b@0", "c@0"};
  truth.queries = {"q1", "q2"};
  truth.cells = {{"a@0", "q1", true, 0, 0}, {"a@0", "q2", false, 0, 0},
                 {"b@0", "q1", true, 0, 0}, {"b@0", "q2", true, 0, 0},
                 {"c@0", "q1", true, 0, 0}, {"c@0", "q2", true, 0, 0}};
  const auto costs = normalize_costs({{"a@0", 0.1}, {"b@0", 0.3}, {"c@0", 0.2}});
  const auto best = select_reference(truth, costs);
  CHECK(best.config_id == "b@0");
  CHECK(best.performance == 1.0);
  CHECK(best.raw_cost == 0.3);
  CHECK(select_reference(truth, costs, std::string("a@0")).performance == 0.5);
  CHECK_THROWS_AS(select_reference(truth, costs, std::string("zz@0")), Error);
}

TEST_CASE("curve csv") {
  const auto curve = curve_of({{0.5, 0.25}});
  std::ostringstream out;
  write_curve_csv(out, curve);
  CHECK(out.str().rfind("w1,performance,cost\n", 0) == 0);
  CHECK(to_json(curve).size() == 1);
}

}
