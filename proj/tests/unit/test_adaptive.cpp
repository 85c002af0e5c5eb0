#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "radar/adaptive.hpp"
#include "radar/error.hpp"

using namespace radar;

namespace {

// Embedding (b, a) with w_a = (0, 1) and w_b = (1, 0) gives the item (a, b).
struct Bank1d {
  IrtParameters params;
  EmbeddingStore store{2};
  std::vector<std::string> ids;

  void add(const std::string& id, double a, double b) {
    ids.push_back(id);
    store.insert(id, std::vector<double>{b, a});
  }
};

Bank1d make_bank() {
  Bank1d bank;
  bank.params.dim = 2;
  bank.params.w_a = {0.0, 1.0};
  bank.params.w_b = {1.0, 0.0};
  bank.params.theta = {{"base@0", 0.0}};
  return bank;
}

}  // namespace

TEST_SUITE("adaptive") {

TEST_CASE("fisher information") {
  CHECK(fisher_information(0.7, 1.0, 0.7) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(fisher_information(-1.0, 2.0, -1.0) == doctest::Approx(1.0).epsilon(1e-15));
  for (double t : {-3.0, 0.0, 5.0}) CHECK(fisher_information(t, 0.0, 1.0) == 0.0);
  // (1, 3) at theta 0: sigma(-3) (1 - sigma(-3)).
  const double p = 1.0 / (1.0 + std::exp(3.0));
  CHECK(fisher_information(0.0, 1.0, 3.0) == doctest::Approx(p * (1.0 - p)));
  CHECK(fisher_information(0.0, 1.0, 3.0) == doctest::Approx(0.045176659730912));
}

TEST_CASE("ability estimate examples") {
  const std::vector<ItemResponse> one{{{1.0, 0.0}, true}};
  const auto up = estimate_ability(one);
  CHECK(up.theta == kThetaMax);
  CHECK(up.at_bound);

  const std::vector<ItemResponse> down{{{1.0, 0.0}, false}};
  CHECK(estimate_ability(down).theta == kThetaMin);

  const std::vector<ItemResponse> sym{{{1.0, -1.0}, true}, {{1.0, 1.0}, false}};
  const auto mid = estimate_ability(sym);
  CHECK(std::abs(mid.theta) <= 1e-6);
  CHECK_FALSE(mid.at_bound);

  try {
    estimate_ability(std::span<const ItemResponse>{});
    FAIL("expected empty responses");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyResponses);
  }
}

TEST_CASE("ability estimate from 200 simulated responses") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> b_dist(0.0, 1.0);
  std::uniform_real_distribution<double> a_dist(0.5, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double theta = 1.2;
  std::vector<ItemResponse> responses;
  for (int i = 0; i < 200; ++i) {
    const ItemParams item{a_dist(rng), b_dist(rng)};
    const double p = 1.0 / (1.0 + std::exp(-item.a * (theta - item.b)));
    responses.push_back({item, unit(rng) < p});
  }
  CHECK(std::abs(estimate_ability(responses).theta - theta) <= 0.25);
}

TEST_CASE("estimate is the root of the score") {
  const std::vector<ItemResponse> r{{{1.3, 0.2}, true}, {{0.7, -0.4}, false}, {{2.0, 1.0}, true},
                                    {{1.0, 1.5}, false}};
  const double t = estimate_ability(r).theta;
  double score = 0.0;
  for (const auto& x : r) {
    const double p = 1.0 / (1.0 + std::exp(-x.item.a * (t - x.item.b)));
    score += x.item.a * ((x.correct ? 1.0 : 0.0) - p);
  }
  CHECK(std::abs(score) < 1e-6);
}

TEST_CASE("select next examples") {
  auto bank = make_bank();
  bank.add("easy", 1.0, 0.0);
  bank.add("hard", 1.0, 3.0);
  AdaptiveSession session;
  session.config_id = "new@0";
  CHECK(select_next(bank.params, session, bank.ids, bank.store) == "easy");

  auto pair = make_bank();
  pair.add("weak", 1.0, 0.5);
  pair.add("strong", 2.0, 0.5);
  session.theta_hat = 0.5;
  CHECK(select_next(pair.params, session, pair.ids, pair.store) == "strong");

  session.selected = {"weak"};
  CHECK(select_next(pair.params, session, pair.ids, pair.store) == "strong");
  session.selected = {"weak", "strong"};
  try {
    select_next(pair.params, session, pair.ids, pair.store);
    FAIL("expected exhausted candidates");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ExhaustedCandidates);
  }
  session.selected = {"strong"};
  CHECK(select_next(pair.params, session, pair.ids, pair.store) == "weak");
}

TEST_CASE("default budget") {
  CHECK(default_adaptive_budget(500) == 60);
  CHECK(default_adaptive_budget(1) == 1);
  CHECK(default_adaptive_budget(0) == 1);
}

TEST_CASE("session records a transcript and installs the ability") {
  auto bank = make_bank();
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 60; ++i) bank.add("q" + std::to_string(i), 1.0 + 0.01 * i, normal(rng));
  const double truth = 0.8;
  ResponseOracle oracle = [&](const std::string&, const std::string& q) {
    const auto e = bank.store.view(q);
    return truth > e[0];  // deterministic respondent: right iff theta > b
  };
  const auto result = run_session(bank.params, "new@0", oracle, bank.ids, 20, bank.store);
  CHECK(result.transcript.size() == 20);
  CHECK(result.session.selected.size() == 20);
  CHECK(result.params.version == bank.params.version + 1);
  CHECK(result.params.ability("new@0") == result.session.theta_hat);
  CHECK(result.params.ability("base@0") == 0.0);
  for (std::size_t i = 0; i < result.transcript.size(); ++i) {
    CHECK(result.transcript[i].step == i + 1);
    CHECK(result.transcript[i].query_id == result.session.selected[i]);
  }
  // Distinct queries only.
  std::set<std::string> seen(result.session.selected.begin(), result.session.selected.end());
  CHECK(seen.size() == 20);
}

}
