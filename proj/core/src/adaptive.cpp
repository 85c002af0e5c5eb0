#include "radar/adaptive.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "radar/error.hpp"

namespace radar {

double fisher_information(double theta, double a, double b) noexcept {
  const double p = sigmoid(a * (theta - b));
  return a * a * p * (1.0 - p);
}

namespace {

struct Score {
  double first = 0.0;   // d logL / d theta
  double second = 0.0;  // d^2 logL / d theta^2, never positive
};

Score score_at(double theta, std::span<const ItemResponse> responses) {
  Score s;
  for (const auto& [item, correct] : responses) {
    const double p = sigmoid(item.a * (theta - item.b));
    s.first += item.a * ((correct ? 1.0 : 0.0) - p);
    s.second -= item.a * item.a * p * (1.0 - p);
  }
  return s;
}

}  // namespace

AbilityEstimate estimate_ability(std::span<const ItemResponse> responses) {
  if (responses.empty()) throw Error(ErrorKind::EmptyResponses, "no responses to estimate from");
  bool informative = false;
  for (const auto& r : responses) informative = informative || r.item.a != 0.0;
  if (!informative) return {0.0, false, 0};

  double lo = kThetaMin;
  double hi = kThetaMax;
  if (score_at(hi, responses).first >= 0.0) return {hi, true, 0};
  if (score_at(lo, responses).first <= 0.0) return {lo, true, 0};

  constexpr double tolerance = 1e-6;
  AbilityEstimate est;
  double theta = 0.0;
  for (est.iterations = 1; est.iterations <= 200; ++est.iterations) {
    const auto s = score_at(theta, responses);
    if (s.first == 0.0) break;
    (s.first > 0.0 ? lo : hi) = theta;
    double next = s.second < 0.0 ? theta - s.first / s.second : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double moved = std::abs(next - theta);
    theta = next;
    if (moved < 0.01 * tolerance || hi - lo < 0.01 * tolerance) break;
  }
  est.theta = theta;
  return est;
}

double estimate_ability(const IrtParameters& params, const std::map<std::string, bool>& responses,
                        const EmbeddingStore& embeddings) {
  if (responses.empty()) throw Error(ErrorKind::EmptyResponses, "no responses to estimate from");
  std::vector<ItemResponse> observed;
  observed.reserve(responses.size());
  for (const auto& [query_id, y] : responses) {
    observed.push_back({item_params(params, embeddings.view(query_id)), y});
  }
  return estimate_ability(observed).theta;
}

ItemBank ItemBank::build(const IrtParameters& params, std::span<const std::string> candidates,
                         const EmbeddingStore& embeddings) {
  ItemBank bank;
  bank.ids.assign(candidates.begin(), candidates.end());
  bank.items.reserve(candidates.size());
  for (const auto& id : candidates) bank.items.push_back(item_params(params, embeddings.view(id)));
  return bank;
}

namespace {

double current_estimate(const ItemBank& bank, const AdaptiveSession& session) {
  if (session.responses.empty()) return 0.0;
  std::vector<ItemResponse> observed;
  observed.reserve(session.responses.size());
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < bank.ids.size(); ++i) {
    auto it = session.responses.find(bank.ids[i]);
    if (it == session.responses.end() || !seen.insert(bank.ids[i]).second) continue;
    observed.push_back({bank.items[i], it->second});
  }
  if (observed.size() != session.responses.size()) {
    throw Error(ErrorKind::Validation, "session has responses to queries outside the item bank");
  }
  return estimate_ability(observed).theta;
}

}  // namespace

std::string select_next(const ItemBank& bank, const AdaptiveSession& session) {
  const double theta = current_estimate(bank, session);
  std::unordered_set<std::string_view> taken(session.selected.begin(), session.selected.end());
  std::size_t best = bank.ids.size();
  double best_info = -1.0;
  for (std::size_t i = 0; i < bank.ids.size(); ++i) {
    if (taken.contains(bank.ids[i])) continue;
    const double info = fisher_information(theta, bank.items[i].a, bank.items[i].b);
    if (info > best_info) {
      best_info = info;
      best = i;
    }
  }
  if (best == bank.ids.size()) {
    throw Error(ErrorKind::ExhaustedCandidates,
                fmt::format("no unselected candidates remain for '{}'", session.config_id));
  }
  return bank.ids[best];
}

std::string select_next(const IrtParameters& params, const AdaptiveSession& session,
                        std::span<const std::string> candidates, const EmbeddingStore& embeddings) {
  return select_next(ItemBank::build(params, candidates, embeddings), session);
}

std::size_t default_adaptive_budget(std::size_t pool_size) {
  // ceil(0.12 n) in integer arithmetic.
  return std::max<std::size_t>(1, (12 * pool_size + 99) / 100);
}

SessionResult run_session(const IrtParameters& params, const std::string& config_id,
                          const ResponseOracle& oracle, std::span<const std::string> candidates,
                          std::size_t budget, const EmbeddingStore& embeddings) {
  if (budget == 0) throw Error(ErrorKind::Validation, "adaptive budget must be at least 1");
  if (candidates.empty()) {
    throw Error(ErrorKind::ExhaustedCandidates, "adaptive session needs candidate queries");
  }
  const auto bank = ItemBank::build(params, candidates, embeddings);
  std::unordered_map<std::string_view, std::size_t> position;
  for (std::size_t i = 0; i < bank.ids.size(); ++i) position.emplace(bank.ids[i], i);
  const std::size_t steps = std::min(budget, position.size());

  SessionResult result;
  auto& session = result.session;
  session.config_id = config_id;
  session.budget = budget;

  std::vector<ItemResponse> observed;
  observed.reserve(steps);
  for (std::size_t step = 0; step < steps; ++step) {
    auto query_id = select_next(bank, session);
    const bool y = oracle(config_id, query_id);
    observed.push_back({bank.items[position.at(query_id)], y});
    session.selected.push_back(query_id);
    session.responses[query_id] = y;
    const auto estimate = estimate_ability(observed);
    session.theta_hat = estimate.theta;
    result.at_bound = estimate.at_bound;
    result.transcript.push_back({step + 1, std::move(query_id), y, estimate.theta});
  }

  result.params = params;
  result.params.theta[config_id] = session.theta_hat;
  result.params.version = params.version + 1;
  return result;
}

}  // namespace radar
