#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "radar/embed.hpp"
#include "radar/irt.hpp"

namespace radar {

inline constexpr double kThetaMin = -8.0;
inline constexpr double kThetaMax = 8.0;

/// a^2 sigma(a (theta - b)) (1 - sigma(a (theta - b))).
double fisher_information(double theta, double a, double b) noexcept;

struct AbilityEstimate {
  double theta = 0.0;
  bool at_bound = false;  // likelihood still increasing at an interval end
  int iterations = 0;
};

struct ItemResponse {
  ItemParams item;
  bool correct = false;
};

/// Maximum-likelihood ability over [kThetaMin, kThetaMax] for responses to
/// items with known (a, b). The log-likelihood is concave in theta, so the
/// maximizer is the root of the score, found by Newton steps safeguarded by
/// bisection to 1e-6. Monotone response patterns return the interval bound.
/// Throws Error(EmptyResponses).
AbilityEstimate estimate_ability(std::span<const ItemResponse> responses);

/// Same estimate with item parameters derived from the fitted model.
/// Throws Error(LookupMiss) for queries without an embedding.
double estimate_ability(const IrtParameters& params, const std::map<std::string, bool>& responses,
                        const EmbeddingStore& embeddings);

/// Candidate queries with their frozen (a, b).
struct ItemBank {
  std::vector<std::string> ids;
  std::vector<ItemParams> items;

  static ItemBank build(const IrtParameters& params, std::span<const std::string> candidates,
                        const EmbeddingStore& embeddings);
};

struct AdaptiveSession {
  std::string config_id;
  std::vector<std::string> selected;
  std::map<std::string, bool> responses;
  double theta_hat = 0.0;
  std::size_t budget = 0;
};

/// The unselected candidate with the largest Fisher information at the
/// current ability estimate (0 before any response). Ties go to the earliest
/// candidate. Throws Error(ExhaustedCandidates).
std::string select_next(const ItemBank& bank, const AdaptiveSession& session);
std::string select_next(const IrtParameters& params, const AdaptiveSession& session,
                        std::span<const std::string> candidates, const EmbeddingStore& embeddings);

/// Supplies the observed correctness of a configuration on a query.
using ResponseOracle = std::function<bool(const std::string& config_id, const std::string& query_id)>;

struct TranscriptStep {
  std::size_t step = 0;
  std::string query_id;
  bool correct = false;
  double theta_hat = 0.0;
};

struct SessionResult {
  AdaptiveSession session;
  std::vector<TranscriptStep> transcript;
  bool at_bound = false;
  IrtParameters params;  // input snapshot plus the new ability, version + 1
};

/// ceil(0.12 * pool_size), at least 1.
std::size_t default_adaptive_budget(std::size_t pool_size);

/// Alternates selection, observation and re-estimation for up to `budget`
/// steps (fewer if the candidates run out), then installs the estimate.
SessionResult run_session(const IrtParameters& params, const std::string& config_id,
                          const ResponseOracle& oracle, std::span<const std::string> candidates,
                          std::size_t budget, const EmbeddingStore& embeddings);

}  // namespace radar
