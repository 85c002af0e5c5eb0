#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace radar {

using Embedding = std::vector<double>;

/// Named reasoning tiers share the integer budget key space.
inline constexpr std::int64_t kBudgetLow = -1;
inline constexpr std::int64_t kBudgetMedium = -2;
inline constexpr std::int64_t kBudgetHigh = -3;

struct ConfigKey {
  std::string model_name;
  std::int64_t budget = 0;

  friend bool operator==(const ConfigKey&, const ConfigKey&) = default;
};

/// Renders "model@budget"; tier sentinels render as low/medium/high.
std::string canonical_config_id(std::string_view model_name, std::int64_t budget);

/// Inverse of canonical_config_id. Accepts tier names or integers after the
/// last '@'. Throws Error(Validation) on malformed ids.
ConfigKey parse_config_id(std::string_view id);

std::int64_t parse_budget(std::string_view text);
std::string budget_to_string(std::int64_t budget);

struct Query {
  std::string id;
  std::string text;
  Embedding embedding;
};

struct ModelConfiguration {
  std::string id;
  std::string model_name;
  std::int64_t budget = 0;
  double price_per_token = 0.0;  // USD per output token
  std::optional<double> ability;
  bool calibrated = false;

  static ModelConfiguration from_id(std::string_view id, double price_per_token);
};

struct ResponseCell {
  std::string config_id;
  std::string query_id;
  bool correct = false;
  std::uint64_t reasoning_tokens = 0;
  std::uint64_t completion_tokens = 0;

  std::uint64_t total_tokens() const { return reasoning_tokens + completion_tokens; }
  friend bool operator==(const ResponseCell&, const ResponseCell&) = default;
};

/// Binary outcomes of configurations (rows) on queries (columns). Cells may
/// be sparse: only observed pairs are stored.
struct ResponseMatrix {
  std::size_t dim = 0;
  std::vector<std::string> configs;
  std::vector<std::string> queries;
  std::vector<ResponseCell> cells;

  friend bool operator==(const ResponseMatrix&, const ResponseMatrix&) = default;
};

/// A cell resolved to row/column positions of its matrix.
struct IndexedCell {
  std::size_t config = 0;
  std::size_t query = 0;
  bool correct = false;
  std::uint64_t tokens = 0;
};

/// Resolves every cell to (row, column). Throws Error(Validation) on
/// dangling references.
std::vector<IndexedCell> index_cells(const ResponseMatrix& matrix);

enum class Scalarization { Linear, Chebyshev };

std::string_view to_string(Scalarization s) noexcept;
Scalarization parse_scalarization(std::string_view text);

struct TradeoffProfile {
  double w1 = 0.5;
  Scalarization scalarization = Scalarization::Linear;

  /// Throws Error(Validation) unless 0 <= w1 <= 1.
  void validate() const;
};

struct RoutingDecision {
  std::string config_id;
  double predicted_performance = 0.0;
  double predicted_cost = 0.0;
  double scalar_score = 0.0;
  TradeoffProfile profile;
};

enum class ViolationKind {
  DuplicateConfig,
  DuplicateQuery,
  DanglingConfig,
  DanglingQuery,
  DuplicateCell,
  EmptyRow,
  EmptyColumn,
};

struct Violation {
  ViolationKind kind;
  std::string message;
  std::string location;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  /// Human-readable multi-line summary.
  std::string summary() const;
};

ValidationReport validate_matrix(const ResponseMatrix& matrix);

}  // namespace radar
