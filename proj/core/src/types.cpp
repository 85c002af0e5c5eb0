#include "radar/types.hpp"

#include <charconv>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "radar/error.hpp"

namespace radar {

std::string budget_to_string(std::int64_t budget) {
  switch (budget) {
    case kBudgetLow: return "low";
    case kBudgetMedium: return "medium";
    case kBudgetHigh: return "high";
    default: return std::to_string(budget);
  }
}

std::int64_t parse_budget(std::string_view text) {
  if (text == "low") return kBudgetLow;
  if (text == "medium") return kBudgetMedium;
  if (text == "high") return kBudgetHigh;
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorKind::Validation, fmt::format("invalid reasoning budget '{}'", text));
  }
  if (value < 0 && value != kBudgetLow && value != kBudgetMedium && value != kBudgetHigh) {
    throw Error(ErrorKind::Validation, fmt::format("negative reasoning budget {}", value));
  }
  return value;
}

std::string canonical_config_id(std::string_view model_name, std::int64_t budget) {
  return fmt::format("{}@{}", model_name, budget_to_string(budget));
}

ConfigKey parse_config_id(std::string_view id) {
  auto at = id.rfind('@');
  if (at == std::string_view::npos || at == 0 || at + 1 == id.size()) {
    throw Error(ErrorKind::Validation,
                fmt::format("configuration id '{}' is not of the form model@budget", id));
  }
  return ConfigKey{std::string(id.substr(0, at)), parse_budget(id.substr(at + 1))};
}

ModelConfiguration ModelConfiguration::from_id(std::string_view id, double price_per_token) {
  if (!(price_per_token >= 0.0) || !std::isfinite(price_per_token)) {
    throw Error(ErrorKind::Validation,
                fmt::format("price for '{}' must be a finite nonnegative number", id));
  }
  auto key = parse_config_id(id);
  ModelConfiguration config;
  config.id = canonical_config_id(key.model_name, key.budget);
  config.model_name = std::move(key.model_name);
  config.budget = key.budget;
  config.price_per_token = price_per_token;
  return config;
}

std::vector<IndexedCell> index_cells(const ResponseMatrix& matrix) {
  std::unordered_map<std::string_view, std::size_t> config_index;
  std::unordered_map<std::string_view, std::size_t> query_index;
  for (std::size_t i = 0; i < matrix.configs.size(); ++i) config_index.emplace(matrix.configs[i], i);
  for (std::size_t j = 0; j < matrix.queries.size(); ++j) query_index.emplace(matrix.queries[j], j);

  std::vector<IndexedCell> out;
  out.reserve(matrix.cells.size());
  for (const auto& cell : matrix.cells) {
    auto c = config_index.find(cell.config_id);
    if (c == config_index.end()) {
      throw Error(ErrorKind::Validation,
                  fmt::format("cell references unknown configuration '{}'", cell.config_id));
    }
    auto q = query_index.find(cell.query_id);
    if (q == query_index.end()) {
      throw Error(ErrorKind::Validation,
                  fmt::format("cell references unknown query '{}'", cell.query_id));
    }
    out.push_back({c->second, q->second, cell.correct, cell.total_tokens()});
  }
  return out;
}

std::string_view to_string(Scalarization s) noexcept {
  return s == Scalarization::Linear ? "linear" : "chebyshev";
}

Scalarization parse_scalarization(std::string_view text) {
  if (text == "linear") return Scalarization::Linear;
  if (text == "chebyshev") return Scalarization::Chebyshev;
  throw Error(ErrorKind::Validation,
              fmt::format("unknown scalarization '{}' (expected linear or chebyshev)", text));
}

void TradeoffProfile::validate() const {
  if (!(w1 >= 0.0 && w1 <= 1.0)) {
    throw Error(ErrorKind::Validation, fmt::format("w1 must lie in [0, 1], got {}", w1));
  }
}

std::string ValidationReport::summary() const {
  if (ok()) return "ok";
  std::string out;
  for (const auto& v : violations) {
    out += fmt::format("{} ({})\n", v.message, v.location);
  }
  return out;
}

ValidationReport validate_matrix(const ResponseMatrix& matrix) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, std::string message, std::string location) {
    report.violations.push_back({kind, std::move(message), std::move(location)});
  };

  std::unordered_map<std::string_view, std::size_t> config_index;
  std::unordered_map<std::string_view, std::size_t> query_index;
  for (std::size_t i = 0; i < matrix.configs.size(); ++i) {
    if (!config_index.emplace(matrix.configs[i], i).second) {
      add(ViolationKind::DuplicateConfig, "duplicate configuration id",
          fmt::format("configs[{}] = {}", i, matrix.configs[i]));
    }
  }
  for (std::size_t j = 0; j < matrix.queries.size(); ++j) {
    if (!query_index.emplace(matrix.queries[j], j).second) {
      add(ViolationKind::DuplicateQuery, "duplicate query id",
          fmt::format("queries[{}] = {}", j, matrix.queries[j]));
    }
  }

  std::vector<std::size_t> row_counts(matrix.configs.size(), 0);
  std::vector<std::size_t> column_counts(matrix.queries.size(), 0);
  std::unordered_set<std::uint64_t> seen;
  const std::uint64_t stride = matrix.queries.size() + 1;

  for (std::size_t n = 0; n < matrix.cells.size(); ++n) {
    const auto& cell = matrix.cells[n];
    auto c = config_index.find(cell.config_id);
    auto q = query_index.find(cell.query_id);
    bool dangling = false;
    if (c == config_index.end()) {
      add(ViolationKind::DanglingConfig, "dangling config reference",
          fmt::format("cells[{}].config_id = {}", n, cell.config_id));
      dangling = true;
    }
    if (q == query_index.end()) {
      add(ViolationKind::DanglingQuery, "dangling query reference",
          fmt::format("cells[{}].query_id = {}", n, cell.query_id));
      dangling = true;
    }
    if (dangling) continue;
    if (!seen.insert(c->second * stride + q->second).second) {
      add(ViolationKind::DuplicateCell, "duplicate cell",
          fmt::format("cells[{}] = ({}, {})", n, cell.config_id, cell.query_id));
      continue;
    }
    ++row_counts[c->second];
    ++column_counts[q->second];
  }

  for (std::size_t i = 0; i < row_counts.size(); ++i) {
    if (row_counts[i] == 0) {
      add(ViolationKind::EmptyRow, "configuration has no observed cells",
          fmt::format("configs[{}] = {}", i, matrix.configs[i]));
    }
  }
  for (std::size_t j = 0; j < column_counts.size(); ++j) {
    if (column_counts[j] == 0) {
      add(ViolationKind::EmptyColumn, "query has no observed cells",
          fmt::format("queries[{}] = {}", j, matrix.queries[j]));
    }
  }
  return report;
}

}  // namespace radar
