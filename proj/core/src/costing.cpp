#include "radar/costing.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "radar/error.hpp"

namespace radar {

namespace {

double lookup(const std::map<std::string, double>& table, std::string_view id) {
  auto it = table.find(std::string(id));
  if (it == table.end()) {
    throw Error(ErrorKind::UnknownConfiguration,
                fmt::format("configuration '{}' has no cost entry", id));
  }
  return it->second;
}

}  // namespace

double CostTable::raw(std::string_view config_id) const { return lookup(raw_cost, config_id); }

double CostTable::normalized(std::string_view config_id) const {
  return lookup(normalized_cost, config_id);
}

CostTable normalize_costs(std::map<std::string, double> raw_cost, std::uint64_t pool_version) {
  if (raw_cost.empty()) throw Error(ErrorKind::EmptyPool, "cannot normalize an empty pool");
  auto [lo, hi] = std::minmax_element(raw_cost.begin(), raw_cost.end(),
                                      [](const auto& x, const auto& y) { return x.second < y.second; });
  const double min_cost = lo->second;
  const double range = hi->second - min_cost;

  CostTable table;
  table.pool_version = pool_version;
  for (const auto& [id, cost] : raw_cost) {
    if (!(cost >= 0.0) || !std::isfinite(cost)) {
      throw Error(ErrorKind::Validation, fmt::format("cost of '{}' is not a finite nonnegative value", id));
    }
    double normalized = range > 0.0 ? (cost - min_cost) / range : 0.0;
    table.normalized_cost.emplace(id, std::clamp(normalized, 0.0, 1.0));
  }
  table.raw_cost = std::move(raw_cost);
  return table;
}

CostTable compute_costs(const ResponseMatrix& matrix,
                        const std::vector<ModelConfiguration>& configs) {
  if (configs.empty()) throw Error(ErrorKind::EmptyPool, "no configurations to cost");

  std::map<std::string, std::pair<double, std::size_t>> totals;
  for (const auto& config : configs) totals.emplace(config.id, std::pair{0.0, std::size_t{0}});
  for (const auto& cell : matrix.cells) {
    auto it = totals.find(cell.config_id);
    if (it == totals.end()) continue;
    it->second.first += static_cast<double>(cell.total_tokens());
    ++it->second.second;
  }

  std::map<std::string, double> raw;
  for (const auto& config : configs) {
    const auto& [tokens, count] = totals.at(config.id);
    if (count == 0) {
      throw Error(ErrorKind::MissingTokenData,
                  fmt::format("configuration '{}' has no observed cells with token counts",
                              config.id));
    }
    raw[config.id] = tokens / static_cast<double>(count) * config.price_per_token;
  }
  return normalize_costs(std::move(raw));
}

std::vector<ModelConfiguration> configurations_from_prices(const std::vector<std::string>& ids,
                                                           const PriceList& prices) {
  std::vector<ModelConfiguration> configs;
  configs.reserve(ids.size());
  for (const auto& id : ids) {
    auto key = parse_config_id(id);
    auto price = prices.find(key.model_name);
    if (price == prices.end()) {
      throw Error(ErrorKind::Validation,
                  fmt::format("no price listed for model '{}' (configuration '{}')",
                              key.model_name, id));
    }
    auto config = ModelConfiguration::from_id(id, price->second);
    // Keep the caller's spelling so ids join against the matrix verbatim.
    config.id = id;
    configs.push_back(std::move(config));
  }
  return configs;
}

nlohmann::json to_json(const CostTable& table) {
  return {{"pool_version", table.pool_version}, {"raw_cost", table.raw_cost}};
}

CostTable cost_table_from_json(const nlohmann::json& doc) {
  try {
    return normalize_costs(doc.at("raw_cost").get<std::map<std::string, double>>(),
                           doc.value("pool_version", std::uint64_t{0}));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, fmt::format("cost table: {}", e.what()));
  }
}

}  // namespace radar
