#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "radar/matrix_io.hpp"
#include "radar/types.hpp"

namespace radar {

/// Per-configuration cost: mean dollars per query on the calibration set and
/// its min-max normalization over the pool. Costs do not depend on the
/// query being routed.
struct CostTable {
  std::map<std::string, double> raw_cost;
  std::map<std::string, double> normalized_cost;
  std::uint64_t pool_version = 0;

  /// Throw Error(UnknownConfiguration).
  double raw(std::string_view config_id) const;
  double normalized(std::string_view config_id) const;
};

/// raw_cost[g] = mean over g's observed cells of
/// (reasoning_tokens + completion_tokens) * price_per_token.
CostTable compute_costs(const ResponseMatrix& matrix,
                        const std::vector<ModelConfiguration>& configs);

/// Min-max normalizes raw costs. A pool whose costs are all equal (or a
/// single configuration) normalizes to 0.
CostTable normalize_costs(std::map<std::string, double> raw_cost, std::uint64_t pool_version = 0);

/// Builds configurations for the given ids with prices looked up by model
/// name. Throws Error(Validation) when a model has no price.
std::vector<ModelConfiguration> configurations_from_prices(const std::vector<std::string>& ids,
                                                           const PriceList& prices);

nlohmann::json to_json(const CostTable& table);
CostTable cost_table_from_json(const nlohmann::json& doc);

}  // namespace radar
