#pragma once

#include <span>
#include <string>
#include <vector>

#include "radar/costing.hpp"
#include "radar/irt.hpp"
#include "radar/types.hpp"

namespace radar {

/// One routing candidate for one query: predicted performance p and
/// normalized cost c, both in [0, 1].
struct PoolEntry {
  std::string config_id;
  double p = 0.0;
  double c = 0.0;
};

/// Weighted sum w1 p - (1 - w1) c; larger is better.
double linear_score(double w1, double p, double c) noexcept;

/// Weighted distance max(w1 |1 - p|, (1 - w1) c) from the ideal point
/// (p = 1, c = 0); smaller is better.
double chebyshev_score(double w1, double p, double c) noexcept;

double score(Scalarization s, double w1, double p, double c) noexcept;

/// Picks the best-scoring entry. Equal scores resolve to the lower cost,
/// then the higher performance, then the smaller config id, which keeps
/// dominated entries from ever winning a tie.
/// Throws Error(EmptyPool) or Error(Validation) for out-of-range inputs.
RoutingDecision route(const TradeoffProfile& profile, std::span<const PoolEntry> pool);

/// Same selection as route() returning only the winning position.
std::size_t route_index(const TradeoffProfile& profile, std::span<const PoolEntry> pool);

/// Evenly spaced weights over [0, 1]. A single point grid is {1.0}.
std::vector<double> weight_grid(std::size_t points = 101);

/// decisions[w][q] routes query q at weight grid[w].
std::vector<std::vector<RoutingDecision>> sweep(std::span<const double> grid,
                                                Scalarization scalarization,
                                                std::span<const std::vector<PoolEntry>> pools);

/// Predicted performance and cost of every pool configuration on one query.
/// Discrimination and difficulty are computed once and reused across the pool.
std::vector<PoolEntry> build_pool(const IrtParameters& params, const CostTable& costs,
                                  std::span<const std::string> config_ids,
                                  std::span<const double> embedding);

}  // namespace radar
