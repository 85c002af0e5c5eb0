#include "radar/scalarize.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "radar/error.hpp"

namespace radar {

double linear_score(double w1, double p, double c) noexcept { return w1 * p - (1.0 - w1) * c; }

double chebyshev_score(double w1, double p, double c) noexcept {
  return std::max(w1 * std::abs(1.0 - p), (1.0 - w1) * c);
}

double score(Scalarization s, double w1, double p, double c) noexcept {
  return s == Scalarization::Linear ? linear_score(w1, p, c) : chebyshev_score(w1, p, c);
}

namespace {

void check_entry(const PoolEntry& entry) {
  if (!(entry.p >= 0.0 && entry.p <= 1.0) || !(entry.c >= 0.0 && entry.c <= 1.0)) {
    throw Error(ErrorKind::Validation,
                fmt::format("pool entry '{}' has p={} c={} outside [0, 1]", entry.config_id,
                            entry.p, entry.c));
  }
}

// True when candidate (with score s) should replace the incumbent.
bool better(Scalarization scalarization, double s, const PoolEntry& candidate, double best_s,
            const PoolEntry& best) {
  if (s != best_s) return scalarization == Scalarization::Linear ? s > best_s : s < best_s;
  if (candidate.c != best.c) return candidate.c < best.c;
  if (candidate.p != best.p) return candidate.p > best.p;
  return candidate.config_id < best.config_id;
}

}  // namespace

std::size_t route_index(const TradeoffProfile& profile, std::span<const PoolEntry> pool) {
  profile.validate();
  if (pool.empty()) throw Error(ErrorKind::EmptyPool, "cannot route over an empty pool");
  std::size_t best = 0;
  check_entry(pool[0]);
  double best_score = score(profile.scalarization, profile.w1, pool[0].p, pool[0].c);
  for (std::size_t i = 1; i < pool.size(); ++i) {
    check_entry(pool[i]);
    const double s = score(profile.scalarization, profile.w1, pool[i].p, pool[i].c);
    if (better(profile.scalarization, s, pool[i], best_score, pool[best])) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

RoutingDecision route(const TradeoffProfile& profile, std::span<const PoolEntry> pool) {
  const auto& chosen = pool[route_index(profile, pool)];
  return RoutingDecision{chosen.config_id, chosen.p, chosen.c,
                         score(profile.scalarization, profile.w1, chosen.p, chosen.c), profile};
}

std::vector<double> weight_grid(std::size_t points) {
  if (points == 0) throw Error(ErrorKind::Validation, "weight grid needs at least one point");
  if (points == 1) return {1.0};
  std::vector<double> grid(points);
  const double steps = static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = static_cast<double>(i) / steps;
  return grid;
}

std::vector<std::vector<RoutingDecision>> sweep(std::span<const double> grid,
                                                Scalarization scalarization,
                                                std::span<const std::vector<PoolEntry>> pools) {
  std::vector<std::vector<RoutingDecision>> out;
  out.reserve(grid.size());
  for (double w1 : grid) {
    TradeoffProfile profile{w1, scalarization};
    profile.validate();
    auto& row = out.emplace_back();
    row.reserve(pools.size());
    for (const auto& pool : pools) row.push_back(route(profile, pool));
  }
  return out;
}

std::vector<PoolEntry> build_pool(const IrtParameters& params, const CostTable& costs,
                                  std::span<const std::string> config_ids,
                                  std::span<const double> embedding) {
  const auto item = item_params(params, embedding);
  std::vector<PoolEntry> pool;
  pool.reserve(config_ids.size());
  for (const auto& id : config_ids) {
    pool.push_back({id, correct_probability(params.ability(id), item), costs.normalized(id)});
  }
  return pool;
}

}  // namespace radar
