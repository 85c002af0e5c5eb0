#include "radar/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <unordered_map>

#include <fmt/format.h>

#include "radar/error.hpp"

namespace radar {

namespace {

struct PairHash {
  std::size_t operator()(const std::pair<std::string, std::string>& key) const noexcept {
    auto h = std::hash<std::string>{}(key.first);
    return h ^ (std::hash<std::string>{}(key.second) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  }
};

}  // namespace

TradeoffCurve realize_curve(const std::vector<std::vector<RoutingDecision>>& decisions,
                            std::span<const std::string> query_ids,
                            const ResponseMatrix& ground_truth, const CostTable& costs) {
  std::unordered_map<std::pair<std::string, std::string>, bool, PairHash> truth;
  truth.reserve(ground_truth.cells.size());
  for (const auto& cell : ground_truth.cells) {
    truth.emplace(std::pair{cell.config_id, cell.query_id}, cell.correct);
  }

  TradeoffCurve curve;
  curve.points.reserve(decisions.size());
  for (const auto& row : decisions) {
    if (row.size() != query_ids.size()) {
      throw Error(ErrorKind::Validation, "decision row does not match the query list");
    }
    if (row.empty()) throw Error(ErrorKind::Validation, "cannot realize a curve without queries");
    double correct = 0.0;
    double cost = 0.0;
    double raw = 0.0;
    for (std::size_t q = 0; q < row.size(); ++q) {
      const auto& decision = row[q];
      auto it = truth.find({decision.config_id, query_ids[q]});
      if (it == truth.end()) {
        throw Error(ErrorKind::MissingGroundTruth,
                    fmt::format("no ground truth for ({}, {})", decision.config_id, query_ids[q]));
      }
      correct += it->second ? 1.0 : 0.0;
      cost += costs.normalized(decision.config_id);
      raw += costs.raw(decision.config_id);
    }
    const double n = static_cast<double>(row.size());
    curve.points.push_back({row.front().profile.w1, correct / n, cost / n, raw / n});
  }
  std::stable_sort(curve.points.begin(), curve.points.end(),
                   [](const auto& x, const auto& y) { return x.w1 < y.w1; });
  return curve;
}

std::vector<PerfCost> pareto_front(std::span<const PerfCost> points) {
  std::vector<PerfCost> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) {
    if (x.cost != y.cost) return x.cost < y.cost;
    return x.performance > y.performance;
  });
  std::vector<PerfCost> front;
  for (const auto& point : sorted) {
    if (front.empty() || point.performance > front.back().performance) front.push_back(point);
  }
  return front;
}

double hypervolume(std::span<const PerfCost> points) {
  if (points.empty()) throw Error(ErrorKind::EmptyCurve, "hypervolume of an empty curve");
  for (const auto& p : points) {
    if (!(p.performance >= 0.0 && p.performance <= 1.0) || !(p.cost >= 0.0 && p.cost <= 1.0)) {
      throw Error(ErrorKind::Validation,
                  fmt::format("curve point ({}, {}) lies outside the unit square", p.performance,
                              p.cost));
    }
  }
  const auto front = pareto_front(points);
  double area = 0.0;
  for (std::size_t i = 0; i < front.size(); ++i) {
    const double next_cost = i + 1 < front.size() ? front[i + 1].cost : 1.0;
    area += (next_cost - front[i].cost) * front[i].performance;
  }
  return area;
}

double hypervolume(const TradeoffCurve& curve) {
  std::vector<PerfCost> points;
  points.reserve(curve.points.size());
  for (const auto& p : curve.points) points.push_back({p.performance, p.cost});
  return hypervolume(points);
}

double cpt(const TradeoffCurve& curve, double x_percent, double reference_performance,
           double reference_cost) {
  if (!(x_percent > 0.0) || !std::isfinite(x_percent)) {
    throw Error(ErrorKind::Validation, fmt::format("CPT level {} must be positive", x_percent));
  }
  if (!(reference_cost > 0.0)) {
    throw Error(ErrorKind::Validation, "CPT reference cost must be positive");
  }
  // Realized performances are exact fractions; absorb rounding in the product.
  const double threshold = x_percent * reference_performance / 100.0 - 1e-12;
  std::optional<double> best;
  for (const auto& point : curve.points) {
    if (point.performance < threshold) continue;
    const double ratio = point.raw_cost / reference_cost;
    if (!best || ratio < *best) best = ratio;
  }
  if (!best) {
    throw Error(ErrorKind::ThresholdUnreachable,
                fmt::format("no curve point reaches {}% of the reference performance", x_percent));
  }
  return *best;
}

ReferenceConfig select_reference(const ResponseMatrix& ground_truth, const CostTable& costs,
                                 const std::optional<std::string>& config_id) {
  std::map<std::string, std::pair<double, std::size_t>> tally;
  for (const auto& cell : ground_truth.cells) {
    auto& [correct, count] = tally[cell.config_id];
    correct += cell.correct ? 1.0 : 0.0;
    ++count;
  }
  auto make = [&](const std::string& id) {
    auto it = tally.find(id);
    if (it == tally.end()) {
      throw Error(ErrorKind::MissingGroundTruth,
                  fmt::format("reference configuration '{}' has no ground-truth cells", id));
    }
    return ReferenceConfig{id, it->second.first / static_cast<double>(it->second.second),
                           costs.raw(id)};
  };
  if (config_id) return make(*config_id);

  std::optional<ReferenceConfig> best;
  for (const auto& [id, counts] : tally) {
    if (!costs.raw_cost.contains(id)) continue;
    auto candidate = make(id);
    if (!best || candidate.performance > best->performance ||
        (candidate.performance == best->performance && candidate.raw_cost > best->raw_cost)) {
      best = std::move(candidate);
    }
  }
  if (!best) throw Error(ErrorKind::EmptyPool, "no configuration qualifies as CPT reference");
  return *best;
}

nlohmann::json to_json(const TradeoffCurve& curve) {
  auto points = nlohmann::json::array();
  for (const auto& p : curve.points) {
    points.push_back({{"w1", p.w1},
                      {"performance", p.performance},
                      {"cost", p.cost},
                      {"raw_cost", p.raw_cost}});
  }
  return points;
}

void write_curve_csv(std::ostream& out, const TradeoffCurve& curve) {
  out << "w1,performance,cost\n";
  for (const auto& p : curve.points) {
    out << fmt::format("{},{},{}\n", p.w1, p.performance, p.cost);
  }
}

}  // namespace radar
