#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radar/costing.hpp"
#include "radar/types.hpp"

namespace radar {

struct CurvePoint {
  double w1 = 0.0;
  double performance = 0.0;  // mean ground-truth correctness of the routed configs
  double cost = 0.0;         // mean normalized cost of the routed configs
  double raw_cost = 0.0;     // mean dollars per query of the routed configs
};

/// One realized point per swept weight, ascending in w1.
struct TradeoffCurve {
  std::vector<CurvePoint> points;
};

/// decisions[w][q] must route query_ids[q]; every routed (config, query)
/// needs a cell in ground_truth, else Error(MissingGroundTruth).
TradeoffCurve realize_curve(const std::vector<std::vector<RoutingDecision>>& decisions,
                            std::span<const std::string> query_ids,
                            const ResponseMatrix& ground_truth, const CostTable& costs);

struct PerfCost {
  double performance = 0.0;
  double cost = 0.0;
};

/// Area dominated by the points in (performance up, cost down) space with
/// reference point (performance 0, cost 1): the staircase over the
/// non-dominated subset sorted by cost. Throws Error(EmptyCurve).
double hypervolume(std::span<const PerfCost> points);
double hypervolume(const TradeoffCurve& curve);

/// Non-dominated subset ordered by ascending cost (and so ascending
/// performance).
std::vector<PerfCost> pareto_front(std::span<const PerfCost> points);

/// Smallest raw-dollar cost ratio (point cost / reference cost) among curve
/// points reaching x_percent of the reference performance. No interpolation
/// between points. Throws Error(ThresholdUnreachable) if no point qualifies.
double cpt(const TradeoffCurve& curve, double x_percent, double reference_performance,
           double reference_cost);

struct ReferenceConfig {
  std::string config_id;
  double performance = 0.0;  // mean ground-truth correctness
  double raw_cost = 0.0;     // cost table dollars per query
};

/// The named configuration, or when none is named the one with the highest
/// ground-truth accuracy (ties: higher raw cost, then smaller id).
ReferenceConfig select_reference(const ResponseMatrix& ground_truth, const CostTable& costs,
                                 const std::optional<std::string>& config_id = {});

nlohmann::json to_json(const TradeoffCurve& curve);
/// Header "w1,performance,cost" plus one row per point.
void write_curve_csv(std::ostream& out, const TradeoffCurve& curve);

}  // namespace radar
