#pragma once

// Reference computations used to check the library. They are deliberately
// written the slow, obvious way and share no code with radar_core beyond
// the data types.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "radar/embed.hpp"
#include "radar/irt.hpp"
#include "radar/metrics.hpp"
#include "radar/scalarize.hpp"
#include "radar/types.hpp"

namespace radar::testing {

/// Mean clamped BCE, straight from the definition.
double reference_loss(const IrtParameters& params, const ResponseMatrix& matrix,
                      const EmbeddingStore& store);

struct NumericGradient {
  std::vector<double> w_a;
  std::vector<double> w_b;
  std::vector<double> theta;  // aligned with matrix.configs
};

/// Central differences of reference_loss with step h.
NumericGradient central_difference(const IrtParameters& params, const ResponseMatrix& matrix,
                                   const EmbeddingStore& store, double h = 1e-5);

/// Area of the unit square dominated by the points, counted on an
/// n x n grid of cell centres.
double grid_hypervolume(const std::vector<PerfCost>& points, int n);

/// Exhaustive routing: score every entry, keep the optimal ones, then apply
/// the tie rule (lower c, higher p, smaller id).
std::string brute_force_route(const std::vector<PoolEntry>& pool, const TradeoffProfile& profile);

double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Small dense instance with a mix of outcomes, for gradient checks.
struct SmallInstance {
  IrtParameters params;
  ResponseMatrix matrix;
  EmbeddingStore store{1};
};

SmallInstance random_instance(std::mt19937_64& rng);

/// Pool of `size` entries. With quantize > 0 the values are drawn from a
/// grid of that many levels so exact score ties are common.
std::vector<PoolEntry> random_pool(std::mt19937_64& rng, std::size_t size, int quantize = 0);

}  // namespace radar::testing
