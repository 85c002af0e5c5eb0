#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "radar/types.hpp"

namespace radar {

// Raw evaluation logs, one JSON object per line:
//   {"model", "budget", "query_id", "correct", "reasoning_tokens",
//    "completion_tokens", "tag"}
// budget is an integer token count or one of low/medium/high.

struct IngestResult {
  ResponseMatrix matrix;
  std::map<std::string, std::string> query_tags;
  std::size_t duplicates = 0;  // repeated (config, query) observations dropped
};

/// Rows and columns appear in first-seen order; for repeated (config, query)
/// pairs the first observation wins. Throws Error(Parse) with line numbers.
IngestResult build_matrix(std::istream& raw_log, std::size_t dim);

struct QuerySplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
  std::vector<std::string> excluded;
  std::vector<std::string> warnings;
};

/// Seeded shuffle, then the first round(fraction * n) ids train.
QuerySplit split_queries(std::span<const std::string> query_ids, double fraction,
                         std::uint64_t seed);

/// Queries tagged with a held-out tag are test; queries tagged with an
/// overlap tag are dropped from training without entering the test set;
/// the rest train. Order follows the input map.
QuerySplit holdout_by_tag(const std::map<std::string, std::string>& query_tags,
                          const std::set<std::string>& held_out,
                          const std::set<std::string>& overlap_excluded = {});

/// Restriction of a matrix to the given queries (all configurations kept).
ResponseMatrix select_queries(const ResponseMatrix& matrix, std::span<const std::string> query_ids);

}  // namespace radar
