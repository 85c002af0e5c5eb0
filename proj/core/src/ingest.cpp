#include "radar/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <random>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "radar/error.hpp"

namespace radar {

using nlohmann::json;

namespace {

std::int64_t budget_field(const json& value, std::size_t line_no) {
  try {
    if (value.is_string()) return parse_budget(value.get<std::string>());
    if (value.is_number_integer()) return parse_budget(std::to_string(value.get<std::int64_t>()));
  } catch (const Error& e) {
    throw Error(ErrorKind::Parse, fmt::format("line {}: {}", line_no, e.what()));
  }
  throw Error(ErrorKind::Parse, fmt::format("line {}: 'budget' must be an integer or tier", line_no));
}

}  // namespace

IngestResult build_matrix(std::istream& raw_log, std::size_t dim) {
  IngestResult result;
  result.matrix.dim = dim;
  std::unordered_set<std::string> configs;
  std::unordered_set<std::string> queries;
  std::unordered_set<std::string> pairs;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(raw_log, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ResponseCell cell;
    std::string tag;
    try {
      const json record = json::parse(line);
      const auto model = record.at("model").get<std::string>();
      cell.config_id = canonical_config_id(model, budget_field(record.at("budget"), line_no));
      cell.query_id = record.at("query_id").get<std::string>();
      const auto& correct = record.at("correct");
      if (correct.is_boolean()) {
        cell.correct = correct.get<bool>();
      } else {
        const auto v = correct.get<std::int64_t>();
        if (v != 0 && v != 1) {
          throw Error(ErrorKind::Parse, fmt::format("line {}: 'correct' must be 0 or 1", line_no));
        }
        cell.correct = v == 1;
      }
      cell.reasoning_tokens = record.value("reasoning_tokens", std::uint64_t{0});
      cell.completion_tokens = record.value("completion_tokens", std::uint64_t{0});
      if (auto t = record.find("tag"); t != record.end() && t->is_string()) tag = t->get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Parse, fmt::format("line {}: {}", line_no, e.what()));
    }

    if (!pairs.insert(cell.config_id + '\x1f' + cell.query_id).second) {
      ++result.duplicates;
      continue;
    }
    if (configs.insert(cell.config_id).second) result.matrix.configs.push_back(cell.config_id);
    if (queries.insert(cell.query_id).second) result.matrix.queries.push_back(cell.query_id);
    if (!tag.empty()) result.query_tags.try_emplace(cell.query_id, tag);
    result.matrix.cells.push_back(std::move(cell));
  }
  return result;
}

QuerySplit split_queries(std::span<const std::string> query_ids, double fraction,
                         std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw Error(ErrorKind::Validation, fmt::format("split fraction {} is outside [0, 1]", fraction));
  }
  std::vector<std::string> shuffled(query_ids.begin(), query_ids.end());
  std::mt19937_64 rng(seed);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto n_train = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(shuffled.size())));

  QuerySplit split;
  split.train.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train), shuffled.end());
  if (split.test.empty()) split.warnings.push_back("test split is empty");
  if (split.train.empty()) split.warnings.push_back("training split is empty");
  return split;
}

QuerySplit holdout_by_tag(const std::map<std::string, std::string>& query_tags,
                          const std::set<std::string>& held_out,
                          const std::set<std::string>& overlap_excluded) {
  QuerySplit split;
  for (const auto& [id, tag] : query_tags) {
    if (held_out.contains(tag)) {
      split.test.push_back(id);
    } else if (overlap_excluded.contains(tag)) {
      split.excluded.push_back(id);
    } else {
      split.train.push_back(id);
    }
  }
  if (split.test.empty()) split.warnings.push_back("no query carries a held-out tag");
  return split;
}

ResponseMatrix select_queries(const ResponseMatrix& matrix, std::span<const std::string> query_ids) {
  std::unordered_set<std::string_view> keep(query_ids.begin(), query_ids.end());
  ResponseMatrix out;
  out.dim = matrix.dim;
  out.configs = matrix.configs;
  for (const auto& q : matrix.queries) {
    if (keep.contains(q)) out.queries.push_back(q);
  }
  for (const auto& cell : matrix.cells) {
    if (keep.contains(cell.query_id)) out.cells.push_back(cell);
  }
  return out;
}

}  // namespace radar
