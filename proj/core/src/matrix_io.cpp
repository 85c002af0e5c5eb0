#include "radar/matrix_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "radar/error.hpp"

namespace radar {

using nlohmann::json;

namespace {

json parse_line(const std::string& line, std::size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, fmt::format("line {}: {}", line_no, e.what()));
  }
}

template <typename T>
T required(const json& record, const char* key, std::size_t line_no) {
  auto it = record.find(key);
  if (it == record.end()) {
    throw Error(ErrorKind::Parse, fmt::format("line {}: missing key '{}'", line_no, key));
  }
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, fmt::format("line {}: key '{}': {}", line_no, key, e.what()));
  }
}

bool parse_correct(const json& value, std::size_t line_no) {
  if (value.is_boolean()) return value.get<bool>();
  if (value.is_number_integer() || value.is_number_unsigned()) {
    auto v = value.get<std::int64_t>();
    if (v == 0 || v == 1) return v == 1;
  }
  throw Error(ErrorKind::Parse, fmt::format("line {}: 'correct' must be 0 or 1", line_no));
}

std::uint64_t parse_tokens(const json& record, const char* key, std::size_t line_no) {
  auto it = record.find(key);
  if (it == record.end()) return 0;
  if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0)) {
    throw Error(ErrorKind::Parse,
                fmt::format("line {}: '{}' must be a nonnegative integer", line_no, key));
  }
  return it->get<std::uint64_t>();
}

}  // namespace

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open '{}' for reading", path.string()));
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, fmt::format("cannot open '{}' for writing", path.string()));
  return out;
}

ResponseMatrix read_matrix(std::istream& in) {
  ResponseMatrix matrix;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record = parse_line(line, line_no);
    if (!record.is_object()) {
      throw Error(ErrorKind::Parse, fmt::format("line {}: expected a JSON object", line_no));
    }
    if (!have_header) {
      matrix.dim = required<std::size_t>(record, "dim", line_no);
      matrix.configs = required<std::vector<std::string>>(record, "configs", line_no);
      matrix.queries = required<std::vector<std::string>>(record, "queries", line_no);
      have_header = true;
      continue;
    }
    ResponseCell cell;
    cell.config_id = required<std::string>(record, "config_id", line_no);
    cell.query_id = required<std::string>(record, "query_id", line_no);
    auto correct = record.find("correct");
    if (correct == record.end()) {
      throw Error(ErrorKind::Parse, fmt::format("line {}: missing key 'correct'", line_no));
    }
    cell.correct = parse_correct(*correct, line_no);
    cell.reasoning_tokens = parse_tokens(record, "reasoning_tokens", line_no);
    cell.completion_tokens = parse_tokens(record, "completion_tokens", line_no);
    matrix.cells.push_back(std::move(cell));
  }
  if (!have_header) throw Error(ErrorKind::Parse, "response matrix is missing its header line");
  return matrix;
}

ResponseMatrix read_matrix_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return read_matrix(in);
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_matrix(std::ostream& out, const ResponseMatrix& matrix) {
  json header = {{"dim", matrix.dim}, {"configs", matrix.configs}, {"queries", matrix.queries}};
  out << header.dump() << '\n';
  for (const auto& cell : matrix.cells) {
    json record = {{"config_id", cell.config_id},
                   {"query_id", cell.query_id},
                   {"correct", cell.correct ? 1 : 0},
                   {"reasoning_tokens", cell.reasoning_tokens},
                   {"completion_tokens", cell.completion_tokens}};
    out << record.dump() << '\n';
  }
}

void write_matrix_file(const std::filesystem::path& path, const ResponseMatrix& matrix) {
  auto out = open_output(path);
  write_matrix(out, matrix);
}

std::vector<Query> read_queries(std::istream& in, std::optional<std::size_t> expected_dim) {
  std::vector<Query> queries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record = parse_line(line, line_no);
    Query query;
    query.id = required<std::string>(record, "id", line_no);
    if (auto text = record.find("text"); text != record.end() && !text->is_null()) {
      query.text = text->get<std::string>();
    }
    query.embedding = required<std::vector<double>>(record, "embedding", line_no);
    if (!expected_dim && !queries.empty()) expected_dim = queries.front().embedding.size();
    if (expected_dim && query.embedding.size() != *expected_dim) {
      throw Error(ErrorKind::DimensionMismatch,
                  fmt::format("line {}: embedding for '{}' has length {}, expected {}", line_no,
                              query.id, query.embedding.size(), *expected_dim));
    }
    for (double v : query.embedding) {
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::NonFinite,
                    fmt::format("line {}: embedding for '{}' has a non-finite entry", line_no,
                                query.id));
      }
    }
    queries.push_back(std::move(query));
  }
  return queries;
}

std::vector<Query> read_queries_file(const std::filesystem::path& path,
                                     std::optional<std::size_t> expected_dim) {
  auto in = open_input(path);
  try {
    return read_queries(in, expected_dim);
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_queries(std::ostream& out, const std::vector<Query>& queries) {
  for (const auto& query : queries) {
    json record = {{"id", query.id}};
    if (!query.text.empty()) record["text"] = query.text;
    record["embedding"] = query.embedding;
    out << record.dump() << '\n';
  }
}

void write_queries_file(const std::filesystem::path& path, const std::vector<Query>& queries) {
  auto out = open_output(path);
  write_queries(out, queries);
}

PriceList read_prices_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, fmt::format("{}: {}", path.string(), e.what()));
  }
  if (!doc.is_object()) {
    throw Error(ErrorKind::Parse, fmt::format("{}: expected a JSON object", path.string()));
  }
  PriceList prices;
  for (auto& [model, price] : doc.items()) {
    if (!price.is_number() || !(price.get<double>() >= 0.0)) {
      throw Error(ErrorKind::Validation,
                  fmt::format("{}: price for '{}' must be a nonnegative number", path.string(),
                              model));
    }
    prices.emplace(model, price.get<double>());
  }
  return prices;
}

void write_prices_file(const std::filesystem::path& path, const PriceList& prices) {
  auto out = open_output(path);
  out << json(prices).dump(2) << '\n';
}

}  // namespace radar
