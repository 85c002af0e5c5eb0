#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "radar/types.hpp"

namespace radar {

// Line-delimited JSON formats.
//
// Response matrix: the first line is a header
//   {"dim": d_q, "configs": [...], "queries": [...]}
// followed by one cell per line
//   {"config_id", "query_id", "correct", "reasoning_tokens", "completion_tokens"}.
//
// Query embeddings: one record per line
//   {"id", "text" (optional), "embedding": [d_q numbers]}.
//
// Parse failures throw Error(Parse) naming the 1-based line number.

ResponseMatrix read_matrix(std::istream& in);
ResponseMatrix read_matrix_file(const std::filesystem::path& path);
void write_matrix(std::ostream& out, const ResponseMatrix& matrix);
void write_matrix_file(const std::filesystem::path& path, const ResponseMatrix& matrix);

/// When expected_dim is set every vector must have that length.
std::vector<Query> read_queries(std::istream& in, std::optional<std::size_t> expected_dim = {});
std::vector<Query> read_queries_file(const std::filesystem::path& path,
                                     std::optional<std::size_t> expected_dim = {});
void write_queries(std::ostream& out, const std::vector<Query>& queries);
void write_queries_file(const std::filesystem::path& path, const std::vector<Query>& queries);

/// model_name -> USD per output token.
using PriceList = std::map<std::string, double>;

PriceList read_prices_file(const std::filesystem::path& path);
void write_prices_file(const std::filesystem::path& path, const PriceList& prices);

/// Opens a file for reading or writing, throwing Error(Io) on failure.
std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace radar
