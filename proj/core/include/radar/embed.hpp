#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "radar/types.hpp"

namespace radar {

enum class EmbeddingKind { Store, RemoteService, HashFeaturizer };

std::string_view to_string(EmbeddingKind kind) noexcept;

/// Supplies fixed-length query embeddings. Store sources are keyed by query
/// id; the featurizer and remote service take the query text.
class EmbeddingSource {
 public:
  virtual ~EmbeddingSource() = default;

  virtual EmbeddingKind kind() const noexcept = 0;
  virtual std::size_t dim() const noexcept = 0;
  virtual Embedding embed(std::string_view key) const = 0;
  virtual std::vector<Embedding> embed_batch(std::span<const std::string> keys) const;
};

/// Embeds one query and checks the result has length dim() and finite entries.
Embedding embed_query(const EmbeddingSource& source, std::string_view key);

/// Throws Error(DimensionMismatch / NonFinite) if the vector is unusable.
void check_embedding(std::span<const double> embedding, std::size_t dim, std::string_view what);

void l2_normalize(Embedding& embedding);

/// In-memory id -> vector table backed by one contiguous buffer.
class EmbeddingStore final : public EmbeddingSource {
 public:
  explicit EmbeddingStore(std::size_t dim);

  /// Loads the line-delimited embedding file. If dim is 0 it is taken from
  /// the first record.
  static EmbeddingStore load(const std::filesystem::path& path, std::size_t dim = 0);
  static EmbeddingStore from_queries(const std::vector<Query>& queries, std::size_t dim = 0);

  EmbeddingKind kind() const noexcept override { return EmbeddingKind::Store; }
  std::size_t dim() const noexcept override { return dim_; }
  Embedding embed(std::string_view id) const override;

  /// Adds or replaces a vector.
  void insert(std::string_view id, std::span<const double> embedding);

  bool contains(std::string_view id) const;
  /// Borrowed view valid until the next insert; throws Error(LookupMiss).
  std::span<const double> view(std::string_view id) const;
  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
};

/// Deterministic, non-semantic featurizer for offline pipelines and tests.
/// Slot i is a seeded 64-bit hash of the UTF-8 bytes (seed = i) mapped to
/// [-1, 1]; stable across processes and platforms.
class HashFeaturizer final : public EmbeddingSource {
 public:
  explicit HashFeaturizer(std::size_t dim);

  EmbeddingKind kind() const noexcept override { return EmbeddingKind::HashFeaturizer; }
  std::size_t dim() const noexcept override { return dim_; }
  Embedding embed(std::string_view text) const override;

 private:
  std::size_t dim_;
};

std::uint64_t seeded_hash64(std::string_view bytes, std::uint64_t seed) noexcept;

struct RemoteEmbeddingOptions {
  std::string endpoint;  // http://host:port/path
  std::size_t dim = 0;
  int max_retries = 2;
  std::chrono::milliseconds initial_backoff{100};
  std::chrono::milliseconds timeout{10000};
  std::ptrdiff_t max_in_flight = 8;
};

/// JSON-over-HTTP embedding client. Request body {"texts": [...]},
/// response {"embeddings": [[...], ...]}.
class RemoteEmbeddingService final : public EmbeddingSource {
 public:
  explicit RemoteEmbeddingService(RemoteEmbeddingOptions options);
  ~RemoteEmbeddingService() override;

  /// Reads the endpoint from RADAR_EMBED_ENDPOINT.
  static std::unique_ptr<RemoteEmbeddingService> from_environment(std::size_t dim);

  EmbeddingKind kind() const noexcept override { return EmbeddingKind::RemoteService; }
  std::size_t dim() const noexcept override { return options_.dim; }
  Embedding embed(std::string_view text) const override;
  std::vector<Embedding> embed_batch(std::span<const std::string> texts) const override;

  const RemoteEmbeddingOptions& options() const noexcept { return options_; }

 private:
  RemoteEmbeddingOptions options_;
  std::string host_;
  std::string path_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

/// Wraps another source and L2-normalizes its output.
class NormalizedSource final : public EmbeddingSource {
 public:
  explicit NormalizedSource(std::shared_ptr<const EmbeddingSource> inner);

  EmbeddingKind kind() const noexcept override { return inner_->kind(); }
  std::size_t dim() const noexcept override { return inner_->dim(); }
  Embedding embed(std::string_view key) const override;

 private:
  std::shared_ptr<const EmbeddingSource> inner_;
};

}  // namespace radar
