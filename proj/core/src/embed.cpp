#include "radar/embed.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "radar/error.hpp"
#include "radar/matrix_io.hpp"

namespace radar {

std::string_view to_string(EmbeddingKind kind) noexcept {
  switch (kind) {
    case EmbeddingKind::Store: return "store";
    case EmbeddingKind::RemoteService: return "remote";
    case EmbeddingKind::HashFeaturizer: return "hash";
  }
  return "unknown";
}

std::vector<Embedding> EmbeddingSource::embed_batch(std::span<const std::string> keys) const {
  std::vector<Embedding> out;
  out.reserve(keys.size());
  for (const auto& key : keys) out.push_back(embed(key));
  return out;
}

void check_embedding(std::span<const double> embedding, std::size_t dim, std::string_view what) {
  if (embedding.size() != dim) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("embedding for '{}' has length {}, expected {}", what,
                            embedding.size(), dim));
  }
  for (double v : embedding) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::NonFinite,
                  fmt::format("embedding for '{}' has a non-finite entry", what));
    }
  }
}

Embedding embed_query(const EmbeddingSource& source, std::string_view key) {
  Embedding e = source.embed(key);
  check_embedding(e, source.dim(), key);
  return e;
}

void l2_normalize(Embedding& embedding) {
  double norm = 0.0;
  for (double v : embedding) norm += v * v;
  norm = std::sqrt(norm);
  if (norm == 0.0) return;
  for (double& v : embedding) v /= norm;
}

// EmbeddingStore

EmbeddingStore::EmbeddingStore(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error(ErrorKind::Validation, "embedding dimension must be positive");
}

EmbeddingStore EmbeddingStore::from_queries(const std::vector<Query>& queries, std::size_t dim) {
  if (dim == 0) {
    if (queries.empty()) {
      throw Error(ErrorKind::Validation, "cannot infer embedding dimension from an empty file");
    }
    dim = queries.front().embedding.size();
  }
  EmbeddingStore store(dim);
  for (const auto& q : queries) store.insert(q.id, q.embedding);
  return store;
}

EmbeddingStore EmbeddingStore::load(const std::filesystem::path& path, std::size_t dim) {
  auto queries = read_queries_file(path, dim == 0 ? std::nullopt : std::optional(dim));
  return from_queries(queries, dim);
}

void EmbeddingStore::insert(std::string_view id, std::span<const double> embedding) {
  check_embedding(embedding, dim_, id);
  auto it = index_.find(std::string(id));
  if (it != index_.end()) {
    std::copy(embedding.begin(), embedding.end(), data_.begin() + it->second * dim_);
    return;
  }
  index_.emplace(std::string(id), ids_.size());
  ids_.emplace_back(id);
  data_.insert(data_.end(), embedding.begin(), embedding.end());
}

bool EmbeddingStore::contains(std::string_view id) const {
  return index_.find(std::string(id)) != index_.end();
}

std::span<const double> EmbeddingStore::view(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) {
    throw Error(ErrorKind::LookupMiss, fmt::format("no embedding stored for query '{}'", id));
  }
  return {data_.data() + it->second * dim_, dim_};
}

Embedding EmbeddingStore::embed(std::string_view id) const {
  auto v = view(id);
  return {v.begin(), v.end()};
}

// HashFeaturizer

std::uint64_t seeded_hash64(std::string_view bytes, std::uint64_t seed) noexcept {
  // FNV-1a over the bytes from a seed-perturbed basis, then a splitmix64
  // finalizer so neighbouring seeds decorrelate.
  std::uint64_t h = 0xcbf29ce484222325ULL ^ (seed * 0x9e3779b97f4a7c15ULL);
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  h += 0x9e3779b97f4a7c15ULL;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

HashFeaturizer::HashFeaturizer(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error(ErrorKind::Validation, "embedding dimension must be positive");
}

Embedding HashFeaturizer::embed(std::string_view text) const {
  Embedding out(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    auto h = seeded_hash64(text, i);
    out[i] = static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
  }
  return out;
}

// RemoteEmbeddingService

namespace {

struct SemaphoreGuard {
  explicit SemaphoreGuard(std::counting_semaphore<>& s) : sem(s) { sem.acquire(); }
  ~SemaphoreGuard() { sem.release(); }
  std::counting_semaphore<>& sem;
};

}  // namespace

RemoteEmbeddingService::RemoteEmbeddingService(RemoteEmbeddingOptions options)
    : options_(std::move(options)) {
  if (options_.dim == 0) throw Error(ErrorKind::Validation, "embedding dimension must be positive");
  if (options_.max_in_flight < 1) {
    throw Error(ErrorKind::Validation, "max_in_flight must be at least 1");
  }
  const std::string& url = options_.endpoint;
  auto scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw Error(ErrorKind::Validation, fmt::format("embedding endpoint '{}' has no scheme", url));
  }
  auto path_start = url.find('/', scheme + 3);
  host_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  in_flight_ = std::make_unique<std::counting_semaphore<>>(options_.max_in_flight);
}

RemoteEmbeddingService::~RemoteEmbeddingService() = default;

std::unique_ptr<RemoteEmbeddingService> RemoteEmbeddingService::from_environment(std::size_t dim) {
  const char* endpoint = std::getenv("RADAR_EMBED_ENDPOINT");
  if (endpoint == nullptr || *endpoint == '\0') {
    throw Error(ErrorKind::Validation, "RADAR_EMBED_ENDPOINT is not set");
  }
  RemoteEmbeddingOptions options;
  options.endpoint = endpoint;
  options.dim = dim;
  return std::make_unique<RemoteEmbeddingService>(std::move(options));
}

Embedding RemoteEmbeddingService::embed(std::string_view text) const {
  std::string key(text);
  return std::move(embed_batch(std::span<const std::string>(&key, 1)).front());
}

std::vector<Embedding> RemoteEmbeddingService::embed_batch(
    std::span<const std::string> texts) const {
  using nlohmann::json;
  if (texts.empty()) return {};
  const std::string body = json{{"texts", std::vector<std::string>(texts.begin(), texts.end())}}.dump();

  SemaphoreGuard guard(*in_flight_);
  httplib::Client client(host_);
  auto seconds = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  auto micros = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());

  std::string last_error;
  auto backoff = options_.initial_backoff;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto res = client.Post(path_, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = fmt::format("HTTP status {}", res->status);
      continue;
    }
    json doc;
    try {
      doc = json::parse(res->body);
    } catch (const json::parse_error& e) {
      last_error = e.what();
      continue;
    }
    auto it = doc.find("embeddings");
    if (it == doc.end() || !it->is_array() || it->size() != texts.size()) {
      last_error = "response lacks one embedding per text";
      continue;
    }
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
      Embedding e;
      try {
        e = (*it)[i].get<Embedding>();
      } catch (const json::exception& ex) {
        throw Error(ErrorKind::Parse, fmt::format("embedding service response: {}", ex.what()));
      }
      check_embedding(e, options_.dim, texts[i]);
      out.push_back(std::move(e));
    }
    return out;
  }
  throw Error(ErrorKind::RemoteUnavailable,
              fmt::format("embedding service {}{} failed after {} attempts: {}", host_, path_,
                          options_.max_retries + 1, last_error));
}

// NormalizedSource

NormalizedSource::NormalizedSource(std::shared_ptr<const EmbeddingSource> inner)
    : inner_(std::move(inner)) {
  if (!inner_) throw Error(ErrorKind::Validation, "normalized source needs an inner source");
}

Embedding NormalizedSource::embed(std::string_view key) const {
  Embedding e = inner_->embed(key);
  l2_normalize(e);
  return e;
}

}  // namespace radar
