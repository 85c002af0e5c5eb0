#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "radar/embed.hpp"
#include "radar/error.hpp"
#include "radar/matrix_io.hpp"

using namespace radar;

namespace {

// Local stand-in for a remote embedding endpoint. The first `failures`
// requests answer 503.
class FakeEmbedder {
 public:
  FakeEmbedder(std::size_t dim, int failures) : dim_(dim), failures_(failures) {
    server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      if (failures_-- > 0) {
        res.status = 503;
        return;
      }
      const auto body = nlohmann::json::parse(req.body);
      nlohmann::json out = {{"embeddings", nlohmann::json::array()}};
      for (const auto& text : body.at("texts")) {
        std::vector<double> v(dim_, static_cast<double>(text.get<std::string>().size()));
        out["embeddings"].push_back(v);
      }
      res.set_content(out.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEmbedder() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/embed"; }
  int requests() const { return requests_; }

 private:
  std::size_t dim_;
  std::atomic<int> failures_;
  std::atomic<int> requests_{0};
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

RemoteEmbeddingOptions remote_options(const std::string& endpoint, std::size_t dim) {
  RemoteEmbeddingOptions o;
  o.endpoint = endpoint;
  o.dim = dim;
  o.initial_backoff = std::chrono::milliseconds(1);
  o.timeout = std::chrono::milliseconds(2000);
  return o;
}

}  // namespace

TEST_SUITE("embed") {

TEST_CASE("hash featurizer is deterministic") {
  HashFeaturizer f(8);
  const auto a = embed_query(f, "abc");
  const auto b = embed_query(f, "abc");
  CHECK(a.size() == 8);
  CHECK(a == b);
  CHECK(a != embed_query(f, "abd"));
  for (double x : a) {
    CHECK(x >= -1.0);
    CHECK(x <= 1.0);
  }
}

TEST_CASE("hash values are pinned") {
  // Stable across processes and platforms; a change here breaks stored features.
  CHECK(seeded_hash64("abc", 0) == 3018304574923447344ULL);
  CHECK(seeded_hash64("", 7) == 4588120485078875254ULL);
  const auto e = HashFeaturizer(3).embed("abc");
  CHECK(e[0] == -0.67275476226450626);
  CHECK(e[1] == 0.93405891394371476);
  CHECK(e[2] == 0.62910362440739309);
}

TEST_CASE("store returns exactly the loaded vector") {
  const auto path = std::filesystem::temp_directory_path() / "radar_embed_store.jsonl";
  write_queries_file(path, {{"q1", "", {0.1, -2.5, 3.0}}, {"q2", "", {1e-300, 0.0, 7.0}}});
  const auto store = EmbeddingStore::load(path);
  CHECK(store.dim() == 3);
  CHECK(embed_query(store, "q1") == std::vector<double>{0.1, -2.5, 3.0});
  CHECK(embed_query(store, "q2") == std::vector<double>{1e-300, 0.0, 7.0});
  std::filesystem::remove(path);
}

TEST_CASE("store miss is a lookup error") {
  EmbeddingStore store(2);
  store.insert("q1", std::vector<double>{1.0, 2.0});
  try {
    embed_query(store, "q2");
    FAIL("expected a lookup miss");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::LookupMiss);
  }
}

TEST_CASE("store rejects wrong dimension") {
  EmbeddingStore store(2);
  CHECK_THROWS_AS(store.insert("q", std::vector<double>{1.0}), Error);
}

TEST_CASE("l2 normalization") {
  Embedding e{3.0, 4.0};
  l2_normalize(e);
  CHECK(e[0] == doctest::Approx(0.6));
  CHECK(e[1] == doctest::Approx(0.8));
  Embedding zero{0.0, 0.0};
  l2_normalize(zero);
  CHECK(zero == Embedding{0.0, 0.0});
}

TEST_CASE("remote service returns vectors") {
  FakeEmbedder fake(4, 0);
  RemoteEmbeddingService remote(remote_options(fake.endpoint(), 4));
  CHECK(remote.embed("hello") == std::vector<double>(4, 5.0));
  const std::vector<std::string> texts{"a", "bbb"};
  const auto batch = remote.embed_batch(texts);
  REQUIRE(batch.size() == 2);
  CHECK(batch[1] == std::vector<double>(4, 3.0));
}

TEST_CASE("remote service retries transient failures") {
  FakeEmbedder fake(2, 2);
  RemoteEmbeddingService remote(remote_options(fake.endpoint(), 2));
  CHECK(remote.embed("xy") == std::vector<double>(2, 2.0));
  CHECK(fake.requests() == 3);
}

TEST_CASE("remote service gives up after the retry budget") {
  FakeEmbedder fake(2, 100);
  RemoteEmbeddingService remote(remote_options(fake.endpoint(), 2));
  try {
    remote.embed("xy");
    FAIL("expected remote-unavailable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RemoteUnavailable);
  }
  CHECK(fake.requests() == 3);
}

TEST_CASE("remote service rejects vectors of the wrong dimension") {
  FakeEmbedder fake(3, 0);
  RemoteEmbeddingService remote(remote_options(fake.endpoint(), 2));
  try {
    remote.embed("xy");
    FAIL("expected a dimension error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}

}
