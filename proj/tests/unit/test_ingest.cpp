#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "radar/error.hpp"
#include "radar/ingest.hpp"

using namespace radar;

namespace {

std::vector<std::string> ids(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back("q" + std::to_string(i));
  return out;
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("raw log to matrix") {
  std::istringstream log(
      R"({"model":"m","budget":"low","query_id":"q1","correct":true,"reasoning_tokens":10,"completion_tokens":5,"tag":"math"})"
      "\n"
      R"({"model":"m","budget":1024,"query_id":"q1","correct":0,"reasoning_tokens":20,"completion_tokens":5})"
      "\n\n"
      R"({"model":"m","budget":"low","query_id":"q2","correct":1,"reasoning_tokens":1,"completion_tokens":1,"tag":"code"})"
      "\n"
      R"({"model":"m","budget":"low","query_id":"q1","correct":false,"reasoning_tokens":0,"completion_tokens":0})"
      "\n");
  const auto result = build_matrix(log, 8);
  CHECK(result.matrix.dim == 8);
  CHECK(result.matrix.configs == std::vector<std::string>{"m@low", "m@1024"});
  CHECK(result.matrix.queries == std::vector<std::string>{"q1", "q2"});
  CHECK(result.matrix.cells.size() == 3);
  CHECK(result.duplicates == 1);
  CHECK(result.matrix.cells[0].correct);
  CHECK(result.query_tags.at("q2") == "code");
}

TEST_CASE("raw log errors carry line numbers") {
  std::istringstream log(R"({"model":"m","budget":"low","query_id":"q1","correct":1})" "\n" R"({"model":"m"})" "\n");
  try {
    build_matrix(log, 4);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("fractional split") {
  const auto q = ids(10);
  const auto split = split_queries(q, 0.8, 1);
  CHECK(split.train.size() == 8);
  CHECK(split.test.size() == 2);
  for (const auto& t : split.test) {
    CHECK(std::find(split.train.begin(), split.train.end(), t) == split.train.end());
  }
  const auto again = split_queries(q, 0.8, 1);
  CHECK(again.train == split.train);
  CHECK(again.test == split.test);

  const auto all = split_queries(q, 1.0, 1);
  CHECK(all.test.empty());
  CHECK_FALSE(all.warnings.empty());
  CHECK_THROWS_AS(split_queries(q, 1.5, 1), Error);
}

TEST_CASE("split by tag") {
  const std::map<std::string, std::string> tags{{"a", "math"}, {"b", "aime"}, {"c", "math"}, {"d", "olymp"}};
  const auto split = holdout_by_tag(tags, {"aime"}, {"olymp"});
  CHECK(split.test == std::vector<std::string>{"b"});
  CHECK(split.train == std::vector<std::string>{"a", "c"});
  CHECK(split.excluded == std::vector<std::string>{"d"});
}

TEST_CASE("query selection keeps every configuration") {
  ResponseMatrix m;
  m.configs = {"x@0", "y@0"};
  m.queries = {"q1", "q2"};
  m.cells = {{"x@0", "q1", true, 0, 0}, {"y@0", "q2", false, 0, 0}};
  const std::vector<std::string> keep{"q2"};
  const auto sub = select_queries(m, keep);
  CHECK(sub.configs == m.configs);
  CHECK(sub.queries == keep);
  CHECK(sub.cells.size() == 1);
}

}
