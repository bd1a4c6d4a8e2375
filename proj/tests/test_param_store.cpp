#include "doctest.h"
#include "roadbeh/param_store.hpp"
#include "support.hpp"

using roadbeh::ParamStore;
using roadbeh::Tensor;

TEST_CASE("names are unique and shapes fixed") {
  ParamStore s;
  s.add("b", Tensor(2, 2));
  s.add("a", Tensor(1, 3));
  CHECK_THROWS_AS(s.add("a", Tensor(1, 3)), std::invalid_argument);
  CHECK_THROWS_AS(s.set("a", Tensor(3, 1)), roadbeh::ShapeError);
  CHECK_THROWS_AS(s.get("zz"), std::out_of_range);
  CHECK(s.names() == std::vector<std::string>{"a", "b"});
  CHECK(s.scalar_count() == 7);
  s.set("a", Tensor::from_rows({{1, 2, 3}}));
  CHECK(s.get("a")(0, 2) == 3);
  s.values("b")[3] = 9;
  CHECK(s.get("b")(1, 1) == 9);
  const ParamStore z = s.zeros_like();
  CHECK(z.get("a") == Tensor(1, 3));
}

TEST_CASE("json round trip is exact") {
  ParamStore s;
  Tensor t = testing::random_tensor(3, 4, 7);
  t(0, 0) = 1e-300;
  t(0, 1) = -1.2345678901234567e200;
  t(0, 2) = 0.1;
  s.add("layer0.W_self", t);
  s.add("embedding", testing::random_tensor(6, 5, 8));
  const std::string text = to_json(s).dump();
  const ParamStore back = roadbeh::param_store_from_json(nlohmann::json::parse(text));
  CHECK(back == s);
}

TEST_CASE("malformed documents are rejected") {
  CHECK_THROWS(roadbeh::param_store_from_json(nlohmann::json{{"version", 2}, {"params", nlohmann::json::object()}}));
  nlohmann::json bad = {{"version", 1}, {"params", {{"w", {{"rows", 2}, {"cols", 2}, {"data", {1, 2, 3}}}}}}};
  CHECK_THROWS(roadbeh::param_store_from_json(bad));
}
