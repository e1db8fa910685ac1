#include <doctest.h>

#include "rdslab/config.hpp"
#include "rdslab/errors.hpp"

using namespace rdslab;

namespace {

Json minimal_config() {
  return Json::parse(R"({
    "chain": {"states": ["a", "b"], "P": [[0.9, 0.1], [0.2, 0.8]]},
    "maps": {
      "a": {"M": 3, "branches": [{"slope":3,"target_start":0},{"slope":3,"target_start":0},{"slope":3,"target_start":0}]},
      "b": {"M": 3, "branches": [{"slope":3,"target_start":0},{"slope":2,"target_start":1},{"slope":3,"target_start":0}]}
    },
    "resolution": 3,
    "observable": [
      {"symbol": "a", "values": [0.9, -0.4, 0.2], "N": 3},
      {"symbol": "b", "values": [-0.5, 0.6, -0.1], "N": 3}
    ],
    "seed": 5
  })");
}

}  // namespace

TEST_CASE("config parses and round-trips") {
  Json j = minimal_config();
  ExperimentConfig config = parse_config(j);
  CHECK(config.chain.size() == 2);
  CHECK(config.resolution == 3);
  CHECK(config.seed == 5);
  Json again = serialize_config(config);
  CHECK(again == j);
  ExperimentConfig config2 = parse_config(again);
  CHECK(config2.hash() == config.hash());
}

TEST_CASE("resolution must be a multiple of M") {
  Json j = minimal_config();
  j["resolution"] = 4;
  try {
    parse_config(j);
    FAIL("expected ConfigInvalid");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigInvalid);
    CHECK(std::string(e.what()).find("multiple of M") != std::string::npos);
  }
}

TEST_CASE("unknown observable symbol is rejected") {
  Json j = minimal_config();
  j["observable"][0]["symbol"] = "zz";
  CHECK_THROWS_AS(parse_config(j), Error);
}

TEST_CASE("missing map for a symbol is rejected with the field name") {
  Json j = minimal_config();
  j["maps"].erase("b");
  try {
    parse_config(j);
    FAIL("expected ConfigInvalid");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("maps.b") != std::string::npos);
  }
}

TEST_CASE("coboundary observable kind builds through the toolkit") {
  Json j = minimal_config();
  j["observable"] = Json::parse(R"({"kind": "coboundary", "r": {"values": [0.5, -0.25, 0.1], "N": 3}})");
  ExperimentConfig config = parse_config(j);
  Workspace ws = Workspace::build(config);
  VarianceResult var = ws.system->asymptotic_variance(ws.observable, 40);
  CHECK(std::abs(var.s2) < 1e-8);
}

TEST_CASE("workspace centers observables by default") {
  ExperimentConfig config = parse_config(minimal_config());
  Workspace ws = Workspace::build(config);
  CHECK(std::abs(ws.system->expectation(ws.observable)) < 1e-12);
}

TEST_CASE("experiment parameters fall back to defaults") {
  ExperimentConfig config = parse_config(minimal_config());
  CHECK(config.param("clt", "count", 12345.0) == 12345.0);
  Json j = minimal_config();
  j["experiments"]["clt"]["count"] = 777;
  ExperimentConfig config2 = parse_config(j);
  CHECK(config2.param("clt", "count", 12345.0) == 777.0);
}
