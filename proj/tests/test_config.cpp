#include <fstream>

#include "doctest.h"
#include "nsstat/config.hpp"

using namespace nsstat;
using nlohmann::json;

namespace {

std::vector<Violation> violations_of(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigViolations& e) {
    return e.violations();
  }
  return {};
}

bool has_message(const std::vector<Violation>& v, const std::string& needle) {
  for (const auto& x : v)
    if (x.message.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
  const auto c = parse_config(json::object());
  CHECK(c.schema_version == kSchemaVersion);
  CHECK(c.members == 8);
  CHECK(c.grid.n == 32);
  CHECK(c.analysis.directions == 64);
  const auto echoed = parse_config(c.to_json());
  CHECK(echoed.to_json() == c.to_json());
  CHECK(echoed.hash() == c.hash());
}

TEST_CASE("negative viscosity is reported with its bound") {
  const auto v = violations_of({{"solver", {{"nu", -1.0}}}});
  REQUIRE(v.size() == 1);
  CHECK(v[0].path == "solver.nu");
  CHECK(v[0].message == "nu must be ≥ 0");
}

TEST_CASE("spectral band beyond n/3 violates the dealias rule") {
  const auto v = violations_of({{"grid", {{"n", 32}}}, {"measure", {{"k_max", 12}}}});
  REQUIRE(v.size() == 1);
  CHECK(v[0].path == "measure.k_max");
  CHECK(has_message(v, "dealias"));
  CHECK(has_message(v, "n/3 = 10"));
}

TEST_CASE("every violation is collected") {
  const json bad = {{"grid", {{"n", 48}, {"dim", 4}}},
                    {"solver", {{"nu", -1.0}, {"cfl", "fast"}, {"extra", 1}}},
                    {"colour", "blue"},
                    {"vv", {{"nus", {0.01, 0.02}}}}};
  const auto v = violations_of(bad);
  CHECK(v.size() >= 5);
  CHECK(has_message(v, "unknown key 'colour'"));
  CHECK(has_message(v, "unknown key 'extra'"));
  CHECK(has_message(v, "dim must be one of 2, 3"));
  CHECK(has_message(v, "cfl must be of type number"));
  CHECK(has_message(v, "nu must be ≥ 0"));
}

TEST_CASE("cross-field rules") {
  CHECK(has_message(violations_of({{"grid", {{"n", 48}}}}), "power of two"));
  CHECK(has_message(violations_of({{"vv", {{"nus", {0.01, 0.02}}}}}), "non-increasing"));
  CHECK(violations_of({{"vv", {{"nus", {0.01, 0.01}}}}}).empty());
  CHECK(has_message(violations_of({{"analysis", {{"r_min", 1.0}, {"r_max", 0.5}}}}), "r_min must be < r_max"));
  CHECK(has_message(violations_of({{"measure", {{"kind", "perturbed_base"}}}}), "base flow"));
  CHECK(has_message(violations_of({{"analysis", {{"r_max", 4.0}}}}), "must be ≤ 3.14159"));
}

TEST_CASE("violations serialise to JSON") {
  try {
    parse_config(json{{"members", 0}});
    FAIL("expected violation");
  } catch (const ConfigViolations& e) {
    const auto j = e.to_json();
    CHECK(j["error"] == "config_validation");
    CHECK(j["violations"][0]["path"] == "members");
  }
}

TEST_CASE("hash tracks content") {
  auto a = parse_config(json::object());
  auto b = parse_config(json{{"solver", {{"nu", 0.02}}}});
  CHECK(a.hash().size() == 16);
  CHECK(a.hash() != b.hash());
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(provenance(a)["code_version"] == code_version());
}

TEST_CASE("published schema file matches the validator table") {
  std::ifstream in(std::string(NSSTAT_SOURCE_DIR) + "/schema/run_config.schema.json");
  REQUIRE(in.good());
  const auto file = json::parse(in);
  CHECK(file == config_schema());
}

TEST_CASE("range and cross-field violations are reported together") {
  const auto v = violations_of({{"solver", {{"nu", -1.0}}}, {"grid", {{"n", 32}}}, {"measure", {{"k_max", 20}}}});
  CHECK(v.size() == 2);
  CHECK(has_message(v, "nu must be ≥ 0"));
  CHECK(has_message(v, "dealiasing band"));
  // A wrong type stops before the cross-field pass.
  const auto t = violations_of({{"grid", {{"n", "x"}}}, {"measure", {{"k_max", 20}}}});
  CHECK(has_message(t, "must be of type integer"));
  CHECK(!has_message(t, "dealiasing band"));
}
