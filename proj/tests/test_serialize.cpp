#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "critlab/errors.hpp"
#include "critlab/serialize.hpp"

using namespace critlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("critlab_serialize_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("doubles round-trip through text") {
  for (double x : {0.1, 1.0 / 3.0, 5.4779041e-7, 1e300}) CHECK(std::stod(fmt_double(x)) == x);
}

TEST_CASE("groups read from nested and flat generators") {
  const Json nested = Json::parse(R"({"dim": 2, "generators": [[[0, -1], [1, 0]]]})");
  const Json flat = Json::parse(R"({"dim": 2, "generators": [[0, -1, 1, 0]]})");
  const auto a = group_from_json(nested);
  const auto b = group_from_json(flat);
  REQUIRE(a.generators.size() == 1);
  CHECK(a.generators[0](0, 1) == -1.0);
  CHECK(a.generators[0](1, 0) == 1.0);
  CHECK((a.generators[0] - b.generators[0]).norm() == 0.0);
  CHECK(close_group(a).order() == 4);
  const auto back = group_from_json(to_json(a));
  CHECK((back.generators[0] - a.generators[0]).norm() == 0.0);

  CHECK_THROWS_AS(group_from_json(Json::parse(R"({"dim": 2, "generators": [[1, 0, 0]]})")), DomainError);
  CHECK_THROWS_AS(group_from_json(Json::parse(R"({"dim": 2, "generators": [[2, 0, 0, 1]]})")), DomainError);
  CHECK_THROWS_AS(group_from_json(Json::parse(R"({"generators": []})")), DomainError);
}

TEST_CASE("orbit report keys") {
  const auto rep = min_orbit_card(close_group(GroupSpec{3, {-Matrix::Identity(3, 3)}}));
  const Json j = to_json(rep);
  CHECK(j.at("l") == 2);
  CHECK(j.at("group_order") == 2);
  CHECK(j.at("complete") == true);
  CHECK(j.at("fix_dim") == 0);

  const auto inf = min_orbit_card(close_group(GroupSpec{2, {plane_rotation(2, 0, 1, 1.0)}}, 100));
  const Json k = to_json(inf);
  CHECK(k.at("l") == "infinite");
  CHECK(k.at("l_lower_bound") == 100);
}

TEST_CASE("energy report keys") {
  EnergyReport r;
  r.level = 2.5;
  r.history = {3.0, 2.5};
  r.method = Method::shooting;
  const Json j = to_json(r);
  CHECK(j.at("level") == 2.5);
  CHECK(j.at("method") == "shooting");
  CHECK(j.at("history").size() == 2);
  CHECK_FALSE(to_json(r, false).contains("history"));
  CHECK(method_name(Method::descent) == "descent");
}

TEST_CASE("bubble configurations from json") {
  const auto dir = scratch("bubbles");
  const Json j = Json::parse(R"({
    "N": 3, "p": 2, "alpha": 2,
    "bubbles": [{"center": [1, 0, 0], "scale": 0.5, "weight": -1,
                 "group": {"dim": 3, "generators": [[-1, 0, 0, 0, -1, 0, 0, 0, -1]]}}]
  })");
  const auto cfg = bubbles_from_json(j, dir);
  CHECK(cfg.dim == 3);
  REQUIRE(cfg.bubbles.size() == 1);
  CHECK(cfg.bubbles[0].bubble.weight == -1.0);
  CHECK(cfg.bubbles[0].bubble.profile.alpha == 2.0);
  CHECK(cfg.bubbles[0].group.order() == 2);
  CHECK_FALSE(cfg.base.has_value());

  // Base profile from a CSV resolved against the directory.
  {
    std::ofstream out(dir / "v0.csv");
    out << "r,value\n0.5,0\n0.75,1\n1,0\n";
  }
  Json withbase = j;
  withbase["base"] = Json{{"file", "v0.csv"}};
  const auto cfg2 = bubbles_from_json(withbase, dir);
  REQUIRE(cfg2.base.has_value());
  CHECK(cfg2.base->size() == 3);

  Json bad = j;
  bad["bubbles"][0]["scale"] = -1.0;
  CHECK_THROWS_AS(bubbles_from_json(bad, dir), DomainError);
  Json badcenter = j;
  badcenter["bubbles"][0]["center"] = Json::array({1, 0});
  CHECK_THROWS_AS(bubbles_from_json(badcenter, dir), DomainError);
}

TEST_CASE("family files") {
  const auto dir = scratch("family");
  const auto fam = build_family(AnnulusSpec{0.25, 1.0, {3, 2.0}}, 2, 128);
  const Json man = write_family(fam, dir);
  CHECK(fs::exists(dir / "omega_1.csv"));
  CHECK(fs::exists(dir / "omega_2.csv"));
  std::ifstream in(dir / "omega_2.csv");
  const auto w = read_csv(in, {3, 2.0});
  REQUIRE(w.size() == fam.omegas[1].size());
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(w[i] == fam.omegas[1][i]);
  CHECK(man.dump().find("common_level") != std::string::npos);
}

TEST_CASE("json files round trip") {
  const auto dir = scratch("json");
  const Json j{{"a", 1.0 / 3.0}, {"b", Json::array({1, 2})}};
  write_json_file(dir / "sub" / "x.json", j);
  CHECK(read_json_file(dir / "sub" / "x.json") == j);
  CHECK_THROWS(read_json_file(dir / "missing.json"));
}
