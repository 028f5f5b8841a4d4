#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "icevp/forcing.hpp"
#include "icevp/random.hpp"

using namespace icevp;

namespace {

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "icevp_forcing";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_file(const std::string& name, const std::string& content) {
  const auto path = temp_dir() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

bool message_contains(const std::exception& e, const std::string& needle) {
  return std::string(e.what()).find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("perp and rotation") {
  CHECK(perp({1.0, 2.0}) == Vec2{-2.0, 1.0});
  CHECK(dot(perp({3.0, -4.0}), {3.0, -4.0}) == 0.0);

  const Vec2 r = rotate_theta({1.0, 0.0}, std::numbers::pi / 2.0);
  CHECK(std::abs(r.x) < 1e-15);
  CHECK(r.y == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rotate_theta({2.0, -3.0}, 0.0) == Vec2{2.0, -3.0});
}

TEST_CASE("pointwise ocean drag") {
  // theta = 0, u = 0: plain quadratic drag c |U| U.
  CHECK(ocean_drag_pointwise({1.0, 0.0}, {0.0, 0.0}, 2.0, 0.0) ==
        Vec2{2.0, 0.0});
  CHECK(ocean_drag_pointwise({0.0, 0.0}, {0.0, -2.0}, 0.5, 0.0) ==
        Vec2{0.0, 2.0});
  // Equal velocities: no drag for any angle.
  CHECK(ocean_drag_pointwise({0.3, 0.7}, {0.3, 0.7}, 5.0, 0.5) ==
        Vec2{0.0, 0.0});
  // Turning angle rotates the drag without changing its magnitude.
  const Vec2 d = ocean_drag_pointwise({3.0, 4.0}, {0.0, 0.0}, 1.0,
                                      std::numbers::pi / 4.0);
  CHECK(norm(d) == doctest::Approx(25.0).epsilon(1e-14));
}

TEST_CASE("drag integrand hand values and symmetry") {
  // b = 0 leaves only the cos(theta) |a|^3 term.
  CHECK(drag_monotone_integrand({1.0, 0.0}, {0.0, 0.0}, 0.3) ==
        doctest::Approx(std::cos(0.3)).epsilon(1e-15));
  // a = b: 2 cos(theta) |a|^3 - 2 |a| (a_theta . a) = 2|a|^3 cos t - 2 |a|^3 cos t = 0.
  CHECK(std::abs(drag_monotone_integrand({2.0, 1.0}, {2.0, 1.0}, 0.4)) <
        1e-13);

  Rng rng(31);
  for (int i = 0; i < 300; ++i) {
    const Vec2 a{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
    const Vec2 b{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
    const double theta = rng.uniform(0.0, std::numbers::pi / 4.0);
    const double lhs = drag_monotone_integrand(a, b, theta);
    const double rhs = drag_monotone_integrand(b, a, theta);
    const double scale =
        std::pow(norm(a), 3) + std::pow(norm(b), 3) + 1e-300;
    CHECK(std::abs(lhs - rhs) <= 1e-13 * scale);
    // Claimed sign for theta in [0, pi/4].
    CHECK(lhs >= -1e-13 * scale);
  }
}

TEST_CASE("integrand matches the rescaled cubic route") {
  // With a = (1,0), b = gamma (cos phi, sin phi), phi in (0, pi):
  //   integrand = cos(theta) gamma^3 p(1/gamma, cos phi, theta).
  Rng rng(37);
  for (int i = 0; i < 400; ++i) {
    const double phi = rng.uniform(0.05, std::numbers::pi - 0.05);
    const double gamma = rng.log_uniform(1e-2, 1e2);
    const double theta = rng.uniform(0.0, std::numbers::pi / 4.0);
    const Vec2 a{1.0, 0.0};
    const Vec2 b{gamma * std::cos(phi), gamma * std::sin(phi)};
    const double lhs = drag_monotone_integrand(a, b, theta);
    const double rhs = std::cos(theta) * gamma * gamma * gamma *
                       rescaled_p(1.0 / gamma, std::cos(phi), theta);
    const double scale = 1.0 + gamma * gamma * gamma;
    CHECK(std::abs(lhs - rhs) <= 1e-12 * scale);
  }
}

TEST_CASE("discriminant anchors") {
  CHECK(discriminant_d(0.0, 0.5) == -35.75);
  CHECK(discriminant_d(0.0, 1.0) == -44.0);
  for (double T : {0.0, 0.25, 0.5, 0.75, 1.0})
    CHECK(discriminant_d(1.0, T) == 0.0);
  // S = -1 (antiparallel): d = 1 - 8 + 18 - 27 = -16.
  CHECK(discriminant_d(-1.0, 0.7) == -16.0);
}

TEST_CASE("scalar series interpolation") {
  const auto s = NodalScalarSeries::from_slices({0.0, 10.0},
                                                {{1.0, 2.0}, {3.0, 6.0}});
  CHECK_FALSE(s.is_uniform());
  CHECK(s.node_count() == 2);
  CHECK(s.eval(0.0, 1) == 2.0);
  CHECK(s.eval(10.0, 1) == 6.0);
  CHECK(s.eval(5.0, 1) == 4.0);
  CHECK(s.eval(2.5, 0) == 1.5);
  CHECK(s.min_stored() == 1.0);

  const auto all = s.eval_all(5.0, 2);
  CHECK(all[0] == 2.0);
  CHECK(all[1] == 4.0);

  CHECK_THROWS_AS(s.eval(-0.001, 0), ConfigError);
  CHECK_THROWS_AS(s.eval(10.001, 0), ConfigError);
  CHECK_THROWS_AS(s.eval(5.0, 2), ConfigError);
  CHECK_THROWS_AS(s.eval_all(5.0, 3), ConfigError);

  const auto u = NodalScalarSeries::uniform(7.0);
  CHECK(u.is_uniform());
  CHECK(u.node_count() == -1);
  CHECK(u.eval(-1e9, 0) == 7.0);
  CHECK(u.eval_all(3.0, 4) == std::vector<double>(4, 7.0));

  // A single slice is constant in time: no extrapolation limits.
  const auto one = NodalScalarSeries::from_slices({2.0}, {{9.0}});
  CHECK(one.eval(-50.0, 0) == 9.0);
  CHECK(one.eval(50.0, 0) == 9.0);
}

TEST_CASE("series construction errors") {
  CHECK_THROWS_AS(NodalScalarSeries::from_slices({}, {}), ConfigError);
  CHECK_THROWS_AS(NodalScalarSeries::from_slices({0.0, 0.0}, {{1.0}, {2.0}}),
                  ConfigError);
  CHECK_THROWS_AS(NodalScalarSeries::from_slices({1.0, 0.0}, {{1.0}, {2.0}}),
                  ConfigError);
  CHECK_THROWS_AS(NodalScalarSeries::from_slices({0.0}, {{1.0}, {2.0}}),
                  ConfigError);
  CHECK_THROWS_AS(NodalScalarSeries::from_slices({0.0, 1.0}, {{1.0}, {2.0, 3.0}}),
                  ConfigError);
  CHECK_THROWS_AS(NodalScalarSeries::from_slices({0.0}, {{}}), ConfigError);
}

TEST_CASE("vector series and shifted copies") {
  const auto s = NodalVectorSeries::from_slices(
      {0.0, 2.0}, {{{1.0, 0.0}, {0.0, 4.0}}, {{3.0, 2.0}, {2.0, 0.0}}});
  CHECK(s.node_count() == 2);
  CHECK(s.eval(1.0, 0) == Vec2{2.0, 1.0});
  CHECK(s.eval(1.0, 1) == Vec2{1.0, 2.0});

  const auto moved = s.shifted({10.0, -1.0});
  CHECK(moved.eval(1.0, 0) == Vec2{12.0, 0.0});
  CHECK(moved.eval(0.0, 1) == Vec2{10.0, 3.0});

  const auto u = NodalVectorSeries::uniform({0.5, 0.5}).shifted({0.5, -0.5});
  CHECK(u.is_uniform());
  CHECK(u.eval(99.0, 0) == Vec2{1.0, 0.0});
}

TEST_CASE("vector CSV round trip") {
  const std::string path = write_file("ok_vec.csv",
                                      "t,node_id,vx,vy\n"
                                      "0, 0, 1.5, -2.0\n"
                                      "0, 1, 0.25, 0.5\n"
                                      "10, 1, 1.25, 2.5\n"
                                      "10, 0, 2.5, -1.0\n");
  const auto s = load_vector_series_csv(path);
  CHECK(s.node_count() == 2);
  CHECK(s.eval(0.0, 0) == Vec2{1.5, -2.0});
  CHECK(s.eval(0.0, 1) == Vec2{0.25, 0.5});
  CHECK(s.eval(10.0, 0) == Vec2{2.5, -1.0});
  CHECK(s.eval(5.0, 0) == Vec2{2.0, -1.5});
}

TEST_CASE("scalar CSV round trip") {
  const std::string path = write_file("ok_scal.csv",
                                      "t,node_id,val\n"
                                      "0,0,7.5\n");
  const auto s = load_scalar_series_csv(path);
  CHECK(s.node_count() == 1);
  CHECK(s.eval(123.0, 0) == 7.5);  // single slice: time-independent
}

TEST_CASE("CSV error reporting carries file and line") {
  CHECK_THROWS_WITH_AS(
      load_vector_series_csv((temp_dir() / "missing.csv").string()),
      doctest::Contains("cannot open"), ConfigError);

  try {
    load_vector_series_csv(write_file("bad_header.csv", "time,node,vx,vy\n"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(message_contains(e, ":1: header must be \"t,node_id,vx,vy\""));
  }

  try {
    load_vector_series_csv(write_file("bad_num.csv",
                                      "t,node_id,vx,vy\n"
                                      "0,0,1,2\n"
                                      "1,0,abc,2\n"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(message_contains(e, ":3: not a number: \"abc\""));
  }

  try {
    load_vector_series_csv(write_file("bad_cols.csv",
                                      "t,node_id,vx,vy\n"
                                      "0,0,1\n"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(message_contains(e, ":2: expected 4 columns"));
  }

  CHECK_THROWS_WITH_AS(
      load_vector_series_csv(write_file("dup_node.csv",
                                        "t,node_id,vx,vy\n"
                                        "0,0,1,2\n"
                                        "0,0,3,4\n")),
      doctest::Contains("exactly once"), ConfigError);

  CHECK_THROWS_WITH_AS(
      load_vector_series_csv(write_file("bad_order.csv",
                                        "t,node_id,vx,vy\n"
                                        "5,0,1,2\n"
                                        "3,0,3,4\n")),
      doctest::Contains("strictly ascending"), ConfigError);

  CHECK_THROWS_WITH_AS(
      load_scalar_series_csv(write_file("neg_node.csv",
                                        "t,node_id,val\n"
                                        "0,-1,3\n")),
      doctest::Contains("nonnegative integer"), ConfigError);

  CHECK_THROWS_WITH_AS(
      load_scalar_series_csv(write_file("only_header.csv", "t,node_id,val\n")),
      doctest::Contains("no data rows"), ConfigError);

  CHECK_THROWS_WITH_AS(load_scalar_series_csv(write_file("empty.csv", "")),
                       doctest::Contains("empty forcing file"), ConfigError);
}

TEST_CASE("body load combines wind, tilt and extra force") {
  BodyForcing body;
  body.tau_atm = NodalVectorSeries::uniform({1.0, 0.0});
  body.grad_H = NodalVectorSeries::uniform({0.015625, 0.0});  // dyadic slope
  body.f_extra = NodalVectorSeries::uniform({0.0, 2.0});
  PhysParams phys;
  phys.m = 2.0;
  phys.g = 10.0;
  const auto load = body_load(0.0, body, phys, 3);
  REQUIRE(load.size() == 3);
  for (const Vec2& v : load) CHECK(v == Vec2{0.6875, 2.0});
}

TEST_CASE("forcing validation") {
  OceanForcing ocean;
  ocean.c_ocean = 1.0;
  ocean.theta = std::numbers::pi / 4.0;
  CHECK_NOTHROW(ocean.validate());
  ocean.theta = std::numbers::pi / 4.0 + 0.01;
  CHECK_THROWS_AS(ocean.validate(), ConfigError);
  ocean.theta = -0.01;
  CHECK_THROWS_AS(ocean.validate(), ConfigError);
  ocean.theta = 0.0;
  ocean.c_ocean = -1.0;
  CHECK_THROWS_AS(ocean.validate(), ConfigError);

  PhysParams phys;
  phys.m = 0.0;
  CHECK_THROWS_AS(phys.validate(), ConfigError);
  phys.m = 1.0;
  phys.g = -9.81;
  CHECK_THROWS_AS(phys.validate(), ConfigError);

  IceStrengthField ps;
  ps.P = NodalScalarSeries::uniform(0.5);
  ps.P_floor = 1.0;
  CHECK_THROWS_AS(ps.validate(), ConfigError);
  ps.P_floor = 0.0;
  CHECK_THROWS_AS(ps.validate(), ConfigError);
  ps.P = NodalScalarSeries::uniform(2.0);
  ps.P_floor = 1.0;
  CHECK_NOTHROW(ps.validate());
}
