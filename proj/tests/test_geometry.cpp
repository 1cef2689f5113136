#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "degenlap/error.hpp"
#include "degenlap/geometry.hpp"

using namespace degenlap;
using namespace degenlap::geometry;

TEST_CASE("jacobians of the closed-form kinds") {
  const auto iv = DomainGeometry::interval(1.0, 0.4);
  CHECK(iv.components().size() == 2);
  CHECK(iv.jacobian(0, 0.3) == 1.0);
  CHECK(iv.jacobian(1, 0.1) == 1.0);

  const auto ball = DomainGeometry::ball(1.0, 3, 0.5);
  CHECK(ball.jacobian(0, 0.5) == doctest::Approx(0.25));
  const auto ann = DomainGeometry::annulus(1.0, 2.0, 3, 0.5);
  CHECK(ann.jacobian(0, 0.5) == doctest::Approx(2.25));
  CHECK(ann.jacobian(1, 0.5) == doctest::Approx(2.25));
  CHECK(ann.jacobian(1, 0.25) == doctest::Approx(1.75 * 1.75));
  CHECK_THROWS_AS((void)ball.jacobian(0, 0.6), Error);
}

TEST_CASE("log-jacobian derivative against finite differences") {
  const auto ann = DomainGeometry::annulus(1.0, 2.0, 3, 0.5);
  for (double y : {0.05, 0.2, 0.45}) {
    for (std::size_t c : {0u, 1u}) {
      const double h = 1e-5;
      const double fd =
          (std::log(ann.jacobian(c, y + h)) - std::log(ann.jacobian(c, y - h))) / (2.0 * h);
      CHECK(ann.dlog_jacobian(c, y) == doctest::Approx(fd).epsilon(1e-8));
    }
  }
  const auto col = DomainGeometry::collar(
      "quad", [](double y) { return 1.0 + y * y; }, 0.5, 1.0);
  CHECK(col.dlog_jacobian(0, 0.3) == doctest::Approx(0.6 / 1.09).epsilon(1e-7));
}

TEST_CASE("curvature constants") {
  const auto iv = DomainGeometry::interval(1.0, 0.4).lambda_constants(0.4);
  CHECK(iv.lambda_abs == 0.0);
  CHECK(iv.lambda_min == 0.0);
  CHECK(iv.mean_curvature_sign == CurvatureSign::Nonnegative);

  const auto ball = DomainGeometry::ball(1.0, 3, 0.5).lambda_constants(0.5);
  CHECK(ball.lambda_abs == doctest::Approx(4.0));
  CHECK(ball.lambda_min == doctest::Approx(-4.0));
  CHECK(ball.mean_curvature_sign != CurvatureSign::Nonnegative);

  const auto inner = DomainGeometry::annulus_inner_collar(1.0, 3, 0.5).lambda_constants(0.5);
  CHECK(inner.lambda_min == doctest::Approx(4.0 / 3.0));
  CHECK(inner.lambda_max == doctest::Approx(2.0));
  CHECK(inner.mean_curvature_sign == CurvatureSign::Nonnegative);

  const auto ann = DomainGeometry::annulus(1.0, 2.0, 3, 0.5);
  const auto only_inner = ann.lambda_constants(0.5, 0);
  CHECK(only_inner.lambda_min == doctest::Approx(4.0 / 3.0));
  const auto both = ann.lambda_constants(0.5);
  CHECK(both.lambda_min < 0.0);
  CHECK(both.mean_curvature_sign == CurvatureSign::Indefinite);
}

TEST_CASE("nearest boundary component") {
  const auto iv = DomainGeometry::interval(1.0, 0.4);
  auto p = iv.dist_to_boundary(0.3);
  CHECK(p.component == 0);
  CHECK(p.y == doctest::Approx(0.3));
  p = iv.dist_to_boundary(0.9);
  CHECK(p.component == 1);
  CHECK(p.y == doctest::Approx(0.1));

  const auto ball = DomainGeometry::ball(1.0, 3, 0.5);
  p = ball.dist_to_boundary(0.6);
  CHECK(ball.components()[p.component].name == "sphere");
  CHECK(p.y == doctest::Approx(0.4));

  const auto ann = DomainGeometry::annulus(1.0, 2.0, 3, 0.5);
  p = ann.dist_to_boundary(1.75);
  CHECK(ann.components()[p.component].name == "outer");
  CHECK(p.y == doctest::Approx(0.25));
}

TEST_CASE("reduction data") {
  const auto ball = DomainGeometry::ball(2.0, 3, 0.5);
  CHECK(ball.lo() == 0.0);
  CHECK(ball.hi() == 2.0);
  CHECK(ball.lo_condition() == EndCondition::ZeroFlux);
  CHECK(ball.hi_condition() == EndCondition::Dirichlet);
  CHECK(ball.measure(0.5) == doctest::Approx(0.25));
  CHECK(ball.max_dist() == doctest::Approx(2.0));
  CHECK(ball.dist_from_offsets(1.0 - 1e-20, 1e-20) == 1e-20);
  CHECK(ball.dist_slope(1.5, 0.5) == -1.0);

  const auto iv = DomainGeometry::interval(1.0, 0.4);
  CHECK(iv.measure(0.7) == 1.0);
  CHECK(iv.max_dist() == doctest::Approx(0.5));
  CHECK(iv.dist_slope(0.2, 0.8) == 1.0);
  CHECK(iv.dist_slope(0.8, 0.2) == -1.0);

  const auto col = DomainGeometry::annulus_outer_collar(2.0, 3, 0.5);
  CHECK(col.kind() == Kind::Collar);
  CHECK(col.hi_condition() == EndCondition::ZeroFlux);
  CHECK(col.jacobian(0, 0.5) == doctest::Approx(2.25));
}

TEST_CASE("inadmissible geometry arguments") {
  CHECK_THROWS_AS(DomainGeometry::interval(1.0, 0.6), Error);
  CHECK_THROWS_AS(DomainGeometry::ball(1.0, 3, 1.0), Error);
  CHECK_THROWS_AS(DomainGeometry::annulus(2.0, 1.0, 3, 0.1), Error);
  CHECK_THROWS_AS(DomainGeometry::ball(1.0, 1, 0.5), Error);
}
