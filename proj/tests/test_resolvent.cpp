#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "degenlap/error.hpp"
#include "degenlap/geometry.hpp"
#include "degenlap/resolvent.hpp"
#include "degenlap/weights.hpp"

using namespace degenlap;
using namespace degenlap::resolvent;
using degenlap::geometry::DomainGeometry;
using degenlap::weights::WeightProfile;

namespace {

ResolventSpec cells(std::size_t n) {
  ResolventSpec s;
  s.cells = n;
  return s;
}

template <class F>
double sup_error(const Field& w, F exact) {
  double e = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) e = std::max(e, std::abs(w.values[i] - exact(w.x[i])));
  return e;
}

// p = 3, a = 1, g = 1 on (0,1): w' = sqrt(1/2 - x) left of the midpoint.
double torsion_p3(double x) {
  const double h = std::abs(0.5 - x);
  return (2.0 / 3.0) * (std::pow(0.5, 1.5) - std::pow(h, 1.5));
}

// p = 2, a = t^{1/2} on (0, 1/4), 1/2 beyond, g = 1 on (0,1); by symmetry
// w' = (1/2 - x)/a(x) on the left half.
double torsion_sqrt_weight(double x) {
  const double y = std::min(x, 1.0 - x);
  if (y <= 0.25) return std::sqrt(y) - (2.0 / 3.0) * std::pow(y, 1.5);
  const double at_quarter = 0.5 - (2.0 / 3.0) * 0.125;
  return at_quarter + 2.0 * (0.5 * (y - 0.25) - 0.5 * (y * y - 0.0625));
}

}  // namespace

TEST_CASE("inverse flux map") {
  CHECK(p_flux_inverse(0.0, 3.0) == 0.0);
  CHECK(p_flux_inverse(-8.0, 3.0) == doctest::Approx(-2.0 * std::sqrt(2.0)));
  CHECK(p_flux_inverse(4.0, 2.0) == doctest::Approx(4.0));
  CHECK(p_flux_inverse(8.0, 4.0 / 3.0) == doctest::Approx(512.0));
}

TEST_CASE("interval torsion closed forms") {
  const auto a = WeightProfile::uniform(1.0, 0.25);
  auto [w2, r2] = solve_interval(a, 2.0, [](double) { return 1.0; }, 1.0, cells(512));
  CHECK(sup_error(w2, [](double x) { return x * (1.0 - x) / 2.0; }) < 1e-10);
  CHECK(r2.sup_norm == doctest::Approx(0.125).epsilon(1e-9));
  CHECK(r2.residual_weak <= 1e-8);
  CHECK(w2.values.front() == 0.0);
  CHECK(w2.values.back() == 0.0);

  auto [w3, r3] = solve_interval(a, 3.0, [](double) { return 1.0; }, 1.0, cells(512));
  CHECK(sup_error(w3, torsion_p3) < 1e-7);
  CHECK(r3.flux_constant == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(r3.residual_weak <= 1e-8);

  auto [z, rz] = solve_interval(a, 3.0, [](double) { return 0.0; }, 1.0, cells(64));
  CHECK(z.sup_norm() == 0.0);

  auto [wf, rf] = solve_interval(a, 3.0, [](double) { return 1.0; }, 1.0, cells(10000));
  CHECK(std::abs(rf.sup_norm - torsion_p3(0.5)) <= 1e-7);
}

TEST_CASE("degenerate power weight") {
  const auto a = WeightProfile::power(1.0, 0.5, 0.25);
  auto [w, r] = solve_interval(a, 2.0, [](double) { return 1.0; }, 1.0, cells(1024));
  CHECK(sup_error(w, torsion_sqrt_weight) < 1e-8);
  CHECK(r.residual_weak <= 1e-8);
}

TEST_CASE("mesh refinement does not lose accuracy") {
  const auto a = WeightProfile::power(1.0, 0.5, 0.25);
  auto [coarse, rc] = solve_interval(a, 3.0, [](double) { return 1.0; }, 1.0, cells(64));
  auto [fine, rf] = solve_interval(a, 3.0, [](double) { return 1.0; }, 1.0, cells(1024));
  // Reference from a much finer mesh.
  auto [ref, rr] = solve_interval(a, 3.0, [](double) { return 1.0; }, 1.0, cells(8192));
  const double ec = std::abs(rc.sup_norm - rr.sup_norm);
  const double ef = std::abs(rf.sup_norm - rr.sup_norm);
  CHECK(ef <= std::max(0.5 * ec, 1e-12));
}

TEST_CASE("radial torsion") {
  const auto a = WeightProfile::uniform(1.0, 0.5);
  const auto b3 = DomainGeometry::ball(1.0, 3, 0.5);
  auto [u3, r3] = solve_radial(a, 2.0, [](double) { return 1.0; }, b3, cells(1024));
  CHECK(sup_error(u3, [](double r) { return (1.0 - r * r) / 6.0; }) < 1e-9);
  CHECK(u3.values.front() == doctest::Approx(1.0 / 6.0).epsilon(1e-9));

  const auto b2 = DomainGeometry::ball(1.0, 2, 0.5);
  auto [u2, r2] = solve_radial(a, 2.0, [](double) { return 1.0; }, b2, cells(1024));
  CHECK(sup_error(u2, [](double r) { return (1.0 - r * r) / 4.0; }) < 1e-9);

  auto [z, rz] = solve_radial(a, 2.0, [](double) { return 0.0; }, b3, cells(64));
  CHECK(z.sup_norm() == 0.0);
}

TEST_CASE("annulus torsion against the radial closed form") {
  // -(r^2 u')'/r^2 = 1, u(1) = u(2) = 0: u = -r^2/6 - 1/r + 7/6.
  const double a1 = -1.0, a0 = 7.0 / 6.0;
  const auto exact = [&](double r) { return -r * r / 6.0 + a1 / r + a0; };
  REQUIRE(std::abs(exact(1.0)) < 1e-14);
  REQUIRE(std::abs(exact(2.0)) < 1e-14);
  const auto a = WeightProfile::uniform(1.0, 0.5);
  auto [u, r] = solve_radial(a, 2.0, [](double) { return 1.0; },
                             DomainGeometry::annulus(1.0, 2.0, 3, 0.5), cells(1024));
  CHECK(sup_error(u, exact) < 1e-9);
}

TEST_CASE("homogeneity, sign and comparison") {
  const auto a = WeightProfile::power(1.0, 0.3, 0.25);
  const auto geom = DomainGeometry::interval(1.0, 0.25);
  const Discretization disc(a, 3.0, geom, cells(256));
  const auto g = [](double x) { return 1.0 + std::sin(3.0 * x); };
  auto [w, r] = solve(disc, g);
  auto [w8, r8] = solve(disc, [&](double x) { return 8.0 * g(x); });
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(w8.values[i] == doctest::Approx(std::sqrt(8.0) * w.values[i]).epsilon(1e-9));
    CHECK(w.values[i] >= 0.0);
  }
  auto [big, rb] = solve(disc, [&](double x) { return g(x) + x; });
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(w.values[i] <= big.values[i] + 1e-9);
}

TEST_CASE("dispatch and right-hand sides at points") {
  const auto a = WeightProfile::uniform(1.0, 0.25);
  const auto geom = DomainGeometry::interval(1.0, 0.25);
  const Field w = resolvent::resolvent(a, 2.0, [](double) { return 1.0; }, geom, cells(256));
  CHECK(w.sup_norm() == doctest::Approx(0.125).epsilon(1e-9));
  const Discretization disc(a, 2.0, geom, cells(256));
  const auto rhs = disc.sample_points([](double, double) { return 1.0; });
  auto [w2, r] = solve(disc, rhs);
  CHECK(w2.sup_norm() == doctest::Approx(0.125).epsilon(1e-9));
  CHECK(disc.l1_norm(rhs) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(disc.lp_norm(w2, 1.0) == doctest::Approx(1.0 / 12.0).epsilon(1e-8));
}

TEST_CASE("estimate ratios") {
  const auto a = WeightProfile::uniform(1.0, 0.25);
  const Discretization disc(a, 2.0, DomainGeometry::interval(1.0, 0.25), cells(512));
  const auto rhs = disc.sample_points([](double, double) { return 1.0; });
  auto [w, r] = solve(disc, rhs);
  const auto est = resolvent_estimate_check(w, rhs, disc, 0.25);
  CHECK(est.energy_ratio == doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(1e-8));
  CHECK(r.energy_norm == doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(1e-8));

  const auto zero = disc.sample_points([](double, double) { return 0.0; });
  auto [z, rz] = solve(disc, zero);
  const auto ez = resolvent_estimate_check(z, zero, disc, 0.25);
  CHECK(ez.energy_ratio == 0.0);
  CHECK(ez.boundary_ratio == 0.0);

  const Discretization ball(a, 2.0, DomainGeometry::ball(1.0, 3, 0.25), cells(1024));
  const auto one = ball.sample_points([](double, double) { return 1.0; });
  auto [u, ru] = solve(ball, one);
  const auto eb = resolvent_estimate_check(u, one, ball, 0.25);
  CHECK(eb.boundary_quotient == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
}

TEST_CASE("invalid inputs") {
  const auto a = WeightProfile::uniform(1.0, 0.25);
  CHECK_THROWS_AS(solve_interval(a, 1.0, [](double) { return 1.0; }, 1.0), Error);
  CHECK_THROWS_AS(solve_interval(a, 2.0, [](double) { return std::nan(""); }, 1.0, cells(32)),
                  Error);
  try {
    (void)solve_interval(a, 2.0, [](double) { return std::nan(""); }, 1.0, cells(32));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NaNEncountered);
  }
}
