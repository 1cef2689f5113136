#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "degenlap/error.hpp"
#include "degenlap/quadrature.hpp"
#include "degenlap/weights.hpp"

using namespace degenlap;
using namespace degenlap::weights;

namespace {

// Midpoint sum of t^{-g} on (eps, rho0) in log-spaced cells, for comparison
// with the closed forms.
double log_midpoint_power(double g, double eps, double rho0, int n) {
  double sum = 0.0;
  const double r = std::pow(rho0 / eps, 1.0 / n);
  double a = eps;
  for (int i = 0; i < n; ++i) {
    const double b = a * r;
    const double m = std::sqrt(a * b);
    sum += std::pow(m, -g) * (b - a);
    a = b;
  }
  return sum;
}

bool failed(const ValidationReport& report, const std::string& fragment) {
  for (const auto& c : report.checks) {
    if (!c.passed && c.name.find(fragment) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("profile evaluation and interior extension") {
  const auto u = WeightProfile::uniform(2.0, 0.5);
  CHECK(u(0.1) == 2.0);
  CHECK(u(3.0) == 2.0);
  const auto pw = WeightProfile::power(1.0, 0.5, 0.25);
  CHECK(pw(0.04) == doctest::Approx(0.2));
  CHECK(pw(1.0) == doctest::Approx(0.5));
  const auto fl = WeightProfile::power(1.0, 0.5, 0.25).with_interior_floor(0.1);
  CHECK(fl.interior() == WeightProfile::Interior::Floor);
  CHECK(fl(1.0) == doctest::Approx(0.1));
  CHECK(pw.inverse_root(0.04, 3.0) == doctest::Approx(1.0 / std::sqrt(0.2)));
  CHECK(pw.singular_exponent(3.0) == doctest::Approx(0.25));
  CHECK(u.singular_exponent(2.0) == 0.0);
}

TEST_CASE("table profiles interpolate in log a") {
  const auto tab = WeightProfile::table({0.1, 0.2, 0.4}, {1.0, 4.0, 16.0}, 0.4);
  CHECK(tab(0.2) == doctest::Approx(4.0));
  CHECK(tab(0.15) == doctest::Approx(2.0));
  CHECK_THROWS_AS(WeightProfile::table({0.1, 0.2}, {1.0, -1.0}, 0.2), Error);
}

TEST_CASE("invalid profiles are rejected") {
  CHECK_THROWS_AS(WeightProfile::uniform(0.0, 1.0), Error);
  CHECK_THROWS_AS(WeightProfile::power(-1.0, 0.5, 1.0), Error);
  CHECK_THROWS_AS(WeightProfile::uniform(1.0, 0.0), Error);
}

TEST_CASE("sobolev exponents by hand") {
  auto [ps, pss] = sobolev_exponents(2.0, 3.0, 3);
  CHECK(ps == doctest::Approx(1.5));
  CHECK(pss == doctest::Approx(3.0));
  CHECK(pss < 3.0 * 2.0 / (3.0 - 2.0));
  auto [ps2, pss2] = sobolev_exponents(3.0, 2.0, 4);
  CHECK(ps2 == doctest::Approx(2.0));
  CHECK(pss2 == doctest::Approx(4.0));
  CHECK(ps2 < 3.0);
  CHECK(3.0 < pss2);
  const auto set = ExponentSet::make(2.0, 3, 3.0);
  CHECK(set.p_s == doctest::Approx(1.5));
  CHECK(set.p_s_star == doctest::Approx(3.0));
}

TEST_CASE("exponent constraints") {
  CHECK_THROWS_AS(sobolev_exponents(1.0, 3.0, 3), Error);
  CHECK_THROWS_AS(sobolev_exponents(3.0, 3.0, 3), Error);
  CHECK_THROWS_AS(sobolev_exponents(2.0, 1.5, 3), Error);  // s = N/p
  CHECK_THROWS_AS(sobolev_exponents(1.5, 2.0, 3), Error);  // s = 1/(p-1)
  try {
    sobolev_exponents(2.0, 1.0, 3);
    FAIL("expected InvalidExponents");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidExponents);
  }
}

TEST_CASE("weight validation") {
  const auto ok = validate_weight(WeightProfile::uniform(1.0, 1.0), ExponentSet::make(2.0, 3, 2.0));
  CHECK(ok.valid);
  CHECK_NOTHROW(ok.raise_if_invalid());

  // alpha s = 0.9 < 1 for a = t^{1/2}, s = 1.8; p = 3 needs N > 3.
  const auto half = validate_weight(WeightProfile::power(1.0, 0.5, 1.0),
                                    ExponentSet::make(3.0, 4, 1.8));
  CHECK(half.valid);
  CHECK_THROWS_AS(ExponentSet::make(3.0, 2, 1.8), Error);

  // t^{-2} is not in L^{1.5}.
  const auto sq = validate_weight(WeightProfile::power(1.0, 2.0, 1.0),
                                  ExponentSet::make(2.0, 3, 1.5 + 1e-9));
  CHECK_FALSE(sq.valid);
  CHECK(failed(sq, "L^s"));
  CHECK_THROWS_AS(sq.raise_if_invalid(), Error);
}

TEST_CASE("weighted distance closed forms") {
  CHECK(weighted_distance(WeightProfile::uniform(1.0, 1.0), 2.0, 0.3) == doctest::Approx(0.3));
  CHECK(weighted_distance(WeightProfile::uniform(1.0, 1.0), 4.0, 0.7) == doctest::Approx(0.7));
  CHECK(weighted_distance(WeightProfile::power(1.0, 0.5, 1.0), 2.0, 0.36) ==
        doctest::Approx(1.2).epsilon(1e-12));
  CHECK(weighted_distance(WeightProfile::power(1.0, 1.0, 1.0), 3.0, 0.25) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // Against an independent midpoint sum, with the (0, eps) tail added exactly.
  const double g = 0.5, eps = 1e-10;
  const double tail = std::pow(eps, 1.0 - g) / (1.0 - g);
  const double ref = log_midpoint_power(g, eps, 0.8, 200000) + tail;
  CHECK(weighted_distance(WeightProfile::power(1.0, 1.0, 1.0), 3.0, 0.8) ==
        doctest::Approx(ref).epsilon(1e-8));
}

TEST_CASE("table weighted distance matches the power closed form") {
  std::vector<double> t, a;
  for (int i = 0; i <= 400; ++i) {
    const double x = 1e-6 * std::pow(1e6, i / 400.0);
    t.push_back(x);
    a.push_back(x);
  }
  const auto tab = WeightProfile::table(t, a, 1.0);
  WeightedDistance d(tab, 3.0);
  CHECK(d(0.25) - d(0.01) == doctest::Approx(0.8).epsilon(1e-4));
  CHECK(d(1.0) - d(0.25) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK_THROWS_AS((void)d(1.5), Error);
}

TEST_CASE("collar integrals") {
  CHECK(collar_integral([](double t) { return 1.0 / std::sqrt(t); }, 1.0, 0.5) ==
        doctest::Approx(2.0).epsilon(1e-9));
  CHECK(collar_integral([](double t) { return std::pow(t, -0.9); }, 1.0, 0.9) ==
        doctest::Approx(10.0).epsilon(1e-8));
  CHECK(std::isinf(collar_integral([](double t) { return 1.0 / (t * t); }, 1.0, 2.0)));
}

TEST_CASE("coefficient envelope") {
  const ExponentSet e = ExponentSet::make(2.0, 3, 2.0);
  const auto flat = validate_b(CoefficientB::uniform(1.0, 0.5, 2.0, 1.0),
                               WeightProfile::uniform(1.0, 1.0), e);
  CHECK(flat.valid);
  CHECK(flat.rho1 == doctest::Approx(1.0));

  // a = t, p = 2: a^{-1} = t^{-1}; b = t^{-1/2} falls below c1 t^{-1}.
  const auto lin = WeightProfile::power(1.0, 1.0, 1.0);
  std::string why;
  CHECK(envelope_radius(CoefficientB::power(1.0, -0.5, 1.0, 3.0, 1.0), lin, 2.0, &why) == 0.0);
  CHECK_FALSE(why.empty());
  CHECK(envelope_radius(CoefficientB::power(2.0, -1.0, 1.0, 3.0, 1.0), lin, 2.0) ==
        doctest::Approx(1.0));

  // c1 > c2 is an argument error; b continues beyond rho0.
  CHECK_THROWS_AS(validate_b(CoefficientB::uniform(1.0, 2.0, 1.0, 1.0),
                             WeightProfile::uniform(1.0, 1.0), e),
                  Error);
  CHECK(CoefficientB::power(2.0, -1.0, 1.0, 3.0, 0.5)(2.0) == doctest::Approx(4.0));
}
