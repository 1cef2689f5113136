#include "degenlap/setup.hpp"

#include <cmath>
#include <sstream>

#include "degenlap/error.hpp"

namespace degenlap::setup {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

weights::WeightProfile make_profile(const config::Config& cfg) {
  const std::string family = cfg.get_string("weight.family", "uniform");
  const double rho0 = cfg.get_double("weight.rho0", 0.5);
  auto profile = [&] {
    if (family == "uniform") {
      return weights::WeightProfile::uniform(cfg.get_double("weight.c", 1.0), rho0);
    }
    if (family == "power") {
      return weights::WeightProfile::power(cfg.get_double("weight.c", 1.0),
                                           cfg.get_double("weight.alpha", 0.0), rho0);
    }
    if (family == "table") {
      return weights::WeightProfile::table(cfg.get_list("weight.t"), cfg.get_list("weight.a"),
                                           rho0);
    }
    throw Error(ErrorCode::ConfigError, "weight.family must be uniform, power or table");
  }();
  if (const auto floor = cfg.find_double("weight.floor")) profile.with_interior_floor(*floor);
  return profile;
}

geometry::DomainGeometry make_geometry(const config::Config& cfg, double rho0) {
  const std::string kind = cfg.get_string("geometry.kind", "interval");
  const double r0 = cfg.get_double("geometry.rho0", rho0);
  const int N = static_cast<int>(cfg.get_int("geometry.N", 3));
  if (kind == "interval") return geometry::DomainGeometry::interval(cfg.get_double("geometry.L", 1.0), r0);
  if (kind == "ball") return geometry::DomainGeometry::ball(cfg.get_double("geometry.R", 1.0), N, r0);
  if (kind == "annulus") {
    return geometry::DomainGeometry::annulus(cfg.get_double("geometry.R_in", 1.0),
                                             cfg.get_double("geometry.R_out", 2.0), N, r0);
  }
  if (kind == "annulus-inner") {
    return geometry::DomainGeometry::annulus_inner_collar(cfg.get_double("geometry.R_in", 1.0), N,
                                                          r0);
  }
  if (kind == "annulus-outer") {
    return geometry::DomainGeometry::annulus_outer_collar(cfg.get_double("geometry.R_out", 2.0),
                                                          N, r0);
  }
  throw Error(ErrorCode::ConfigError,
              "geometry.kind must be interval, ball, annulus, annulus-inner or annulus-outer");
}

weights::CoefficientB make_b(const config::Config& cfg, double rho0) {
  const std::string family = cfg.get_string("b.family", "uniform");
  const double k = cfg.get_double("b.k", 1.0);
  const double c1 = cfg.get_double("b.c1", 1.0);
  const double c2 = cfg.get_double("b.c2", 1.0);
  if (family == "uniform") return weights::CoefficientB::uniform(k, c1, c2, rho0);
  if (family == "power") {
    return weights::CoefficientB::power(k, cfg.get_double("b.exponent", 0.0), c1, c2, rho0);
  }
  throw Error(ErrorCode::ConfigError, "b.family must be uniform or power");
}

// k z^e - shift, with its description.
barriers::Scalar power_family(double k, double e, double shift) {
  return [k, e, shift](double z) { return k * std::pow(std::max(z, 0.0), e) - shift; };
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "problem.p", "problem.N", "problem.s", "problem.q",
      "weight.family", "weight.c", "weight.alpha", "weight.rho0", "weight.floor", "weight.t",
      "weight.a",
      "geometry.kind", "geometry.L", "geometry.R", "geometry.R_in", "geometry.R_out",
      "geometry.N", "geometry.rho0",
      "b.family", "b.k", "b.exponent", "b.c1", "b.c2",
      "nonlinearity.family", "nonlinearity.k", "nonlinearity.exponent", "nonlinearity.shift",
      "nonlinearity.value", "nonlinearity.amplitude",
      "minorant.family", "minorant.k", "minorant.exponent", "minorant.shift",
      "subsolution.sigma", "subsolution.beta", "subsolution.epsilon", "subsolution.rho1",
      "subsolution.coupling",
      "solver.cells", "solver.grading_ratio", "solver.order", "solver.theta", "solver.tol",
      "solver.max_iter", "solver.lambda",
      "psi.cells", "psi.margin",
      "sweep.lambda_min", "sweep.lambda_max", "sweep.factor",
      "verify.scenarios", "verify.seed"};
  return keys;
}

barriers::NonlinearitySpec make_nonlinearity(const config::Config& cfg, double p,
                                             std::string* text) {
  const std::string family = cfg.get_string("nonlinearity.family", "power");
  if (family == "constant") {
    const double v = cfg.get_double("nonlinearity.value", -1.0);
    if (text) *text = "f(z) = " + num(v);
    return barriers::NonlinearitySpec([v](double) { return v; });
  }
  if (family == "sine") {
    const double amp = cfg.get_double("nonlinearity.amplitude", 1.0);
    const double shift = cfg.get_double("nonlinearity.shift", 0.5);
    if (text) *text = "f(z) = " + num(amp) + " sin z - " + num(shift);
    return barriers::NonlinearitySpec(
        [amp, shift](double z) { return amp * std::sin(z) - shift; });
  }
  if (family != "power") {
    throw Error(ErrorCode::ConfigError, "nonlinearity.family must be power, constant or sine");
  }
  const double k = cfg.get_double("nonlinearity.k", 1.0);
  const double e = cfg.get_double("nonlinearity.exponent", 0.5 * (p - 1.0));
  const double shift = cfg.get_double("nonlinearity.shift", 1.0);
  if (text) *text = "f(z) = " + num(k) + " z^" + num(e) + " - " + num(shift);
  const std::string mfam = cfg.get_string("minorant.family", "power");
  if (mfam == "none") return barriers::NonlinearitySpec(power_family(k, e, shift));
  if (mfam != "power") throw Error(ErrorCode::ConfigError, "minorant.family must be power or none");
  const double mk = cfg.get_double("minorant.k", k);
  const double me = cfg.get_double("minorant.exponent", e);
  const double ms = cfg.get_double("minorant.shift", shift);
  if (text) *text += "; f_tilde(z) = " + num(mk) + " z^" + num(me) + " - " + num(ms);
  return barriers::NonlinearitySpec(power_family(k, e, shift), power_family(mk, me, ms), mk, me);
}

Setup make_setup(const config::Config& cfg) {
  cfg.require_known(known_keys());
  const double p = cfg.get_double("problem.p", 2.0);
  if (!(p > 1.0)) throw Error(ErrorCode::ConfigError, "problem.p must be > 1");
  auto profile = make_profile(cfg);
  auto geom = make_geometry(cfg, profile.rho0());
  auto b = make_b(cfg, profile.rho0());
  Setup s{p,
          static_cast<int>(cfg.get_int("problem.N", 3)),
          cfg.get_double("problem.s", 2.0),
          cfg.find_double("problem.q"),
          profile,
          geom,
          b,
          std::nullopt,
          "",
          {},
          {},
          {},
          {}};
  if (cfg.has("nonlinearity.family") || cfg.has("nonlinearity.exponent") ||
      cfg.has("nonlinearity.k") || cfg.has("nonlinearity.shift")) {
    s.nonlinearity = make_nonlinearity(cfg, p, &s.nonlinearity_text);
  }
  const double r = s.nonlinearity ? s.nonlinearity->r() : 1.0;
  s.params.r = r;
  s.params.sigma = cfg.get_double("subsolution.sigma", 0.5 * (1.0 / (p - 1.0) + 1.0 / (p - 1.0 - r)));
  s.params.beta = cfg.get_double("subsolution.beta", 1.0 + 0.5 / (p - 1.0));
  s.params.epsilon = cfg.get_double("subsolution.epsilon", 0.0);
  s.params.rho1 = cfg.get_double("subsolution.rho1", 0.0);
  if (const auto c = cfg.find_double("subsolution.coupling")) s.params.coupling = *c;

  s.resolvent.cells = static_cast<std::size_t>(cfg.get_int("solver.cells", 2048));
  s.resolvent.grading_ratio = cfg.get_double("solver.grading_ratio", 0.7);
  s.resolvent.order = static_cast<std::size_t>(cfg.get_int("solver.order", 8));
  s.iteration.theta = cfg.get_double("solver.theta", 0.5);
  s.iteration.tol = cfg.get_double("solver.tol", 0.0);
  s.iteration.max_iter = static_cast<int>(cfg.get_int("solver.max_iter", 10000));
  s.psi.cells = static_cast<std::size_t>(cfg.get_int("psi.cells", 1000));
  s.psi.margin = cfg.get_double("psi.margin", 1.0);
  if (s.resolvent.cells < 8) throw Error(ErrorCode::ConfigError, "solver.cells must be >= 8");
  return s;
}

}  // namespace degenlap::setup
