#include "degenlap/verify.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "degenlap/barriers.hpp"
#include "degenlap/comparison.hpp"
#include "degenlap/error.hpp"
#include "degenlap/fixedpoint.hpp"
#include "degenlap/resolvent.hpp"

namespace degenlap::verify {

namespace {

using barriers::BarrierProblem;
using barriers::NonlinearitySpec;
using barriers::SubsolutionParams;
using geometry::DomainGeometry;
using resolvent::Discretization;
using weights::CoefficientB;
using weights::WeightProfile;

class Recorder {
 public:
  explicit Recorder(ScenarioResult& out) : out_(out) {}

  void at_most(const std::string& module, const std::string& name, double value,
               double threshold, std::string detail = {}) {
    add(module, name, value <= threshold, value, threshold, std::move(detail));
  }
  void at_least(const std::string& module, const std::string& name, double value,
                double threshold, std::string detail = {}) {
    add(module, name, value >= threshold, value, threshold, std::move(detail));
  }
  void add(const std::string& module, const std::string& name, bool ok, double value,
           double threshold, std::string detail = {}) {
    out_.invariants.push_back(
        {module, name, ok ? Status::Pass : Status::Fail, value, threshold, std::move(detail)});
  }
  void expected(const std::string& module, const std::string& name, std::string detail) {
    out_.invariants.push_back({module, name, Status::ExpectedPass, 0.0, 0.0, std::move(detail)});
  }
  // Runs a block; a module error counts as one failed invariant.
  void guard(const std::string& module, const std::string& name, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      add(module, name, false, 0.0, 0.0, e.what());
    }
  }

 private:
  ScenarioResult& out_;
};

resolvent::ResolventSpec spec_with(std::size_t cells) {
  resolvent::ResolventSpec spec;
  spec.cells = cells;
  return spec;
}

double max_abs_error(const Field& u, const std::function<double(double)>& exact) {
  double err = 0.0;
  for (std::size_t i = 0; i < u.x.size(); ++i) err = std::max(err, std::abs(u.values[i] - exact(u.x[i])));
  return err;
}

NonlinearitySpec power_minus_one(double e) {
  auto f = [e](double z) { return std::pow(std::max(z, 0.0), e) - 1.0; };
  return NonlinearitySpec(f, f, 1.0, e);
}

void torsion_p2(Recorder& rec, const VerifyOptions& opts) {
  const auto a = WeightProfile::uniform(1.0, 0.5);
  const auto geom = DomainGeometry::interval(1.0, 0.5);
  const Discretization disc(a, 2.0, geom, spec_with(opts.cells));
  rec.guard("weights", "validate_weight", [&] {
    const auto report = weights::validate_weight(a, weights::ExponentSet::make(2.0, 3, 2.0));
    rec.add("weights", "validate_weight", report.valid, 0.0, 0.0);
  });
  rec.guard("resolvent", "torsion closed form", [&] {
    const auto [u, rep] = resolvent::solve(disc, [](double) { return 1.0; });
    rec.at_most("resolvent", "torsion closed form",
                max_abs_error(u, [](double x) { return 0.5 * x * (1.0 - x); }), 1e-8);
    rec.at_most("resolvent", "weak residual", rep.residual_weak, 1e-9);
    const auto [u3, r3] = resolvent::solve(disc, [](double) { return 3.0; });
    double diff = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) diff = std::max(diff, std::abs(u3.values[i] - 3.0 * u.values[i]));
    rec.at_most("resolvent", "homogeneity t = 3", diff / (3.0 * u.sup_norm()), 1e-9);
    const auto [u2, r2] = resolvent::solve(disc, [](double x) { return 1.0 + x; });
    double worst = -1e300;
    for (std::size_t i = 0; i < u.values.size(); ++i) worst = std::max(worst, u.values[i] - u2.values[i]);
    rec.at_most("comparison", "L(1) <= L(1 + x)", worst, 1e-9);
    const auto g = disc.sample_points([](double, double) { return 1.0; });
    const double ratio = fixedpoint::apriori_check(disc, u, g);
    rec.at_most("fixedpoint", "apriori ratio", ratio, 10.0,
                "closed form " + std::to_string(0.125 / (2.0 + 1.0 / (2.0 * std::sqrt(30.0)))));
  });
  rec.guard("comparison", "psi bounds", [&] {
    const auto psi = comparison::build_psi(a, 2.0, geom);
    rec.at_most("comparison", "psi two-sided bound", psi.bound_violation, 1e-10);
    rec.at_most("comparison", "psi flux identity", psi.ode_residual, 1e-8);
  });
  rec.guard("fixedpoint", "constant source", [&] {
    const auto lo = disc.field_from([](double, double) { return 0.0; });
    const auto hi = disc.field_from([](double, double) { return 1.0; });
    const auto trunc = fixedpoint::truncate(disc, [](double, double, double) { return 1.0; }, lo, hi);
    fixedpoint::IterationOptions io;
    io.theta = 1.0;
    const auto [u, rep] = fixedpoint::iterate_T(trunc, disc, io);
    rec.add("fixedpoint", "constant source: one step", rep.iterations == 2 && rep.converged,
            rep.iterations - 1.0, 1.0);
  });
}

void torsion_p3(Recorder& rec, const VerifyOptions& opts) {
  rec.guard("resolvent", "p = 3 midpoint", [&] {
    const auto a = WeightProfile::uniform(1.0, 0.5);
    const Discretization disc(a, 3.0, DomainGeometry::interval(1.0, 0.5), spec_with(opts.cells));
    const auto [u, rep] = resolvent::solve(disc, [](double) { return 1.0; });
    const double exact = (2.0 / 3.0) * std::pow(0.5, 1.5);
    rec.at_most("resolvent", "p = 3 midpoint", std::abs(u.sup_norm() - exact), 1e-7);
    rec.at_most("resolvent", "weak residual", rep.residual_weak, 1e-9);
  });
}

void ball_torsion(Recorder& rec, const VerifyOptions& opts) {
  rec.guard("resolvent", "ball torsion", [&] {
    const auto a = WeightProfile::uniform(1.0, 0.5);
    const Discretization disc(a, 2.0, DomainGeometry::ball(1.0, 3, 0.5), spec_with(opts.cells));
    const auto [u, rep] = resolvent::solve(disc, [](double) { return 1.0; });
    rec.at_most("resolvent", "ball torsion N = 3",
                max_abs_error(u, [](double r) { return (1.0 - r * r) / 6.0; }), 1e-8);
    rec.at_most("resolvent", "weak residual", rep.residual_weak, 1e-9);
  });
}

void psi_power(Recorder& rec, const VerifyOptions&) {
  for (double alpha : {0.0, 0.3, 0.6}) {
    for (double p : {1.5, 2.0, 3.0}) {
      const std::string tag = "alpha = " + std::to_string(alpha).substr(0, 3) +
                              ", p = " + std::to_string(p).substr(0, 3);
      const auto a = WeightProfile::power(1.0, alpha, 0.5);
      if (alpha / (p - 1.0) >= 1.0) {
        try {
          (void)comparison::build_psi(a, p, 0.0, comparison::PsiSpec{});
          rec.add("comparison", "psi gate " + tag, false, 0.0, 0.0, "accepted a non-integrable weight");
        } catch (const Error& e) {
          if (e.code() == ErrorCode::InvalidExponents) {
            rec.expected("comparison", "psi gate " + tag, e.detail());
          } else {
            rec.add("comparison", "psi gate " + tag, false, 0.0, 0.0, e.what());
          }
        }
        continue;
      }
      rec.guard("comparison", "psi " + tag, [&] {
        const auto psi = comparison::build_psi(a, p, 0.0, comparison::PsiSpec{});
        rec.at_most("comparison", "psi bound " + tag, psi.bound_violation, 1e-10);
        rec.at_most("comparison", "psi flux identity " + tag, psi.ode_residual, 1e-8);
      });
    }
  }
}

void gluing(Recorder& rec, const VerifyOptions& opts) {
  rec.guard("barriers", "gluing", [&] {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double value_gap = 0.0;
    double flux_gap = 0.0;
    for (int draw = 0; draw < 100; ++draw) {
      const double p = 1.5 + 2.0 * unit(rng);
      const double alpha = 0.9 * (p - 1.0) * unit(rng) * (draw % 2);
      const double rho0 = 0.2 + 0.3 * unit(rng);
      const auto a = WeightProfile::power(0.5 + unit(rng), alpha, rho0);
      SubsolutionParams params;
      params.r = 0.5 * (p - 1.0);
      params.sigma = 1.0 / (p - 1.0 - 0.5 * params.r);
      params.beta = 1.0 + (0.05 + 0.9 * unit(rng)) / (p - 1.0);
      params.epsilon = 0.5;
      params.rho1 = rho0;
      const double rho = rho0 * (0.05 + 0.9 * unit(rng));
      const barriers::Subsolution sub(a, p, 0.0, params, 0.5, 1e3, rho);
      value_gap = std::max(value_gap, sub.value_gap());
      flux_gap = std::max(flux_gap, sub.flux_gap());
    }
    rec.at_most("barriers", "gluing value continuity (100 draws)", value_gap, 1e-12);
    rec.at_most("barriers", "gluing flux identity (100 draws)", flux_gap, 1e-12);
  });
}

void subsolution_p3(Recorder& rec, const VerifyOptions& opts) {
  const auto a = WeightProfile::uniform(1.0, 0.5);
  const auto geom = DomainGeometry::interval(1.0, 0.5);
  SubsolutionParams params;
  params.r = 1.5;
  params.sigma = 1.0;
  params.beta = 1.2;
  params.rho1 = 0.5;
  rec.guard("barriers", "solve_rho", [&] {
    const auto r = barriers::solve_rho(a, geom, params, 3.0, 77.76 * 77.76);
    rec.at_most("barriers", "rho_hat = 1/3", std::abs(r.rho_hat - 1.0 / 3.0), 1e-6);
    rec.at_most("barriers", "lambda_hat1 = 77.76^2", std::abs(r.lambda_hat1 / (77.76 * 77.76) - 1.0), 1e-3);
  });
  rec.guard("barriers", "subsolution residual", [&] {
    const Discretization disc(a, 3.0, geom, spec_with(opts.cells));
    const BarrierProblem problem{power_minus_one(1.5), CoefficientB::uniform(1.0, 1.0, 1.0, 0.5), params, &disc};
    const auto th = barriers::compute_thresholds(problem);
    rec.add("barriers", "lambda_hat1 <= lambda_star <= lambda_0",
            th.lambda_hat1 <= th.lambda_star && th.lambda_star <= th.lambda_0, th.lambda_0, th.lambda_star);
    const double lambda = std::max(th.lambda_star, 4.0 * th.lambda_hat1);
    const auto [sub, cert] = barriers::build_subsolution(problem, lambda, th);
    rec.at_most("barriers", "signed residual", cert.max_residual, 1e-8);
    rec.add("barriers", "phi increasing", sub.phi_increasing(), sub.phi_rho1(), 1.0);
    const auto pair = barriers::build_barriers(problem, th.lambda_0);
    rec.at_least("barriers", "u_lower <= u_upper", pair.ordering_gap, -1e-10 * std::max(1.0, pair.u_lower.sup_norm()));
    rec.at_most("barriers", "supersolution certificate", pair.super_certificate, 0.0);
    double interior = 1e300;
    for (std::size_t i = 1; i + 1 < pair.u_lower.values.size(); ++i) interior = std::min(interior, pair.u_lower.values[i]);
    rec.at_least("barriers", "u_lower > 0 inside", interior, 1e-300);
  });
}

void semipositone(Recorder& rec, const VerifyOptions& opts) {
  const auto a = WeightProfile::uniform(1.0, 0.5);
  const auto geom = DomainGeometry::interval(1.0, 0.5);
  const Discretization disc(a, 2.0, geom, spec_with(opts.cells));
  auto f = [](double z) { return std::sqrt(std::max(z, 0.0)) - 1.0; };
  SubsolutionParams params;
  params.r = 0.5;
  params.sigma = 1.2;
  params.beta = 1.2;
  params.epsilon = 0.5;
  params.rho1 = 0.5;
  const BarrierProblem problem{NonlinearitySpec(f, f, 1.0, 0.5), CoefficientB::uniform(1.0, 1.0, 1.0, 0.5), params, &disc};
  rec.guard("barriers", "supersolution at lambda = 64", [&] {
    const auto super = barriers::build_supersolution(problem, 64.0);
    const double zeta = std::pow(4.0 + 2.0 * std::sqrt(2.0), 2.0);
    rec.at_most("barriers", "zeta_lambda at lambda = 64", std::abs(super.zeta / zeta - 1.0), 1e-6);
    rec.at_most("barriers", "supersolution certificate", super.certificate, 0.0);
  });
  rec.guard("fixedpoint", "pipeline", [&] {
    const auto th = barriers::compute_thresholds(problem);
    const auto res = fixedpoint::solve_semipositone(problem, 2.0 * th.lambda_0);
    rec.add("fixedpoint", "converged", res.report.converged, res.report.iterations, 200.0);
    rec.at_most("fixedpoint", "Picard steps", res.report.iterations, 200.0);
    rec.at_least("fixedpoint", "sandwich", res.report.sandwich_gap, 0.0);
    rec.at_least("fixedpoint", "positive on the middle third", res.middle_third_min, 1e-300);
    rec.at_most("fixedpoint", "weak residual", res.report.residual, 1e-6);
    rec.at_most("fixedpoint", "apriori ratio", res.apriori_ratio, 10.0);
  });
}

void ball_inadmissible(Recorder& rec, const VerifyOptions& opts) {
  const auto a = WeightProfile::uniform(1.0, 0.5);
  SubsolutionParams params;
  params.r = 1.5;
  params.sigma = 1.0;
  params.beta = 1.2;
  params.rho1 = 0.5;
  const CoefficientB b = CoefficientB::uniform(1.0, 1.0, 1.0, 0.5);
  try {
    const Discretization disc(a, 3.0, DomainGeometry::ball(1.0, 3, 0.5), spec_with(opts.cells));
    const BarrierProblem problem{power_minus_one(1.5), b, params, &disc};
    const auto th = barriers::subsolution_thresholds(problem);
    (void)barriers::build_subsolution(problem, th.lambda_star, th);
    rec.add("barriers", "ball collar refused", false, 0.0, 0.0, "ball collar was accepted");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::GeometryInadmissible) {
      rec.expected("barriers", "ball collar refused", e.detail());
    } else {
      rec.add("barriers", "ball collar refused", false, 0.0, 0.0, e.what());
    }
  }
  rec.guard("barriers", "annulus-inner collar accepted", [&] {
    const auto geom = DomainGeometry::annulus_inner_collar(1.0, 3, 0.5);
    const Discretization disc(a, 3.0, geom, spec_with(opts.cells));
    const BarrierProblem problem{power_minus_one(1.5), b, params, &disc};
    const auto th = barriers::subsolution_thresholds(problem);
    const auto [sub, cert] = barriers::build_subsolution(problem, th.lambda_star, th);
    rec.at_most("barriers", "annulus-inner collar accepted", cert.max_residual, 1e-8,
                "Lambda = " + std::to_string(th.Lambda));
  });
}

void moser(Recorder& rec, const VerifyOptions&) {
  const auto ladder = fixedpoint::moser_ladder(2.0, 3.0, 60);
  rec.at_most("fixedpoint", "eps_1 = 0.5", std::abs(ladder.epsilons[1] - 0.5), 1e-15);
  rec.at_most("fixedpoint", "eps_2 = 1.25", std::abs(ladder.epsilons[2] - 1.25), 1e-15);
  rec.at_most("fixedpoint", "exponent sum -> 3", std::abs(ladder.partial_sums.back() - 3.0), 1e-9);
  double worst = 0.0;
  double one = 1.0;
  for (int n = 1; n <= 40; ++n) {
    one *= 1.5;
    worst = std::max(worst, std::abs(ladder.epsilons[n] - (one - 1.0)) / (one - 1.0));
  }
  rec.at_most("fixedpoint", "eps_n closed form, n <= 40", worst, 1e-12);
}

const std::map<std::string, std::function<void(Recorder&, const VerifyOptions&)>>& registry() {
  static const std::map<std::string, std::function<void(Recorder&, const VerifyOptions&)>> r = {
      {"torsion-p2", torsion_p2},       {"torsion-p3", torsion_p3},
      {"ball-torsion", ball_torsion},   {"psi-power", psi_power},
      {"gluing", gluing},               {"subsolution-p3", subsolution_p3},
      {"semipositone", semipositone},   {"ball-inadmissible", ball_inadmissible},
      {"moser", moser}};
  return r;
}

}  // namespace

std::string to_string(Status status) {
  switch (status) {
    case Status::Pass:
      return "PASS";
    case Status::Fail:
      return "FAIL";
    case Status::ExpectedPass:
      return "EXPECTED-PASS";
  }
  return "FAIL";
}

bool ScenarioResult::passed() const {
  for (const auto& inv : invariants) {
    if (inv.status == Status::Fail) return false;
  }
  return !invariants.empty();
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : registry()) out.push_back(name);
    return out;
  }();
  return names;
}

ScenarioResult run_scenario(const std::string& name, const VerifyOptions& opts) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw Error(ErrorCode::ConfigError, "unknown scenario " + name);
  ScenarioResult out;
  out.name = name;
  Recorder rec(out);
  it->second(rec, opts);
  return out;
}

}  // namespace degenlap::verify
