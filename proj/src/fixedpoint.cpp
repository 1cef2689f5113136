#include "degenlap/fixedpoint.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace degenlap::fixedpoint {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

double interpolate(const Field& f, double x) {
  const auto& xs = f.x;
  if (x <= xs.front()) return f.values.front();
  if (x >= xs.back()) return f.values.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
  const double s = (x - xs[i]) / (xs[i + 1] - xs[i]);
  return (1.0 - s) * f.values[i] + s * f.values[i + 1];
}

void require_layout(const Field& f, const resolvent::Discretization& disc, const char* what) {
  if (f.values.size() != disc.nodes().size() || f.point_values.size() != disc.points().size()) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " is not sampled on this discretization");
  }
}

// Flux m a |u'|^{p-2} u' at the points from the point derivatives.
std::vector<double> point_flux(const resolvent::Discretization& disc, const Field& u) {
  const double p = disc.p();
  const auto& meas = disc.point_measure();
  const auto& ainv = disc.point_inverse_root();
  std::vector<double> out(meas.size(), 0.0);
  if (u.point_derivs.size() != meas.size()) return out;
  for (std::size_t k = 0; k < meas.size(); ++k) {
    const double a = std::pow(ainv[k], -(p - 1.0));
    const double g = u.point_derivs[k];
    out[k] = meas[k] * a * std::pow(std::abs(g), p - 2.0) * g;
  }
  return out;
}

Field blend(const Field& u, const Field& w, double theta, const resolvent::Discretization& disc) {
  if (theta == 1.0) return w;
  Field out = w;
  auto mix = [theta](std::vector<double>& dst, const std::vector<double>& old) {
    if (old.size() != dst.size()) {
      for (double& v : dst) v *= theta;
      return;
    }
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = (1.0 - theta) * old[i] + theta * dst[i];
  };
  mix(out.values, u.values);
  mix(out.point_values, u.point_values);
  mix(out.point_derivs, u.point_derivs);
  out.point_flux = point_flux(disc, out);
  out.flux.clear();
  return out;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void finish(const TruncatedRHS& trunc, const resolvent::Discretization& disc, const Field& u,
            IterationReport& report) {
  const auto rhs = trunc.sample(disc, u);
  const auto flux = u.point_flux.size() == rhs.size() ? u.point_flux : point_flux(disc, u);
  report.residual = disc.weak_residual(flux, rhs);
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    gap = std::min(gap, u.values[i] - trunc.lower().values[i] + report.tol);
    gap = std::min(gap, trunc.upper().values[i] + report.tol - u.values[i]);
  }
  report.sandwich_gap = gap;
  report.sandwich = gap >= 0.0;
}

double default_tol(const TruncatedRHS& trunc, const IterationOptions& opts) {
  return opts.tol > 0.0 ? opts.tol : 1e-10 * (1.0 + trunc.upper().sup_norm());
}

}  // namespace

TruncatedRHS::TruncatedRHS(Source F, Field u_lower, Field u_upper, double zeta0, double bound)
    : F_(std::move(F)),
      lower_(std::move(u_lower)),
      upper_(std::move(u_upper)),
      zeta0_(zeta0),
      bound_(bound) {}

double TruncatedRHS::at_point(std::size_t k, double x, double dist, double zeta) const {
  return F_(x, dist, std::clamp(zeta, lower_.point_values[k], upper_.point_values[k]));
}

double TruncatedRHS::operator()(double x, double dist, double zeta) const {
  const double lo = interpolate(lower_, x);
  const double hi = std::max(lo, interpolate(upper_, x));
  return F_(x, dist, std::clamp(zeta, lo, hi));
}

std::vector<double> TruncatedRHS::sample(const resolvent::Discretization& disc,
                                         const Field& u) const {
  const auto pts = disc.points();
  const auto& dist = disc.point_dist();
  std::vector<double> out(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    out[k] = at_point(k, pts[k], dist[k], u.point_values[k]);
  }
  return out;
}

Field TruncatedRHS::clamp(const Field& u) const {
  Field out = u;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = std::clamp(out.values[i], lower_.values[i], upper_.values[i]);
  }
  for (std::size_t k = 0; k < out.point_values.size(); ++k) {
    out.point_values[k] =
        std::clamp(out.point_values[k], lower_.point_values[k], upper_.point_values[k]);
  }
  return out;
}

TruncatedRHS truncate(const resolvent::Discretization& disc, Source F, const Field& u_lower,
                      const Field& u_upper, double zeta0,
                      const resolvent::Discretization::PointFunction& b) {
  require_layout(u_lower, disc, "u_lower");
  require_layout(u_upper, disc, "u_upper");
  const double tol = 1e-10 * std::max(1.0, u_lower.sup_norm());
  for (std::size_t i = 0; i < u_lower.values.size(); ++i) {
    if (u_lower.values[i] > u_upper.values[i] + tol) {
      throw Error(ErrorCode::UnorderedPair,
                  "u_lower > u_upper at x = " + num(u_lower.x[i]) + " (" +
                      num(u_lower.values[i]) + " > " + num(u_upper.values[i]) + ")");
    }
  }
  Field upper = u_upper;
  for (std::size_t k = 0; k < upper.point_values.size(); ++k) {
    if (u_lower.point_values[k] > upper.point_values[k] + tol) {
      throw Error(ErrorCode::UnorderedPair, "u_lower > u_upper at quadrature point " +
                                                num(disc.points()[k]));
    }
    upper.point_values[k] = std::max(upper.point_values[k], u_lower.point_values[k]);
  }
  for (std::size_t i = 0; i < upper.values.size(); ++i) {
    upper.values[i] = std::max(upper.values[i], u_lower.values[i]);
  }

  // C_M from samples across the band at every point.
  const auto pts = disc.points();
  const auto& dist = disc.point_dist();
  double bound = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double lo = u_lower.point_values[k];
    const double hi = upper.point_values[k];
    const double bk = b ? b(pts[k], dist[k]) : 1.0;
    if (!(bk > 0.0)) continue;
    for (int j = 0; j <= 8; ++j) {
      const double z = lo + (hi - lo) * j / 8.0;
      bound = std::max(bound, std::abs(F(pts[k], dist[k], z)) / bk);
    }
  }
  return TruncatedRHS(std::move(F), u_lower, std::move(upper), zeta0, bound);
}

std::pair<Field, IterationReport> iterate_T(const TruncatedRHS& trunc,
                                            const resolvent::Discretization& disc,
                                            const IterationOptions& opts) {
  if (!(opts.theta > 0.0 && opts.theta <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "damping theta must lie in (0, 1]");
  }
  IterationReport report;
  report.theta = opts.theta;
  report.tol = default_tol(trunc, opts);
  report.scheme = "picard";
  Field u = trunc.lower();
  for (int k = 0; k < opts.max_iter; ++k) {
    const auto g = trunc.sample(disc, u);
    Field next = blend(u, resolvent::solve(disc, g).first, opts.theta, disc);
    const double inc = sup_diff(next.values, u.values);
    report.increments.push_back(inc);
    report.iterations = k + 1;
    u = std::move(next);
    if (!std::isfinite(inc)) {
      throw IterationError(ErrorCode::NaNEncountered, "iterate is not finite", report, u);
    }
    if (inc <= report.tol) {
      report.converged = true;
      break;
    }
  }
  if (report.converged && opts.theta < 1.0) {
    // Undamped final step: u = T(u_k), whose flux matches F~(u_k) exactly.
    u = resolvent::solve(disc, trunc.sample(disc, u)).first;
  }
  u.label = "u";
  finish(trunc, disc, u, report);
  if (!report.converged) {
    throw IterationError(ErrorCode::NoConvergence,
                         "no convergence in " + std::to_string(opts.max_iter) +
                             " steps, last increment " + num(report.increments.back()),
                         report, u);
  }
  const double residual_tol = 10.0 * report.tol / (1.0 + trunc.upper().sup_norm());
  if (report.residual > residual_tol) {
    throw IterationError(ErrorCode::NoConvergence,
                         "weak residual " + num(report.residual) + " exceeds " + num(residual_tol),
                         report, u);
  }
  if (!report.sandwich) {
    throw IterationError(ErrorCode::SandwichViolated,
                         "fixed point leaves the band by " + num(-report.sandwich_gap), report, u);
  }
  return {u, report};
}

std::pair<Field, IterationReport> monotone_iterate(const TruncatedRHS& trunc,
                                                   const resolvent::Discretization& disc,
                                                   const IterationOptions& opts,
                                                   bool from_upper) {
  IterationReport report;
  report.theta = 1.0;
  report.tol = default_tol(trunc, opts);
  report.scheme = from_upper ? "monotone-from-upper" : "monotone-from-lower";

  const auto pts = disc.points();
  const auto& dist = disc.point_dist();
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double lo = trunc.lower().point_values[k];
    const double hi = trunc.upper().point_values[k];
    double prev = trunc.at_point(k, pts[k], dist[k], lo);
    for (int j = 1; j <= 8; ++j) {
      const double cur = trunc.at_point(k, pts[k], dist[k], lo + (hi - lo) * j / 8.0);
      if (cur < prev - 1e-12 * (1.0 + std::abs(prev))) {
        throw IterationError(ErrorCode::MonotonicityViolated,
                             "F~ decreases in zeta at x = " + num(pts[k]), report,
                             trunc.lower());
      }
      prev = cur;
    }
  }

  Field u = from_upper ? trunc.upper() : trunc.lower();
  for (int k = 0; k < opts.max_iter; ++k) {
    const auto g = trunc.sample(disc, u);
    Field next = resolvent::solve(disc, g).first;
    double inc = 0.0;
    for (std::size_t i = 0; i < next.values.size(); ++i) {
      const double step = next.values[i] - u.values[i];
      const bool wrong = from_upper ? step > report.tol : step < -report.tol;
      const bool outside = next.values[i] > trunc.upper().values[i] + report.tol ||
                           next.values[i] < trunc.lower().values[i] - report.tol;
      if (wrong || outside) {
        report.iterations = k + 1;
        throw IterationError(ErrorCode::MonotonicityViolated,
                             std::string(wrong ? "iterate moves against its direction"
                                               : "iterate leaves the band") +
                                 " at x = " + num(next.x[i]) + " in step " +
                                 std::to_string(k + 1),
                             report, next);
      }
      inc = std::max(inc, std::abs(step));
    }
    report.increments.push_back(inc);
    report.iterations = k + 1;
    u = std::move(next);
    if (inc <= report.tol) {
      report.converged = true;
      break;
    }
  }
  u.label = "u";
  finish(trunc, disc, u, report);
  if (!report.converged) {
    throw IterationError(ErrorCode::NoConvergence,
                         "no convergence in " + std::to_string(opts.max_iter) + " steps", report,
                         u);
  }
  return {u, report};
}

SemipositoneResult solve_semipositone(const barriers::BarrierProblem& problem, double lambda,
                                      const IterationOptions& opts) {
  const auto& disc = *problem.disc;
  SemipositoneResult out;
  auto staged = [](const char* stage, auto&& fn) {
    try {
      return fn();
    } catch (const IterationError&) {
      throw;
    } catch (const Error& e) {
      throw Error(e.code(), std::string(stage) + ": " + e.detail());
    }
  };
  out.pair = staged("barriers", [&] { return barriers::build_barriers(problem, lambda); });
  out.zeta0 = std::max(out.pair.u_lower.sup_norm(), out.pair.u_upper.sup_norm()) + 1.0;
  const double zeta0 = out.zeta0;
  const auto& nl = problem.nonlinearity;
  const auto& b = problem.b;
  Source F = [&nl, &b, lambda, zeta0](double, double dist, double z) {
    return lambda * b(dist) * nl.f(std::clamp(z, 0.0, zeta0));
  };
  const auto trunc = staged("truncation", [&] {
    return truncate(disc, F, out.pair.u_lower, out.pair.u_upper, zeta0,
                    [&b](double, double dist) { return b(dist); });
  });
  auto [u, report] = staged("iteration", [&] { return iterate_T(trunc, disc, opts); });
  out.u = std::move(u);
  out.report = std::move(report);
  auto g = trunc.sample(disc, out.u);
  for (double& v : g) v = std::abs(v);
  out.apriori_ratio = apriori_check(disc, out.u, g);
  out.middle_third_min = middle_third_min(out.u);
  return out;
}

MoserLadder moser_ladder(double p, double p_s_star, int n_max) {
  if (!(p < p_s_star)) throw Error(ErrorCode::InvalidExponents, "moser_ladder needs p < p_s*");
  if (n_max < 0) throw Error(ErrorCode::InvalidArgument, "n_max must be >= 0");
  MoserLadder ladder;
  ladder.p = p;
  ladder.p_s_star = p_s_star;
  ladder.limit = p_s_star / (p_s_star - p);
  double sum = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    const double eps = n == 0 ? 0.0 : std::pow(p_s_star / p, n) - 1.0;
    ladder.epsilons.push_back(eps);
    sum += std::pow(p / p_s_star, n);
    ladder.partial_sums.push_back(sum);
    ladder.constants.push_back(std::pow(1.0 + eps, p) / (1.0 + eps * p));
  }
  return ladder;
}

double apriori_check(const resolvent::Discretization& disc, const Field& u,
                     std::span<const double> b_points) {
  const double sup = u.sup_norm();
  if (sup == 0.0) return 0.0;
  return sup / (1.0 + disc.l1_norm(b_points) + disc.lp_norm(u, disc.p()));
}

double middle_third_min(const Field& u) {
  const double lo = u.x.front();
  const double hi = u.x.back();
  const double a = lo + (hi - lo) / 3.0;
  const double b = hi - (hi - lo) / 3.0;
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < u.x.size(); ++i) {
    if (u.x[i] >= a && u.x[i] <= b) m = std::min(m, u.values[i]);
  }
  return m;
}

}  // namespace degenlap::fixedpoint
