#include "degenlap/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "degenlap/error.hpp"

namespace degenlap::comparison {

double PsiBarrier::operator()(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= y.back()) return psi.back();
  const auto it = std::upper_bound(y.begin(), y.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - y.begin()) - 1;
  const double s = (t - y[i]) / (y[i + 1] - y[i]);
  return (1.0 - s) * psi[i] + s * psi[i + 1];
}

double choose_A(const weights::WeightProfile& profile, double p, double Lambda, double rho0,
                double margin) {
  if (!(margin > 0.0)) {
    throw Error(ErrorCode::MarginTooSmall, "margin must be > 0 for a strict inequality");
  }
  quadrature::QuadratureSpec spec;
  const double gamma = profile.singular_exponent(p);
  if (gamma > 0.0) spec.singularity_hint = gamma;
  double total = 0.0;
  try {
    total = quadrature::integrate(
        [&](double t) { return std::exp(Lambda * t) * profile.inverse_root(t, p); }, 0.0, rho0,
        spec);
  } catch (const Error& e) {
    throw Error(ErrorCode::QuadratureError, std::string(e.what()));
  }
  return (1.0 + margin) * total;
}

PsiBarrier build_psi(const weights::WeightProfile& profile, double p,
                     const geometry::DomainGeometry& geom, const PsiSpec& spec) {
  const double Lambda = geom.lambda_constants(geom.rho0()).lambda_abs;
  return build_psi(profile, p, Lambda, spec);
}

PsiBarrier build_psi(const weights::WeightProfile& profile, double p, double Lambda,
                     const PsiSpec& spec) {
  const double rho0 = profile.rho0();
  const double gamma = profile.singular_exponent(p);
  if (gamma >= 1.0) {
    throw Error(ErrorCode::InvalidExponents, "a^{-1/(p-1)} is not integrable at the boundary");
  }
  const double e = 1.0 / (p - 1.0);

  PsiBarrier out;
  out.Lambda = Lambda;
  out.margin = spec.margin;
  out.p = p;
  out.A = choose_A(profile, p, Lambda, rho0, spec.margin);

  quadrature::MeshGrading grading{spec.grading_ratio, spec.finest * rho0, true, false};
  quadrature::QuadratureLayout layout(quadrature::graded_mesh(0.0, rho0, spec.cells, grading),
                                      gamma, 0.0, spec.order);
  const auto pts = layout.points();
  const auto offs = layout.lo_offsets();
  const std::size_t npts = pts.size();
  std::vector<double> ainv(npts);
  std::vector<double> growth(npts);
  for (std::size_t k = 0; k < npts; ++k) {
    ainv[k] = profile.inverse_root(offs[k], p);
    growth[k] = std::exp(Lambda * offs[k]) * ainv[k];
  }
  const auto G = layout.cumulative(growth);
  const auto D = layout.cumulative(ainv);
  out.total = G.at_nodes.back();
  if (!(out.A > out.total)) {
    std::ostringstream os;
    os << "A = " << out.A << " does not exceed the collar integral " << out.total;
    throw Error(ErrorCode::MarginTooSmall, os.str());
  }

  std::vector<double> dpsi_pts(npts);
  std::vector<double> flux_pts(npts);
  for (std::size_t k = 0; k < npts; ++k) {
    const double gap = out.A - G.at_points[k];
    flux_pts[k] = std::exp(-Lambda * offs[k]) * gap;
    dpsi_pts[k] = std::exp(-Lambda * offs[k] * e) * ainv[k] * std::pow(gap, e);
  }
  const auto Psi = layout.cumulative(dpsi_pts);

  const auto nodes = layout.nodes();
  out.y.assign(nodes.begin(), nodes.end());
  out.d = D.at_nodes;
  out.psi = Psi.at_nodes;
  out.dpsi.resize(out.y.size());
  out.flux.resize(out.y.size());
  for (std::size_t i = 0; i < out.y.size(); ++i) {
    const double yi = out.y[i];
    const double gap = out.A - G.at_nodes[i];
    out.flux[i] = std::exp(-Lambda * yi) * gap;
    out.dpsi[i] = std::exp(-Lambda * yi * e) * profile.inverse_root(yi, p) * std::pow(gap, e);
  }

  out.upper = std::pow(out.A, e);
  out.lower = std::exp(-Lambda * rho0 * e) * std::pow(out.A - out.total, e);
  out.Cbound = std::max(out.upper, 1.0 / out.lower);
  out.C_displayed =
      std::max(out.A, std::exp(Lambda * rho0 * e) / (out.A - out.total));

  for (std::size_t i = 1; i < out.y.size(); ++i) {
    const double ratio = out.psi[i] / out.d[i];
    const double excess = std::max(ratio / out.Cbound - 1.0, 1.0 / (ratio * out.Cbound) - 1.0);
    out.bound_violation = std::max(out.bound_violation, excess);
  }

  // -(F(x_{i+1}) - F(x_i)) - Lambda int F = int a^{-1/(p-1)} on every cell.
  const std::size_t n = layout.order();
  const auto w = layout.weights();
  double worst = 0.0;
  double scale = 0.0;
  for (std::size_t c = 0; c < layout.cells(); ++c) {
    double int_flux = 0.0;
    double int_ainv = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      int_flux += w[c * n + j] * flux_pts[c * n + j];
      int_ainv += w[c * n + j] * ainv[c * n + j];
    }
    const double r = -(out.flux[c + 1] - out.flux[c]) - Lambda * int_flux - int_ainv;
    worst = std::max(worst, std::abs(r));
    scale = std::max(scale, int_ainv);
  }
  out.ode_residual = scale > 0.0 ? worst / scale : worst;
  return out;
}

double boundary_quotient(const Field& u, const weights::WeightProfile& profile, double p,
                         double rho) {
  if (rho > profile.rho0()) {
    throw Error(ErrorCode::OutOfCollar, "boundary_quotient needs rho <= rho0");
  }
  weights::WeightedDistance d(profile, p);
  double q = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const double y = u.dist[i];
    if (!(y > 0.0) || y > rho) continue;
    q = std::max(q, std::abs(u.values[i]) / d(y));
  }
  return std::isfinite(q) ? q : std::numeric_limits<double>::infinity();
}

double barrier_multiplier(double K, double p, double d_rho, double Cbound) {
  if (K < 0.0) throw Error(ErrorCode::InvalidArgument, "barrier_multiplier needs K >= 0");
  double M = std::max({std::pow(K, 1.0 / (p - 1.0)), Cbound / d_rho, 1e-6});
  for (int k = 0; k < 100000; ++k) {
    if (std::pow(M, p - 1.0) > K && M * d_rho >= Cbound) return M;
    M *= 1.1;
  }
  throw Error(ErrorCode::InvalidArgument, "barrier_multiplier grid exhausted");
}

double barrier_multiplier(double K, const weights::WeightProfile& profile, double p, double rho,
                          const PsiBarrier& psi) {
  return barrier_multiplier(K, p, weights::weighted_distance(profile, p, rho), psi.Cbound);
}

}  // namespace degenlap::comparison
